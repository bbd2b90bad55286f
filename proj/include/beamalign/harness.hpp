#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "beamalign/baselines.hpp"
#include "beamalign/channel.hpp"
#include "beamalign/optimizer.hpp"

namespace beamalign {

enum class Method { GpBo, GbrtBo, RfBo, Omp, TsMab, Exhaustive };

std::string_view method_name(Method m);
/// Accepts the CSV names (GP-BO, GBRT-BO, RF-BO, OMP, TS-MAB, EXHAUSTIVE), case-insensitive.
Method parse_method(std::string_view name);
bool is_bayesian(Method m);
std::vector<Method> all_methods();

enum class Normalization { PerTrial, RatioOfAverages };

class DegenerateBaseline : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
    /// sigma_n_sq is overwritten from each SNR point.
    ChannelParams channel;
    std::size_t g_tx = 64;
    std::size_t g_rx = 16;
    std::vector<double> snr_db{0.0};
    std::vector<Method> methods = all_methods();
    std::vector<std::size_t> budgets{16, 32, 48, 64, 80, 96, 112, 128, 144, 160};
    std::size_t trials = 200;
    std::uint64_t seed = 1;
    std::string out_path;

    /// m_init, candidate counts and surrogate hyperparameters; n_iters is derived
    /// from the largest budget.
    BoConfig bo;
    /// 0 means "use channel.n_paths".
    std::size_t omp_sparsity = 0;
    OmpProbes omp_probes = OmpProbes::CodebookPairs;
    TsMabConfig ts_mab;
    Normalization normalization = Normalization::PerTrial;
    /// Report the surrogate-mean argmax instead of the best observed pair.
    bool surrogate_argmax = false;
    /// Worker threads; 0 means one per hardware thread.
    std::size_t threads = 0;

    /// Throws ConfigError.
    void validate() const;
};

struct CurvePoint {
    std::string method;
    double snr_db = 0.0;
    std::size_t measurements = 0;
    double mean_norm_se = 0.0;
    double stderr_norm_se = 0.0;
    std::size_t trials = 0;
};

/// sp_x / sp_es; throws DegenerateBaseline when sp_es <= 0.
double normalized_spectral_efficiency(double sp_x, double sp_es);

/// Per-trial normalised SE for every (method, snr, budget) cell; one channel per
/// trial shared across methods and SNR points.
std::vector<CurvePoint> run_measurement_sweep(const ExperimentConfig& config);
std::vector<CurvePoint> run_snr_sweep(const ExperimentConfig& config);

/// Rows sorted by (method, snr_db, measurements).
std::string format_csv(std::vector<CurvePoint> points);
/// Throws std::runtime_error naming the path on I/O failure.
void write_csv(const std::vector<CurvePoint>& points, const std::string& path);

struct SingleRunResult {
    Method method = Method::GbrtBo;
    ChannelRealization channel;
    RunTrace trace;
    BeamPair chosen;
    double spectral_efficiency = 0.0;
    double exhaustive_spectral_efficiency = 0.0;
};

/// One method on the trial-0 channel at the first SNR point and the largest budget.
SingleRunResult single_run(const ExperimentConfig& config, Method method);

/// iter,theta,phi,rss,best_rss
std::string format_trace_csv(const RunTrace& trace);
void write_trace_csv(const RunTrace& trace, const std::string& path);

/// Flat `key = value` file; '#' starts a comment. Keys mirror ExperimentConfig.
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});
/// Applies one key/value pair; throws ConfigError on unknown keys or bad values.
void apply_config_entry(ExperimentConfig& config, std::string_view key, std::string_view value);

std::vector<double> parse_real_list(std::string_view text);
std::vector<std::size_t> parse_count_list(std::string_view text);
std::vector<Method> parse_method_list(std::string_view text);

}  // namespace beamalign
