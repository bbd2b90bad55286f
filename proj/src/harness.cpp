#include "beamalign/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace beamalign {

namespace {

// Stream labels mixed into Rng::derive.
constexpr std::uint64_t kChannelStream = 0xC4A77E1;
constexpr std::uint64_t kDenominatorStream = 0xDE7107;
constexpr std::uint64_t kRecommendStream = 0x5EC0DD;

std::uint64_t method_label(Method m) { return 100 + static_cast<std::uint64_t>(m); }
std::uint64_t snr_label(double snr_db) { return std::bit_cast<std::uint64_t>(snr_db); }

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

SurrogateKind surrogate_of(Method m) {
    switch (m) {
        case Method::GpBo: return SurrogateKind::GaussianProcess;
        case Method::RfBo: return SurrogateKind::RandomForest;
        default: return SurrogateKind::BoostedTrees;
    }
}

}  // namespace

std::string_view method_name(Method m) {
    switch (m) {
        case Method::GpBo: return "GP-BO";
        case Method::GbrtBo: return "GBRT-BO";
        case Method::RfBo: return "RF-BO";
        case Method::Omp: return "OMP";
        case Method::TsMab: return "TS-MAB";
        case Method::Exhaustive: return "EXHAUSTIVE";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    const std::string u = upper(name);
    for (const auto m : all_methods())
        if (u == method_name(m)) return m;
    throw ConfigError("unknown method '" + std::string(name) + "'");
}

bool is_bayesian(Method m) { return m == Method::GpBo || m == Method::GbrtBo || m == Method::RfBo; }

std::vector<Method> all_methods() {
    return {Method::GpBo, Method::GbrtBo, Method::RfBo, Method::Omp, Method::TsMab, Method::Exhaustive};
}

void ExperimentConfig::validate() const {
    try {
        channel.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (g_tx < 1 || g_rx < 1) throw ConfigError("codebook sizes must be >= 1");
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (snr_db.empty()) throw ConfigError("SNR list is empty");
    for (const double s : snr_db)
        if (!std::isfinite(s)) throw ConfigError("SNR values must be finite");
    if (methods.empty()) throw ConfigError("method list is empty");
    if (budgets.empty()) throw ConfigError("budget list is empty");
    const std::size_t grid = g_tx * g_rx;
    const std::size_t sparsity = omp_sparsity ? omp_sparsity : channel.n_paths;
    for (const auto b : budgets) {
        if (b < 1) throw ConfigError("budgets must be >= 1");
        for (const auto m : methods) {
            if (is_bayesian(m) && b < bo.m_init)
                throw ConfigError("budget " + std::to_string(b) + " is below m_init = " + std::to_string(bo.m_init));
            if (m == Method::Omp && (b < sparsity || b > grid))
                throw ConfigError("OMP budget " + std::to_string(b) + " must lie in [sparsity, grid size]");
        }
    }
    if (bo.m_init < 1 || bo.m_init > grid) throw ConfigError("m_init must lie in [1, grid size]");
    if (!bo.grid_only && bo.n_candidates < 1) throw ConfigError("n_candidates must be >= 1");
}

double normalized_spectral_efficiency(double sp_x, double sp_es) {
    if (!(sp_es > 0.0)) throw DegenerateBaseline("exhaustive-search spectral efficiency is not positive");
    return sp_x / sp_es;
}

namespace {

struct Cell {
    double sp_x = 0.0;
    double sp_es = 0.0;
};

/// cells[method][snr][budget]
using TrialCells = std::vector<std::vector<std::vector<Cell>>>;

struct SweepContext {
    const ExperimentConfig& config;
    BeamCodebooks codebooks;
    std::size_t max_budget;
    std::size_t sparsity;
};

TrialCells run_trial_once(const SweepContext& ctx, std::size_t trial, std::uint64_t attempt) {
    const auto& cfg = ctx.config;
    Rng channel_rng(Rng::derive(cfg.seed, {trial, kChannelStream, attempt}));
    const ChannelRealization channel = draw_channel(channel_rng, cfg.channel);

    TrialCells cells(cfg.methods.size(),
                     std::vector<std::vector<Cell>>(cfg.snr_db.size(), std::vector<Cell>(cfg.budgets.size())));

    for (std::size_t s = 0; s < cfg.snr_db.size(); ++s) {
        const ChannelParams params = cfg.channel.with_snr_db(cfg.snr_db[s]);
        const std::uint64_t snr = snr_label(cfg.snr_db[s]);
        const auto score = [&](const BeamPair& z) {
            return spectral_efficiency(beamforming_gain(channel, z, params.d_over_lambda), params);
        };

        Rng es_rng(Rng::derive(cfg.seed, {trial, snr, kDenominatorStream, attempt}));
        const double sp_es = score(exhaustive_search(channel, ctx.codebooks, params, es_rng).pair);
        if (!(sp_es > 0.0)) throw DegenerateBaseline("zero exhaustive-search spectral efficiency");

        for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
            const Method method = cfg.methods[mi];
            const std::uint64_t label = method_label(method);
            auto& row = cells[mi][s];
            const auto put = [&](std::size_t b, double sp_x) { row[b] = {sp_x, sp_es}; };

            switch (method) {
                case Method::GpBo:
                case Method::GbrtBo:
                case Method::RfBo: {
                    BoConfig bo = cfg.bo;
                    bo.surrogate = surrogate_of(method);
                    bo.n_iters = ctx.max_budget - bo.m_init;
                    Rng rng(Rng::derive(cfg.seed, {trial, snr, label, attempt}));
                    // Each BO round depends only on earlier rounds, so the run for a
                    // smaller budget is exactly a prefix of the longest run.
                    const RunTrace trace = run_bo(channel, params, ctx.codebooks, bo, rng);
                    for (std::size_t b = 0; b < cfg.budgets.size(); ++b) {
                        const RunTrace prefix = trace.prefix(cfg.budgets[b]);
                        BeamPair pick = final_alignment(prefix);
                        if (cfg.surrogate_argmax) {
                            Rng rec(Rng::derive(cfg.seed, {trial, snr, label, kRecommendStream, cfg.budgets[b], attempt}));
                            pick = surrogate_recommendation(prefix, bo, ctx.codebooks, rec);
                        }
                        put(b, score(pick));
                    }
                    break;
                }
                case Method::Omp:
                    for (std::size_t b = 0; b < cfg.budgets.size(); ++b) {
                        Rng rng(Rng::derive(cfg.seed, {trial, snr, label, cfg.budgets[b], attempt}));
                        const auto res =
                            omp_align(channel, ctx.codebooks, cfg.budgets[b], ctx.sparsity, params, rng, cfg.omp_probes);
                        put(b, score(res.pair));
                    }
                    break;
                case Method::TsMab:
                    for (std::size_t b = 0; b < cfg.budgets.size(); ++b) {
                        Rng rng(Rng::derive(cfg.seed, {trial, snr, label, attempt}));
                        put(b, score(ts_mab_align(channel, ctx.codebooks, cfg.budgets[b], params, rng, cfg.ts_mab).pair));
                    }
                    break;
                case Method::Exhaustive: {
                    Rng rng(Rng::derive(cfg.seed, {trial, snr, label, attempt}));
                    const double sp = score(exhaustive_search(channel, ctx.codebooks, params, rng).pair);
                    for (std::size_t b = 0; b < cfg.budgets.size(); ++b) put(b, sp);
                    break;
                }
            }
        }
    }
    return cells;
}

TrialCells run_trial(const SweepContext& ctx, std::size_t trial, std::mutex& log_mutex) {
    constexpr std::uint64_t kMaxAttempts = 100;
    for (std::uint64_t attempt = 0; attempt < kMaxAttempts; ++attempt) {
        try {
            return run_trial_once(ctx, trial, attempt);
        } catch (const DegenerateBaseline& e) {
            std::lock_guard lock(log_mutex);
            std::cerr << "trial " << trial << ": " << e.what() << "; redrawing channel (attempt " << attempt + 1
                      << ")\n";
        }
    }
    throw DegenerateBaseline("trial " + std::to_string(trial) + ": no usable channel after redraws");
}

std::vector<CurvePoint> aggregate(const ExperimentConfig& cfg, const std::vector<TrialCells>& trials) {
    std::vector<CurvePoint> points;
    const double n = static_cast<double>(trials.size());
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi)
        for (std::size_t s = 0; s < cfg.snr_db.size(); ++s)
            for (std::size_t b = 0; b < cfg.budgets.size(); ++b) {
                CurvePoint p;
                p.method = std::string(method_name(cfg.methods[mi]));
                p.snr_db = cfg.snr_db[s];
                p.measurements = cfg.budgets[b];
                p.trials = trials.size();
                if (cfg.normalization == Normalization::PerTrial) {
                    double sum = 0.0;
                    for (const auto& t : trials) sum += normalized_spectral_efficiency(t[mi][s][b].sp_x, t[mi][s][b].sp_es);
                    const double mean = sum / n;
                    double ss = 0.0;
                    for (const auto& t : trials) {
                        const double d = t[mi][s][b].sp_x / t[mi][s][b].sp_es - mean;
                        ss += d * d;
                    }
                    p.mean_norm_se = mean;
                    p.stderr_norm_se = trials.size() > 1 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
                } else {
                    double sx = 0.0;
                    double se = 0.0;
                    for (const auto& t : trials) {
                        sx += t[mi][s][b].sp_x;
                        se += t[mi][s][b].sp_es;
                    }
                    const double mx = sx / n;
                    const double me = se / n;
                    const double ratio = normalized_spectral_efficiency(mx, me);
                    // Delta-method standard error of a ratio of means.
                    double vxx = 0.0, vee = 0.0, vxe = 0.0;
                    for (const auto& t : trials) {
                        const double dx = t[mi][s][b].sp_x - mx;
                        const double de = t[mi][s][b].sp_es - me;
                        vxx += dx * dx;
                        vee += de * de;
                        vxe += dx * de;
                    }
                    p.mean_norm_se = ratio;
                    if (trials.size() > 1) {
                        vxx /= n - 1.0;
                        vee /= n - 1.0;
                        vxe /= n - 1.0;
                        const double var = (vxx - 2.0 * ratio * vxe + ratio * ratio * vee) / (me * me * n);
                        p.stderr_norm_se = std::sqrt(std::max(0.0, var));
                    }
                }
                points.push_back(std::move(p));
            }
    return points;
}

std::vector<CurvePoint> run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    SweepContext ctx{cfg, BeamCodebooks::build(cfg.channel, cfg.g_tx, cfg.g_rx),
                     *std::max_element(cfg.budgets.begin(), cfg.budgets.end()),
                     cfg.omp_sparsity ? cfg.omp_sparsity : cfg.channel.n_paths};

    std::vector<TrialCells> results(cfg.trials);
    std::vector<std::exception_ptr> errors(cfg.trials);
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    const auto worker = [&] {
        for (std::size_t t = next++; t < cfg.trials; t = next++) {
            try {
                results[t] = run_trial(ctx, t, log_mutex);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };

    std::size_t n_threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min(n_threads, cfg.trials);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    }

    for (std::size_t t = 0; t < cfg.trials; ++t) {
        if (!errors[t]) continue;
        try {
            std::rethrow_exception(errors[t]);
        } catch (const std::exception& e) {
            throw std::runtime_error("trial " + std::to_string(t) + ": " + e.what());
        }
    }
    return aggregate(cfg, results);
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_text(const std::string& text, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace

std::vector<CurvePoint> run_measurement_sweep(const ExperimentConfig& config) { return run_sweep(config); }

std::vector<CurvePoint> run_snr_sweep(const ExperimentConfig& config) { return run_sweep(config); }

std::string format_csv(std::vector<CurvePoint> points) {
    std::sort(points.begin(), points.end(), [](const CurvePoint& a, const CurvePoint& b) {
        if (a.method != b.method) return a.method < b.method;
        if (a.snr_db != b.snr_db) return a.snr_db < b.snr_db;
        return a.measurements < b.measurements;
    });
    std::string out = "method,snr_db,measurements,mean_norm_se,stderr,trials\n";
    for (const auto& p : points) {
        out += p.method;
        out += ',' + format_number(p.snr_db);
        out += ',' + std::to_string(p.measurements);
        out += ',' + format_number(p.mean_norm_se);
        out += ',' + format_number(p.stderr_norm_se);
        out += ',' + std::to_string(p.trials);
        out += '\n';
    }
    return out;
}

void write_csv(const std::vector<CurvePoint>& points, const std::string& path) { write_text(format_csv(points), path); }

SingleRunResult single_run(const ExperimentConfig& config, Method method) {
    ExperimentConfig cfg = config;
    cfg.methods = {method};
    cfg.validate();

    const std::size_t budget = *std::max_element(cfg.budgets.begin(), cfg.budgets.end());
    const ChannelParams params = cfg.channel.with_snr_db(cfg.snr_db.front());
    const std::uint64_t snr = snr_label(cfg.snr_db.front());
    const auto codebooks = BeamCodebooks::build(cfg.channel, cfg.g_tx, cfg.g_rx);
    const std::uint64_t label = method_label(method);

    SingleRunResult r;
    r.method = method;
    Rng channel_rng(Rng::derive(cfg.seed, {0, kChannelStream, 0}));
    r.channel = draw_channel(channel_rng, cfg.channel);

    Rng es_rng(Rng::derive(cfg.seed, {0, snr, kDenominatorStream, 0}));
    const auto es = exhaustive_search(r.channel, codebooks, params, es_rng);
    r.exhaustive_spectral_efficiency =
        spectral_efficiency(beamforming_gain(r.channel, es.pair, params.d_over_lambda), params);

    Rng rng(Rng::derive(cfg.seed, {0, snr, label, 0}));
    switch (method) {
        case Method::GpBo:
        case Method::GbrtBo:
        case Method::RfBo: {
            BoConfig bo = cfg.bo;
            bo.surrogate = surrogate_of(method);
            bo.n_iters = budget - bo.m_init;
            r.trace = run_bo(r.channel, params, codebooks, bo, rng);
            r.chosen = final_alignment(r.trace);
            break;
        }
        case Method::Omp: {
            Rng omp_rng(Rng::derive(cfg.seed, {0, snr, label, budget, 0}));
            auto res = omp_align(r.channel, codebooks, budget, cfg.omp_sparsity ? cfg.omp_sparsity : cfg.channel.n_paths,
                                 params, omp_rng, cfg.omp_probes);
            r.trace = std::move(res.trace);
            r.chosen = res.pair;
            break;
        }
        case Method::TsMab: {
            auto res = ts_mab_align(r.channel, codebooks, budget, params, rng, cfg.ts_mab);
            r.trace = std::move(res.trace);
            r.chosen = res.pair;
            break;
        }
        case Method::Exhaustive: {
            auto res = exhaustive_search(r.channel, codebooks, params, rng);
            r.trace = std::move(res.trace);
            r.chosen = res.pair;
            break;
        }
    }
    r.spectral_efficiency = spectral_efficiency(beamforming_gain(r.channel, r.chosen, params.d_over_lambda), params);
    return r;
}

std::string format_trace_csv(const RunTrace& trace) {
    std::string out = "iter,theta,phi,rss,best_rss\n";
    for (const auto& rec : trace.records()) {
        out += std::to_string(rec.iteration);
        out += ',' + format_number(rec.pair.theta);
        out += ',' + format_number(rec.pair.phi);
        out += ',' + format_number(rec.rss);
        out += ',' + format_number(rec.best_rss);
        out += '\n';
    }
    return out;
}

void write_trace_csv(const RunTrace& trace, const std::string& path) { write_text(format_trace_csv(trace), path); }

}  // namespace beamalign
