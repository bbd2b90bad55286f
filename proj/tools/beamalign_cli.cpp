// Command-line front end: measurement and SNR sweeps, single-episode traces and
// the built-in oracle self test.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "beamalign/checks/criteria.hpp"
#include "beamalign/harness.hpp"

using namespace beamalign;

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> threads;
    std::string methods;
    std::string out;
    std::string snr_db;
    std::string budgets;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "Flat key = value config file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--trials", o.trials, "Monte-Carlo trials");
    cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    cmd->add_option("--methods", o.methods, "Comma list: GP-BO,GBRT-BO,RF-BO,OMP,TS-MAB,EXHAUSTIVE");
    cmd->add_option("--out", o.out, "Output CSV path (stdout when omitted)");
    cmd->add_option("--snr-db", o.snr_db, "Comma list of SNR points in dB");
    cmd->add_option("--budgets", o.budgets, "Comma list of measurement budgets, or lo:step:hi");
    cmd->add_option("--set", o.overrides, "Extra config entry key=value (repeatable)");
}

ExperimentConfig resolve(const CommonOptions& o, ExperimentConfig defaults) {
    ExperimentConfig cfg = o.config_path.empty() ? defaults : load_config_file(o.config_path, defaults);
    for (const auto& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (o.seed) cfg.seed = *o.seed;
    if (o.trials) cfg.trials = *o.trials;
    if (o.threads) cfg.threads = *o.threads;
    if (!o.methods.empty()) cfg.methods = parse_method_list(o.methods);
    if (!o.out.empty()) cfg.out_path = o.out;
    if (!o.snr_db.empty()) cfg.snr_db = parse_real_list(o.snr_db);
    if (!o.budgets.empty()) cfg.budgets = parse_count_list(o.budgets);
    return cfg;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
    } else {
        std::FILE* f = std::fopen(path.c_str(), "wb");
        if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
        std::fwrite(text.data(), 1, text.size(), f);
        if (std::fclose(f) != 0) throw std::runtime_error("write failed for '" + path + "'");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Beam alignment by Bayesian optimisation: experiments and self test"};
    app.require_subcommand(1);

    CommonOptions meas_opts;
    auto* meas = app.add_subcommand("sweep-measurements", "Normalised SE versus measurement budget");
    add_common(meas, meas_opts);

    CommonOptions snr_opts;
    auto* snr = app.add_subcommand("sweep-snr", "Normalised SE versus SNR at a fixed budget");
    add_common(snr, snr_opts);

    CommonOptions single_opts;
    std::string single_method = "GBRT-BO";
    auto* single = app.add_subcommand("single-run", "One method on one channel; dumps the per-measurement trace");
    add_common(single, single_opts);
    single->add_option("--method", single_method, "Method to run");

    bool quick = false;
    std::vector<int> criteria;
    auto* selftest = app.add_subcommand("selftest", "Run the oracle and acceptance checks");
    selftest->add_flag("--quick", quick, "Reduced trial counts");
    selftest->add_option("--criterion", criteria, "Only these criterion ids (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*meas) {
            const auto cfg = resolve(meas_opts, ExperimentConfig{});
            emit(format_csv(run_measurement_sweep(cfg)), cfg.out_path);
        } else if (*snr) {
            ExperimentConfig defaults;
            defaults.snr_db = {-15.0, -10.0, -5.0, 0.0, 5.0};
            defaults.budgets = {160};
            const auto cfg = resolve(snr_opts, defaults);
            emit(format_csv(run_snr_sweep(cfg)), cfg.out_path);
        } else if (*single) {
            const auto cfg = resolve(single_opts, ExperimentConfig{});
            const auto result = single_run(cfg, parse_method(single_method));
            emit(format_trace_csv(result.trace), cfg.out_path);
            std::fprintf(stderr, "%s: chose theta=%.6f phi=%.6f, SE %.4f vs exhaustive %.4f (normalised %.4f)\n",
                         std::string(method_name(result.method)).c_str(), result.chosen.theta, result.chosen.phi,
                         result.spectral_efficiency, result.exhaustive_spectral_efficiency,
                         result.spectral_efficiency / result.exhaustive_spectral_efficiency);
        } else if (*selftest) {
            const auto scale = quick ? checks::CheckScale::quick() : checks::CheckScale::full();
            const auto results = checks::run_criteria(criteria, scale, std::cout);
            for (const auto& r : results)
                if (!r.passed) return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
