#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include "beamalign/harness.hpp"

namespace beamalign {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto pos = text.find(sep, start);
        const auto piece = trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (!piece.empty()) out.push_back(piece);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_real(std::string_view s) {
    s = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ConfigError("expected a number, got '" + std::string(s) + "'");
    return v;
}

std::uint64_t parse_u64(std::string_view s) {
    s = trim(s);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw ConfigError("expected a non-negative integer, got '" + std::string(s) + "'");
    return v;
}

std::size_t parse_count(std::string_view s) { return static_cast<std::size_t>(parse_u64(s)); }

bool parse_bool(std::string_view s) {
    s = trim(s);
    if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
    if (s == "0" || s == "false" || s == "no" || s == "off") return false;
    throw ConfigError("expected a boolean, got '" + std::string(s) + "'");
}

using Setter = std::function<void(ExperimentConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"n_tx", [](auto& c, auto v) { c.channel.n_tx = parse_count(v); }},
        {"n_rx", [](auto& c, auto v) { c.channel.n_rx = parse_count(v); }},
        {"n_paths", [](auto& c, auto v) { c.channel.n_paths = parse_count(v); }},
        {"d_over_lambda", [](auto& c, auto v) { c.channel.d_over_lambda = parse_real(v); }},
        {"sigma_a_sq", [](auto& c, auto v) { c.channel.sigma_a_sq = parse_real(v); }},
        {"p_t", [](auto& c, auto v) { c.channel.p_t = parse_real(v); }},
        {"g_tx", [](auto& c, auto v) { c.g_tx = parse_count(v); }},
        {"g_rx", [](auto& c, auto v) { c.g_rx = parse_count(v); }},
        {"snr_db", [](auto& c, auto v) { c.snr_db = parse_real_list(v); }},
        {"methods", [](auto& c, auto v) { c.methods = parse_method_list(v); }},
        {"budgets", [](auto& c, auto v) { c.budgets = parse_count_list(v); }},
        {"trials", [](auto& c, auto v) { c.trials = parse_count(v); }},
        {"seed", [](auto& c, auto v) { c.seed = parse_u64(v); }},
        {"out", [](auto& c, auto v) { c.out_path = std::string(trim(v)); }},
        {"threads", [](auto& c, auto v) { c.threads = parse_count(v); }},
        {"m_init", [](auto& c, auto v) { c.bo.m_init = parse_count(v); }},
        {"n_candidates", [](auto& c, auto v) { c.bo.n_candidates = parse_count(v); }},
        {"grid_candidates", [](auto& c, auto v) { c.bo.grid_candidates = parse_bool(v); }},
        {"grid_only", [](auto& c, auto v) { c.bo.grid_only = parse_bool(v); }},
        {"surrogate_argmax", [](auto& c, auto v) { c.surrogate_argmax = parse_bool(v); }},
        {"gp_length_scale", [](auto& c, auto v) { c.bo.settings.gp.kernel.length_scale = parse_real(v); }},
        {"gp_unit_rescale", [](auto& c, auto v) { c.bo.settings.gp.kernel.unit_rescale = parse_bool(v); }},
        {"gp_literal",
         [](auto& c, auto v) {
             if (parse_bool(v)) c.bo.settings.gp.kernel = {1.0, false};
         }},
        {"gp_jitter", [](auto& c, auto v) { c.bo.settings.gp.jitter = parse_real(v); }},
        {"gbrt_trees", [](auto& c, auto v) { c.bo.settings.gbrt.n_trees = parse_count(v); }},
        {"gbrt_learning_rate", [](auto& c, auto v) { c.bo.settings.gbrt.learning_rate = parse_real(v); }},
        {"gbrt_max_depth", [](auto& c, auto v) { c.bo.settings.gbrt.tree.max_depth = parse_count(v); }},
        {"gbrt_min_leaf", [](auto& c, auto v) { c.bo.settings.gbrt.tree.min_leaf = parse_count(v); }},
        {"rf_trees", [](auto& c, auto v) { c.bo.settings.rf.n_trees = parse_count(v); }},
        {"rf_max_depth", [](auto& c, auto v) { c.bo.settings.rf.tree.max_depth = parse_count(v); }},
        {"rf_min_leaf", [](auto& c, auto v) { c.bo.settings.rf.tree.min_leaf = parse_count(v); }},
        {"omp_sparsity", [](auto& c, auto v) { c.omp_sparsity = parse_count(v); }},
        {"omp_probes",
         [](auto& c, auto v) {
             v = trim(v);
             if (v == "codebook")
                 c.omp_probes = OmpProbes::CodebookPairs;
             else if (v == "random_phase")
                 c.omp_probes = OmpProbes::RandomPhase;
             else
                 throw ConfigError("omp_probes must be codebook or random_phase");
         }},
        {"ts_prior_mean", [](auto& c, auto v) { c.ts_mab.prior_mean = parse_real(v); }},
        {"ts_prior_variance", [](auto& c, auto v) { c.ts_mab.prior_variance = parse_real(v); }},
        {"ts_noise_variance", [](auto& c, auto v) { c.ts_mab.noise_variance = parse_real(v); }},
        {"normalization",
         [](auto& c, auto v) {
             v = trim(v);
             if (v == "per_trial")
                 c.normalization = Normalization::PerTrial;
             else if (v == "ratio_of_averages")
                 c.normalization = Normalization::RatioOfAverages;
             else
                 throw ConfigError("normalization must be per_trial or ratio_of_averages");
         }},
    };
    return table;
}

}  // namespace

std::vector<double> parse_real_list(std::string_view text) {
    std::vector<double> out;
    for (const auto piece : split(text, ',')) out.push_back(parse_real(piece));
    return out;
}

std::vector<std::size_t> parse_count_list(std::string_view text) {
    std::vector<std::size_t> out;
    for (const auto piece : split(text, ',')) {
        // lo:step:hi ranges, e.g. 16:16:160
        const auto parts = split(piece, ':');
        if (parts.size() == 3) {
            const auto lo = parse_count(parts[0]);
            const auto step = parse_count(parts[1]);
            const auto hi = parse_count(parts[2]);
            if (step == 0) throw ConfigError("range step must be > 0");
            for (auto v = lo; v <= hi; v += step) out.push_back(v);
        } else {
            out.push_back(parse_count(piece));
        }
    }
    return out;
}

std::vector<Method> parse_method_list(std::string_view text) {
    std::vector<Method> out;
    for (const auto piece : split(text, ',')) out.push_back(parse_method(piece));
    return out;
}

void apply_config_entry(ExperimentConfig& config, std::string_view key, std::string_view value) {
    const auto& table = setters();
    const auto it = table.find(trim(key));
    if (it == table.end()) throw ConfigError("unknown config key '" + std::string(trim(key)) + "'");
    it->second(config, value);
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        try {
            apply_config_entry(base, view.substr(0, eq), view.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return base;
}

}  // namespace beamalign
