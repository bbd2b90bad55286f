#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "beamalign/harness.hpp"

using namespace beamalign;

namespace {

// Small, fast sweep configuration.
ExperimentConfig tiny() {
    ExperimentConfig c;
    c.trials = 2;
    c.budgets = {16, 32};
    c.snr_db = {0.0};
    c.bo.n_candidates = 100;
    c.bo.settings.gbrt.n_trees = 10;
    c.bo.settings.rf.n_trees = 5;
    c.threads = 1;
    return c;
}

std::size_t count_lines(const std::string& s) {
    std::size_t n = 0;
    for (const char ch : s) n += ch == '\n' ? 1 : 0;
    return n;
}

}  // namespace

TEST_CASE("normalised spectral efficiency") {
    CHECK(normalized_spectral_efficiency(5.0, 5.0) == 1.0);
    CHECK(normalized_spectral_efficiency(0.0, 5.0) == 0.0);
    CHECK(normalized_spectral_efficiency(6.0, 5.0) == doctest::Approx(1.2));
    CHECK_THROWS_AS(normalized_spectral_efficiency(1.0, 0.0), DegenerateBaseline);
    CHECK_THROWS_AS(normalized_spectral_efficiency(1.0, -1.0), DegenerateBaseline);

    // An off-grid pair can beat the best codebook pair, so ratios above 1 are legal.
    ChannelParams p;
    p.n_paths = 1;
    const auto cbs = BeamCodebooks::build(p, 64, 16);
    const double theta = 0.5 * (cbs.tx.angle(40) + cbs.tx.angle(41));
    const double phi = 0.5 * (cbs.rx.angle(9) + cbs.rx.angle(10));
    const auto ch = ChannelRealization::from_paths(p, {{Complex(1, 0), theta, phi}});
    double grid = 0.0;
    for (const auto& z : cbs.cross_grid()) grid = std::max(grid, beamforming_gain(ch, z, 0.5));
    const double on_path = beamforming_gain(ch, {theta, phi}, 0.5);
    CHECK(normalized_spectral_efficiency(spectral_efficiency(on_path, p), spectral_efficiency(grid, p)) > 1.0);
}

TEST_CASE("method names round-trip") {
    for (const auto m : all_methods()) CHECK(parse_method(method_name(m)) == m);
    CHECK(parse_method("gbrt-bo") == Method::GbrtBo);
    CHECK_THROWS(parse_method("SVM"));
    CHECK(is_bayesian(Method::RfBo));
    CHECK_FALSE(is_bayesian(Method::Omp));
}

TEST_CASE("CSV layout and ordering") {
    CHECK(format_csv({}) == "method,snr_db,measurements,mean_norm_se,stderr,trials\n");
    const std::vector<CurvePoint> pts{{"TS-MAB", 0.0, 32, 0.5, 0.01, 10},
                                      {"GBRT-BO", 5.0, 16, 0.123456789012, 0.02, 10},
                                      {"GBRT-BO", -5.0, 32, 1.0, 0.0, 10},
                                      {"GBRT-BO", -5.0, 16, 0.25, 0.0, 10}};
    const auto csv = format_csv(pts);
    CHECK(csv ==
          "method,snr_db,measurements,mean_norm_se,stderr,trials\n"
          "GBRT-BO,-5,16,0.25,0,10\n"
          "GBRT-BO,-5,32,1,0,10\n"
          "GBRT-BO,5,16,0.123456789,0.02,10\n"
          "TS-MAB,0,32,0.5,0.01,10\n");
    CHECK(count_lines(format_csv({pts[0]})) == 2);
}

TEST_CASE("write_csv reports bad paths") {
    CHECK_THROWS_WITH_AS(write_csv({}, "/nonexistent-dir/x.csv"), doctest::Contains("/nonexistent-dir/x.csv"),
                         std::runtime_error);
}

TEST_CASE("trace CSV") {
    RunTrace t;
    t.record({0.5, -0.25}, 2.0);
    t.record({0.0, 0.0}, 1.0);
    CHECK(format_trace_csv(t) == "iter,theta,phi,rss,best_rss\n1,0.5,-0.25,2,2\n2,0,0,1,2\n");
}

TEST_CASE("sweep output shape and reproducibility") {
    auto c = tiny();
    c.budgets = {16, 32, 48, 64, 80, 96, 112, 128, 144, 160};
    c.trials = 1;
    c.methods = {Method::TsMab, Method::Omp, Method::Exhaustive};
    const auto a = run_measurement_sweep(c);
    CHECK(a.size() == 30);
    c.threads = 2;
    const auto b = run_measurement_sweep(c);
    CHECK(format_csv(a) == format_csv(b));
    for (const auto& p : a) {
        CHECK(p.trials == 1);
        CHECK(p.stderr_norm_se == 0.0);
        if (p.method == "EXHAUSTIVE") CHECK(p.mean_norm_se == doctest::Approx(1.0).epsilon(0.2));
    }

    auto s = tiny();
    s.snr_db = {-15, -10, -5, 0, 5};
    s.budgets = {160};
    s.methods = {Method::Omp};
    const auto snr = run_snr_sweep(s);
    CHECK(snr.size() == 5);
}

TEST_CASE("BO budgets are prefixes of one run") {
    auto c = tiny();
    c.methods = {Method::GbrtBo};
    c.budgets = {16, 24, 32};
    const auto all = run_measurement_sweep(c);
    c.budgets = {24};
    const auto one = run_measurement_sweep(c);
    // A 24-measurement sweep scores the same pair as the 24-prefix of a longer run.
    REQUIRE(all.size() == 3);
    REQUIRE(one.size() == 1);
    CHECK(all[1].measurements == 24);
    CHECK(all[1].mean_norm_se == one[0].mean_norm_se);
}

TEST_CASE("noise power follows the SNR definition") {
    ChannelParams p;
    CHECK(p.with_snr_db(0.0).sigma_n_sq == doctest::Approx(1.0));
    p.p_t = 4.0;
    CHECK(p.with_snr_db(3.0).sigma_n_sq == doctest::Approx(4.0 / std::pow(10.0, 0.3)));
}

TEST_CASE("config entries") {
    ExperimentConfig c;
    apply_config_entry(c, "budgets", "16:16:64");
    CHECK(c.budgets == std::vector<std::size_t>{16, 32, 48, 64});
    apply_config_entry(c, " snr_db ", "-15, -10,0");
    CHECK(c.snr_db == std::vector<double>{-15, -10, 0});
    apply_config_entry(c, "methods", "GP-BO,omp");
    CHECK(c.methods == std::vector<Method>{Method::GpBo, Method::Omp});
    apply_config_entry(c, "omp_probes", "random_phase");
    CHECK(c.omp_probes == OmpProbes::RandomPhase);
    apply_config_entry(c, "omp_probes", "codebook");
    CHECK(c.omp_probes == OmpProbes::CodebookPairs);
    CHECK_THROWS_AS(apply_config_entry(c, "omp_probes", "gaussian"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(c, "no_such_key", "1"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(c, "trials", "-3"), ConfigError);
    CHECK_THROWS_AS(apply_config_entry(c, "budgets", "1:0:5"), ConfigError);
    apply_config_entry(c, "gp_literal", "true");
    CHECK(c.bo.settings.gp.kernel.length_scale == 1.0);
    CHECK_FALSE(c.bo.settings.gp.kernel.unit_rescale);

    ExperimentConfig v;
    CHECK_NOTHROW(v.validate());
    v.methods.clear();
    CHECK_THROWS_AS(v.validate(), ConfigError);
    v = {};
    v.budgets = {8};
    CHECK_THROWS_AS(v.validate(), ConfigError);  // below m_init for the BO methods
    v = {};
    v.snr_db.clear();
    CHECK_THROWS_AS(v.validate(), ConfigError);
}

TEST_CASE("config files") {
    const std::string path = "harness_test_config.txt";
    {
        std::ofstream f(path);
        f << "# comment\n\ntrials = 7\nseed = 99  # trailing\nmethods = TS-MAB\n";
    }
    const auto c = load_config_file(path);
    CHECK(c.trials == 7);
    CHECK(c.seed == 99);
    CHECK(c.methods == std::vector<Method>{Method::TsMab});
    {
        std::ofstream f(path);
        f << "trials 7\n";
    }
    CHECK_THROWS_AS(load_config_file(path), ConfigError);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_config_file("does-not-exist.cfg"), ConfigError);
}

TEST_CASE("single run") {
    auto c = tiny();
    const auto r = single_run(c, Method::TsMab);
    CHECK(r.trace.size() == 32);
    CHECK(r.exhaustive_spectral_efficiency > 0.0);
    CHECK(r.spectral_efficiency >= 0.0);
}
