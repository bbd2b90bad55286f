#include <doctest.h>

#include <cmath>
#include <numbers>

#include "beamalign/checks/oracles.hpp"

using namespace beamalign;

// The reference implementations are only useful if they are right on cases
// worked out by hand.

TEST_CASE("elimination solves small systems") {
    RealMatrix a(2, 2);
    a(0, 0) = 0.0;  // forces a row swap
    a(0, 1) = 2.0;
    a(1, 0) = 3.0;
    a(1, 1) = 1.0;
    const auto x = checks::gaussian_elimination_solve(a, {4.0, 5.0});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(2.0));

    ComplexMatrix c(1, 1);
    c(0, 0) = Complex(0, 2);
    const auto y = checks::gaussian_elimination_solve(c, {Complex(2, 0)});
    CHECK(std::abs(y[0] - Complex(0, -1)) < 1e-15);
}

TEST_CASE("conditioning a single observation") {
    // One point, no standardisation: mu = k y / (1 + jitter), var = 1 - k^2 / (1 + jitter).
    checks::GpOracleInput in;
    in.points = {{0.0, 0.0}};
    in.values = {2.0};
    in.length_scale = 1.0;
    in.unit_rescale = false;
    in.standardize = false;
    in.jitter = 0.5;
    const double k = std::exp(-0.5);
    const auto p = checks::conditioned_gaussian(in, {1.0, 0.0});
    CHECK(p.mu == doctest::Approx(k * 2.0 / 1.5));
    CHECK(p.sigma == doctest::Approx(std::sqrt(1.0 - k * k / 1.5)));
}

TEST_CASE("Monte Carlo EI on a degenerate case") {
    Rng rng(1);
    // sigma = 0: improvement is deterministic.
    CHECK(checks::monte_carlo_expected_improvement(3.0, 0.0, 1.0, 100, rng) == 2.0);
    CHECK(checks::monte_carlo_expected_improvement(0.0, 0.0, 1.0, 100, rng) == 0.0);
    // mu = f, sigma = 1: E[max(0, Z)] = 1 / sqrt(2 pi).
    const double v = checks::monte_carlo_expected_improvement(0.0, 1.0, 0.0, 400'000, rng);
    CHECK(v == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(0.01));
}

TEST_CASE("quadrature CDF") {
    CHECK(checks::normal_cdf_by_quadrature(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(checks::normal_cdf_by_quadrature(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-10));
    CHECK(checks::normal_cdf_by_quadrature(-1.0) == doctest::Approx(0.158655253931457).epsilon(1e-10));
}

TEST_CASE("path-sum gain of a single aligned path") {
    ChannelParams p;
    p.n_paths = 1;
    const std::vector<PathComponent> paths{{Complex(0.0, 1.0), 0.4, -0.3}};
    CHECK(checks::path_sum_gain(p, paths, {0.4, -0.3}) == doctest::Approx(64.0 * 16.0).epsilon(1e-12));

    const auto cbs = BeamCodebooks::build(p, 64, 16);
    const std::vector<PathComponent> on_grid{{Complex(1.0, 0.0), cbs.tx.angle(3), cbs.rx.angle(12)}};
    CHECK(checks::grid_argmax(p, on_grid, cbs) == 12 * 64 + 3);
}

TEST_CASE("tree walk and boosting oracles agree with hand-built expectations") {
    Dataset d;
    for (int i = 0; i < 6; ++i) d.add({-1.0 + 0.01 * i, 0.0}, 0.0);
    for (int i = 0; i < 6; ++i) d.add({1.0 + 0.01 * i, 0.0}, 4.0);
    Rng rng(2);
    const auto tree = fit_regression_tree(d, TreeConfig{}, rng);
    CHECK(checks::walk_tree(tree, {-1.0, 0.0}) == 0.0);
    CHECK(checks::walk_tree(tree, {1.0, 0.0}) == 4.0);

    GbrtConfig cfg;
    cfg.n_trees = 1;
    cfg.learning_rate = 0.5;
    cfg.standardize = false;
    const auto model = gbrt_fit(d, cfg, rng);
    // F_0 = 2, the tree fits residuals -2 / +2, half a step lands on 1 / 3.
    CHECK(checks::staged_boosted_value(model, {-1.0, 0.0}) == doctest::Approx(1.0));
    CHECK(checks::staged_boosted_value(model, {1.0, 0.0}) == doctest::Approx(3.0));
    const auto m = checks::per_tree_moments(model, {1.0, 0.0});
    CHECK(m.mu == doctest::Approx(3.0));
    CHECK(m.sigma == 0.0);
}
