#include <doctest.h>

#include <cmath>
#include <numbers>

#include "beamalign/channel.hpp"
#include "beamalign/checks/oracles.hpp"

using namespace beamalign;

namespace {

ChannelRealization single_path(const ChannelParams& p, Complex alpha, double theta, double phi) {
    return ChannelRealization::from_paths(p, {{alpha, theta, phi}});
}

}  // namespace

TEST_CASE("steering vector examples") {
    const auto v = steering_vector(4, 0.0, 0.5);
    for (const auto& x : v) CHECK(std::abs(x - Complex(0.5, 0.0)) < 1e-15);

    const auto w = steering_vector(2, std::numbers::pi / 2, 0.5);
    CHECK(std::abs(w[0] - Complex(1 / std::sqrt(2.0), 0)) < 1e-15);
    CHECK(std::abs(w[1] - Complex(-1 / std::sqrt(2.0), 0)) < 1e-15);

    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto s = steering_vector(64, rng.uniform(-kHalfPi, kHalfPi), 0.5);
        CHECK(s.size() == 64);
        CHECK(std::abs(norm2<Complex>(s) - 1.0) < 1e-12);
    }
    CHECK_THROWS(steering_vector(0, 0.0, 0.5));
}

TEST_CASE("channel parameters") {
    ChannelParams p;
    CHECK_NOTHROW(p.validate());
    CHECK(p.with_snr_db(0.0).sigma_n_sq == doctest::Approx(1.0));
    CHECK(p.with_snr_db(10.0).sigma_n_sq == doctest::Approx(0.1));
    CHECK(p.with_snr_db(-15.0).snr_linear() == doctest::Approx(std::pow(10.0, -1.5)));
    p.n_paths = 0;
    CHECK_THROWS(p.validate());
    p = {};
    p.sigma_n_sq = -1;
    CHECK_THROWS(p.validate());
    p = {};
    p.d_over_lambda = 0;
    CHECK_THROWS(p.validate());
}

TEST_CASE("draw_channel shape, angles and reconstruction") {
    ChannelParams p;
    Rng rng(8);
    const auto ch = draw_channel(rng, p);
    CHECK(ch.h.rows() == 16);
    CHECK(ch.h.cols() == 64);
    REQUIRE(ch.paths.size() == 5);
    for (const auto& path : ch.paths) {
        CHECK(std::abs(path.theta) <= kHalfPi);
        CHECK(std::abs(path.phi) <= kHalfPi);
    }
    // Rebuild H term by term from the stored paths.
    const double c = std::sqrt(64.0 * 16.0 / 5.0);
    double worst = 0.0;
    for (std::size_t r = 0; r < 16; ++r)
        for (std::size_t t = 0; t < 64; ++t) {
            Complex acc{};
            for (const auto& path : ch.paths) {
                const Complex ar = std::polar(0.25, std::numbers::pi * static_cast<double>(r) * std::sin(path.phi));
                const Complex at = std::polar(0.125, std::numbers::pi * static_cast<double>(t) * std::sin(path.theta));
                acc += c * path.alpha * ar * std::conj(at);
            }
            worst = std::max(worst, std::abs(acc - ch.h(r, t)));
        }
    CHECK(worst < 1e-12);
}

TEST_CASE("single forced path is a scaled outer product") {
    ChannelParams p;
    p.n_paths = 1;
    const auto ch = single_path(p, Complex(1, 0), 0.0, 0.0);
    // sqrt(N_t N_r) * (1/sqrt(N_r)) * (1/sqrt(N_t)) = 1 in every entry
    for (std::size_t r = 0; r < 16; ++r)
        for (std::size_t t = 0; t < 64; ++t) CHECK(std::abs(ch.h(r, t) - Complex(1.0, 0)) < 1e-12);
}

TEST_CASE("mean squared Frobenius norm equals Nt Nr sigma_a^2") {
    ChannelParams p;
    Rng rng(17);
    double acc = 0.0;
    const int draws = 10'000;
    for (int i = 0; i < draws; ++i) {
        const auto ch = draw_channel(rng, p);
        double f = 0.0;
        for (const auto& x : ch.h.data()) f += std::norm(x);
        acc += f;
    }
    CHECK(acc / draws == doctest::Approx(64.0 * 16.0).epsilon(0.02));
}

TEST_CASE("codebook layout and orthogonality") {
    const auto cb = build_codebook(64, 64, 0.5);
    REQUIRE(cb.size() == 64);
    for (std::size_t i = 0; i < 64; ++i) {
        CHECK(cb.spatial_angles[i] == doctest::Approx(-1.0 + 2.0 * static_cast<double>(i) / 64.0));
        CHECK(cb.spatial_angles[i] >= -1.0);
        CHECK(cb.spatial_angles[i] < 1.0);
        if (i > 0) CHECK(cb.spatial_angles[i] > cb.spatial_angles[i - 1]);
        const auto col = cb.beam(i);
        const auto sv = steering_vector(64, std::asin(cb.spatial_angles[i]), 0.5);
        for (std::size_t k = 0; k < 64; ++k) CHECK(std::abs(col[k] - sv[k]) < 1e-15);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < 64; ++i)
        for (std::size_t j = 0; j < 64; ++j) {
            const double ip = std::abs(dot<Complex>(cb.beam(i), cb.beam(j)));
            if (i == j)
                CHECK(ip == doctest::Approx(1.0).epsilon(1e-12));
            else
                worst = std::max(worst, ip);
        }
    CHECK(worst < 1e-10);

    const auto one = build_codebook(8, 1, 0.5);
    CHECK(one.size() == 1);
    CHECK(one.spatial_angles[0] == -1.0);
    CHECK(one.angle(0) == doctest::Approx(-kHalfPi));

    const auto rx = build_codebook(16, 16, 0.5);
    CHECK(rx.columns.rows() == 16);
    CHECK(rx.columns.cols() == 16);
    CHECK_THROWS(build_codebook(4, 0, 0.5));
}

TEST_CASE("pair indexing is rx * G_t + tx") {
    const auto cbs = BeamCodebooks::build(ChannelParams{}, 64, 16);
    CHECK(cbs.pair_count() == 1024);
    const auto grid = cbs.cross_grid();
    REQUIRE(grid.size() == 1024);
    CHECK(grid[65] == cbs.pair(1, 1));
    CHECK(cbs.pair(130) == BeamPair{cbs.tx.angle(2), cbs.rx.angle(2)});
    for (const auto& z : grid) CHECK(z.in_domain());
}

TEST_CASE("noiseless measurements") {
    ChannelParams p;
    p.n_paths = 1;
    p.sigma_n_sq = 0.0;
    p.p_t = 2.0;
    const auto cbs = BeamCodebooks::build(p, 64, 16);
    const auto ch = single_path(p, Complex(1, 0), cbs.tx.angle(10), cbs.rx.angle(3));
    Rng rng(1);

    const double on = measure_rss(ch, cbs.pair(10, 3), p, rng);
    CHECK(on == doctest::Approx(2.0 * 64 * 16).epsilon(1e-12));
    CHECK(beamforming_gain(ch, cbs.pair(10, 3), 0.5) == doctest::Approx(64.0 * 16.0).epsilon(1e-12));
    CHECK(measure_rss(ch, cbs.pair(11, 3), p, rng) < 1e-18);
    CHECK(measure_rss(ch, cbs.pair(10, 4), p, rng) < 1e-18);

    // With sigma_n^2 = 0 the measurement is P_t times the noiseless gain.
    Rng rr(4);
    for (int i = 0; i < 20; ++i) {
        const BeamPair z{rr.uniform(-kHalfPi, kHalfPi), rr.uniform(-kHalfPi, kHalfPi)};
        CHECK(measure_rss(ch, z, p, rng) == doctest::Approx(p.p_t * beamforming_gain(ch, z, 0.5)).epsilon(1e-12));
    }

    const auto aligned = single_path(p, Complex(0.3, -0.4), 0.2, -0.7);
    CHECK(beamforming_gain(aligned, {0.2, -0.7}, 0.5) == doctest::Approx(64.0 * 16.0 * 0.25).epsilon(1e-12));
}

TEST_CASE("gain matches the path-sum oracle") {
    ChannelParams p;
    Rng rng(31);
    for (int i = 0; i < 10; ++i) {
        const auto ch = draw_channel(rng, p);
        const BeamPair z{rng.uniform(-kHalfPi, kHalfPi), rng.uniform(-kHalfPi, kHalfPi)};
        CHECK(beamforming_gain(ch, z, 0.5) ==
              doctest::Approx(checks::path_sum_gain(p, ch.paths, z)).epsilon(1e-9));
    }
}

TEST_CASE("zero channel") {
    ChannelParams p;
    ChannelRealization zero{ComplexMatrix(16, 64), {}};
    CHECK(beamforming_gain(zero, {0.1, 0.2}, 0.5) == 0.0);

    p.sigma_n_sq = 0.7;
    Rng rng(2);
    double acc = 0.0;
    const int n = 100'000;
    for (int i = 0; i < n; ++i) acc += measure_rss(zero, {0.3, -0.2}, p, rng);
    CHECK(acc / n == doctest::Approx(0.7).epsilon(0.02));
}

TEST_CASE("mean noisy RSS minus noise power approaches P_t times the gain") {
    ChannelParams p;
    p.sigma_n_sq = 0.5;
    Rng rng(44);
    const auto ch = draw_channel(rng, p);
    const BeamPair z{0.3, 0.1};
    double acc = 0.0;
    const int n = 200'000;
    for (int i = 0; i < n; ++i) acc += measure_rss(ch, z, p, rng);
    const double g = beamforming_gain(ch, z, 0.5);
    // |a + w|^2 with w ~ CN(0, s2) has variance s2^2 + 2 |a|^2 s2.
    const double s2 = p.sigma_n_sq;
    const double se = std::sqrt((s2 * s2 + 2.0 * g * s2) / n);
    CHECK(std::abs(acc / n - s2 - g) <= 4.0 * se);
}

TEST_CASE("probe counts calls") {
    ChannelParams p;
    Rng rng(1);
    const auto ch = draw_channel(rng, p);
    Rng noise(2);
    RssProbe probe(ch, p, noise);
    for (int i = 0; i < 7; ++i) probe.rss({0.0, 0.0});
    CHECK(probe.count() == 7);
}

TEST_CASE("spectral efficiency") {
    ChannelParams p;
    CHECK(spectral_efficiency(0.0, p) == 0.0);
    CHECK(spectral_efficiency(1.0, p) == doctest::Approx(1.0));
    CHECK(spectral_efficiency(3.0, p) == doctest::Approx(2.0));
    p.p_t = 2.0;
    p.sigma_n_sq = 2.0;
    CHECK(spectral_efficiency(3.0, p) == doctest::Approx(2.0));
    CHECK_THROWS(spectral_efficiency(-1.0, p));
}
