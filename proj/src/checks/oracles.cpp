#include "beamalign/checks/oracles.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beamalign::checks {

namespace {

template <class T>
std::vector<T> eliminate(Matrix<T> a, std::vector<T> b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw std::invalid_argument("gaussian_elimination_solve: shape mismatch");
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > std::abs(a(pivot, k))) pivot = i;
        if (std::abs(a(pivot, k)) == 0.0) throw std::runtime_error("gaussian_elimination_solve: singular matrix");
        if (pivot != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(pivot, j));
            std::swap(b[k], b[pivot]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const T f = a(i, k) / a(k, k);
            for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
            b[i] -= f * b[k];
        }
    }
    std::vector<T> x(n);
    for (std::size_t i = n; i-- > 0;) {
        T acc = b[i];
        for (std::size_t j = i + 1; j < n; ++j) acc -= a(i, j) * x[j];
        x[i] = acc / a(i, i);
    }
    return x;
}

}  // namespace

std::vector<double> gaussian_elimination_solve(RealMatrix a, std::vector<double> b) {
    return eliminate(std::move(a), std::move(b));
}

std::vector<Complex> gaussian_elimination_solve(ComplexMatrix a, std::vector<Complex> b) {
    return eliminate(std::move(a), std::move(b));
}

PosteriorPrediction conditioned_gaussian(const GpOracleInput& in, const BeamPair& z) {
    const std::size_t m = in.points.size();
    if (m == 0 || in.values.size() != m) throw std::invalid_argument("conditioned_gaussian: bad input");

    double offset = 0.0;
    double scale = 1.0;
    if (in.standardize) {
        for (const double y : in.values) offset += y;
        offset /= static_cast<double>(m);
        double var = 0.0;
        for (const double y : in.values) var += (y - offset) * (y - offset);
        var /= static_cast<double>(m);
        if (var > 0.0) scale = std::sqrt(var);
    }

    auto to_unit = [&](double a) { return in.unit_rescale ? (a + std::numbers::pi / 2.0) / std::numbers::pi : a; };
    auto k = [&](const BeamPair& a, const BeamPair& b) {
        const double dt = to_unit(a.theta) - to_unit(b.theta);
        const double dp = to_unit(a.phi) - to_unit(b.phi);
        return std::exp(-(dt * dt + dp * dp) / (2.0 * in.length_scale * in.length_scale));
    };

    // Joint covariance of (y_1..y_m, f(z)); the last row/column belongs to f(z).
    RealMatrix joint(m + 1, m + 1);
    std::vector<BeamPair> all = in.points;
    all.push_back(z);
    for (std::size_t i = 0; i <= m; ++i)
        for (std::size_t j = 0; j <= m; ++j) joint(i, j) = k(all[i], all[j]);
    for (std::size_t i = 0; i < m; ++i) joint(i, i) += in.jitter;

    RealMatrix obs(m, m);
    std::vector<double> cross(m);
    std::vector<double> y(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) obs(i, j) = joint(i, j);
        cross[i] = joint(i, m);
        y[i] = (in.values[i] - offset) / scale;
    }
    // mu = S_zo S_oo^-1 y,  var = S_zz - S_zo S_oo^-1 S_oz
    const auto a = gaussian_elimination_solve(obs, y);
    const auto c = gaussian_elimination_solve(obs, cross);
    double mu = 0.0;
    double explained = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        mu += cross[i] * a[i];
        explained += cross[i] * c[i];
    }
    const double var = std::max(0.0, joint(m, m) - explained);
    return {offset + scale * mu, scale * std::sqrt(var)};
}

double monte_carlo_expected_improvement(double mu, double sigma, double f_best, std::size_t samples, Rng& rng) {
    double acc = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double x = mu + sigma * rng.normal();
        if (x > f_best) acc += x - f_best;
    }
    return acc / static_cast<double>(samples);
}

double normal_cdf_by_quadrature(double x) {
    // Phi(x) = 1/2 + integral_0^x phi(t) dt
    const std::size_t n = 20000;  // even
    const double h = x / static_cast<double>(n);
    auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
    double acc = pdf(0.0) + pdf(x);
    for (std::size_t i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * pdf(h * static_cast<double>(i));
    return 0.5 + acc * h / 3.0;
}

double path_sum_gain(const ChannelParams& params, const std::vector<PathComponent>& paths, const BeamPair& pair) {
    const double kd = 2.0 * std::numbers::pi * params.d_over_lambda;
    // sum_k conj(e^{j kd k sin b}) e^{j kd k sin a} / n
    auto array_factor = [&](std::size_t n, double beam, double path) {
        Complex acc{};
        for (std::size_t i = 0; i < n; ++i) {
            const double phase = kd * static_cast<double>(i) * (std::sin(path) - std::sin(beam));
            acc += Complex(std::cos(phase), std::sin(phase));
        }
        return acc / static_cast<double>(n);
    };
    const double amp = std::sqrt(static_cast<double>(params.n_tx * params.n_rx) / static_cast<double>(paths.size()));
    Complex total{};
    for (const auto& p : paths) {
        const Complex rx = array_factor(params.n_rx, pair.phi, p.phi);
        const Complex tx = std::conj(array_factor(params.n_tx, pair.theta, p.theta));
        total += amp * p.alpha * rx * tx;
    }
    return std::norm(total);
}

std::size_t grid_argmax(const ChannelParams& params, const std::vector<PathComponent>& paths,
                        const BeamCodebooks& codebooks) {
    std::size_t best = 0;
    double best_gain = -1.0;
    for (std::size_t rx = 0; rx < codebooks.rx.size(); ++rx) {
        for (std::size_t tx = 0; tx < codebooks.tx.size(); ++tx) {
            const BeamPair z{std::asin(codebooks.tx.spatial_angles[tx]), std::asin(codebooks.rx.spatial_angles[rx])};
            const double g = path_sum_gain(params, paths, z);
            if (g > best_gain) {
                best_gain = g;
                best = rx * codebooks.tx.size() + tx;
            }
        }
    }
    return best;
}

double walk_tree(const RegressionTree& tree, const BeamPair& z) {
    const auto& nodes = tree.nodes();
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature != -1) {
        const auto& n = nodes[static_cast<std::size_t>(i)];
        const double x = n.feature == 0 ? z.theta : z.phi;
        i = x <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
}

double staged_boosted_value(const GbrtModel& model, const BeamPair& z) {
    const auto& s = model.scaling();
    double f = s.forward(model.initial_value());
    for (const auto& t : model.trees()) f += model.learning_rate() * walk_tree(t, z);
    return s.inverse(f);
}

PosteriorPrediction per_tree_moments(const GbrtModel& model, const BeamPair& z) {
    const auto& s = model.scaling();
    const double f0 = s.forward(model.initial_value());
    const std::size_t t = model.trees().size();
    const double stretch = static_cast<double>(t) * model.learning_rate();
    std::vector<double> est;
    for (const auto& tree : model.trees()) est.push_back(s.inverse(f0 + stretch * walk_tree(tree, z)));
    double mean = 0.0;
    for (const double e : est) mean += e;
    mean /= static_cast<double>(t);
    if (t < 2) return {mean, 0.0};
    double ss = 0.0;
    for (const double e : est) ss += (e - mean) * (e - mean);
    return {mean, std::sqrt(ss / static_cast<double>(t - 1))};
}

}  // namespace beamalign::checks
