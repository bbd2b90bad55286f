#include "beamalign/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace beamalign {

ExhaustiveResult exhaustive_search(const ChannelRealization& channel, const BeamCodebooks& codebooks,
                                   const ChannelParams& params, Rng& rng) {
    RssProbe probe(channel, params, rng);
    ExhaustiveResult result;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < codebooks.pair_count(); ++i) {
        const BeamPair z = codebooks.pair(i);
        const double y = probe.rss(z);
        result.trace.record(z, y);
        if (y > best) {
            best = y;
            result.pair = z;
            result.flat_index = i;
        }
    }
    result.measurements = probe.count();
    return result;
}

namespace {

ComplexVector random_phase_beam(Rng& rng, std::size_t n) {
    ComplexVector b(n);
    const double amp = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& x : b) x = std::polar(amp, rng.uniform(0.0, 2.0 * std::numbers::pi));
    return b;
}

}  // namespace

SensingSystem build_sensing_system(const ChannelRealization& channel, const BeamCodebooks& codebooks,
                                   std::size_t budget, const ChannelParams& params, Rng& rng, OmpProbes probes) {
    if (probes == OmpProbes::CodebookPairs && budget > codebooks.pair_count())
        throw std::invalid_argument("build_sensing_system: budget exceeds grid size");
    SensingSystem sys;
    sys.g_rx = codebooks.rx.size();
    sys.g_tx = codebooks.tx.size();
    sys.matrix = ComplexMatrix(budget, sys.g_rx * sys.g_tx);
    sys.observations.resize(budget);
    if (probes == OmpProbes::CodebookPairs) sys.probes = rng.sample_without_replacement(codebooks.pair_count(), budget);

    RssProbe probe(channel, params, rng);
    const double amp = std::sqrt(params.p_t);
    ComplexVector rx_proj(sys.g_rx);
    ComplexVector tx_proj(sys.g_tx);
    for (std::size_t i = 0; i < budget; ++i) {
        ComplexVector u;
        ComplexVector v;
        if (probes == OmpProbes::CodebookPairs) {
            const std::size_t flat = sys.probes[i];
            u = codebooks.rx.beam(flat / sys.g_tx);
            v = codebooks.tx.beam(flat % sys.g_tx);
            sys.observations[i] = probe.complex_sample(codebooks.pair(flat));
        } else {
            u = random_phase_beam(rng, channel.h.rows());
            v = random_phase_beam(rng, channel.h.cols());
            const auto hv = multiply(channel.h, v);
            const auto w = sample_complex_gaussian(rng, u.size(), params.sigma_n_sq);
            sys.observations[i] = amp * dot<Complex>(u, hv) + dot<Complex>(u, w);
        }
        for (std::size_t r = 0; r < sys.g_rx; ++r) rx_proj[r] = dot<Complex>(u, codebooks.rx.beam(r));
        for (std::size_t t = 0; t < sys.g_tx; ++t) tx_proj[t] = dot<Complex>(codebooks.tx.beam(t), v);
        auto row = sys.matrix.row(i);
        for (std::size_t r = 0; r < sys.g_rx; ++r)
            for (std::size_t t = 0; t < sys.g_tx; ++t) row[r * sys.g_tx + t] = amp * rx_proj[r] * tx_proj[t];
    }
    return sys;
}

namespace {

ComplexVector least_squares_on_support(const ComplexMatrix& m, std::span<const Complex> y,
                                       const std::vector<std::size_t>& support) {
    const std::size_t k = support.size();
    ComplexMatrix gram(k, k);
    ComplexVector rhs(k);
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
            Complex acc{};
            for (std::size_t i = 0; i < m.rows(); ++i) acc += std::conj(m(i, support[a])) * m(i, support[b]);
            gram(a, b) = acc;
            gram(b, a) = std::conj(acc);
        }
        gram(a, a) = Complex(gram(a, a).real(), 0.0);
        Complex acc{};
        for (std::size_t i = 0; i < m.rows(); ++i) acc += std::conj(m(i, support[a])) * y[i];
        rhs[a] = acc;
    }
    try {
        return hermitian_solve(gram, rhs);
    } catch (const NotPositiveDefinite&) {
        // Collinear dictionary columns: regularise lightly and retry once.
        double tr = 0.0;
        for (std::size_t a = 0; a < k; ++a) tr += gram(a, a).real();
        for (std::size_t a = 0; a < k; ++a) gram(a, a) += 1e-12 * std::max(tr, 1.0);
        return hermitian_solve(gram, rhs);
    }
}

}  // namespace

OmpSolution orthogonal_matching_pursuit(const ComplexMatrix& matrix, std::span<const Complex> y,
                                        std::size_t sparsity) {
    if (y.size() != matrix.rows()) throw std::invalid_argument("omp: observation size mismatch");
    const std::size_t n = matrix.cols();

    std::vector<double> col_norm(n, 0.0);
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        const auto row = matrix.row(i);
        for (std::size_t j = 0; j < n; ++j) col_norm[j] += std::norm(row[j]);
    }
    for (auto& c : col_norm) c = std::sqrt(c);

    OmpSolution sol;
    ComplexVector residual(y.begin(), y.end());
    sol.residual_norms.push_back(norm2<Complex>(residual));
    std::vector<bool> chosen(n, false);
    ComplexVector corr(n);

    for (std::size_t step = 0; step < sparsity; ++step) {
        std::fill(corr.begin(), corr.end(), Complex{});
        for (std::size_t i = 0; i < matrix.rows(); ++i) {
            const auto row = matrix.row(i);
            const Complex ri = residual[i];
            for (std::size_t j = 0; j < n; ++j) corr[j] += std::conj(row[j]) * ri;
        }
        std::size_t pick = n;
        double best = -1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (chosen[j] || col_norm[j] <= 1e-12) continue;
            const double score = std::abs(corr[j]) / col_norm[j];
            if (score > best) {
                best = score;
                pick = j;
            }
        }
        if (pick == n) break;
        chosen[pick] = true;
        sol.support.push_back(pick);
        sol.coefficients = least_squares_on_support(matrix, y, sol.support);

        residual.assign(y.begin(), y.end());
        for (std::size_t i = 0; i < matrix.rows(); ++i)
            for (std::size_t a = 0; a < sol.support.size(); ++a)
                residual[i] -= matrix(i, sol.support[a]) * sol.coefficients[a];
        sol.residual_norms.push_back(norm2<Complex>(residual));
    }
    return sol;
}

OmpResult omp_align(const ChannelRealization& channel, const BeamCodebooks& codebooks, std::size_t budget,
                    std::size_t sparsity, const ChannelParams& params, Rng& rng, OmpProbes probes) {
    if (sparsity < 1) throw std::invalid_argument("omp_align: sparsity must be >= 1");
    if (budget < sparsity)
        throw BudgetTooSmall("omp_align: budget " + std::to_string(budget) + " < sparsity " + std::to_string(sparsity));

    OmpResult result;
    result.system = build_sensing_system(channel, codebooks, budget, params, rng, probes);
    // Random-phase probes have no beam angles; their records carry NaN pairs.
    constexpr double kNoAngle = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < budget; ++i) {
        const BeamPair z = probes == OmpProbes::CodebookPairs ? codebooks.pair(result.system.probes[i])
                                                              : BeamPair{kNoAngle, kNoAngle};
        result.trace.record(z, std::norm(result.system.observations[i]));
    }

    result.solution = orthogonal_matching_pursuit(result.system.matrix, result.system.observations, sparsity);
    if (result.solution.support.empty()) {
        if (probes != OmpProbes::CodebookPairs) {
            result.flat_index = 0;
            result.pair = codebooks.pair(0);
            return result;
        }
        // Nothing correlates (all-zero sensing matrix); fall back to the strongest probe.
        result.pair = final_alignment(result.trace);
        std::size_t best = 0;
        for (std::size_t i = 1; i < budget; ++i)
            if (result.trace[i].rss > result.trace[best].rss) best = i;
        result.flat_index = result.system.probes[best];
        return result;
    }
    std::size_t best = 0;
    for (std::size_t a = 1; a < result.solution.support.size(); ++a)
        if (std::abs(result.solution.coefficients[a]) > std::abs(result.solution.coefficients[best])) best = a;
    result.flat_index = result.solution.support[best];
    result.pair = codebooks.pair(result.flat_index);
    return result;
}

GaussianThompsonSampler::GaussianThompsonSampler(std::size_t n_arms, double prior_mean, double prior_variance,
                                                 double noise_variance)
    : arms_(n_arms, ArmStats{prior_mean, prior_variance, 0}),
      reward_sums_(n_arms, 0.0),
      prior_mean_(prior_mean),
      prior_variance_(prior_variance),
      noise_variance_(noise_variance) {
    if (n_arms == 0) throw std::invalid_argument("GaussianThompsonSampler: no arms");
    if (!(prior_variance > 0.0) || !(noise_variance > 0.0))
        throw std::invalid_argument("GaussianThompsonSampler: variances must be > 0");
}

std::size_t GaussianThompsonSampler::select(Rng& rng) const {
    std::size_t best = 0;
    double best_draw = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < arms_.size(); ++a) {
        const double draw = rng.normal(arms_[a].mean, std::sqrt(arms_[a].variance));
        if (draw > best_draw) {
            best_draw = draw;
            best = a;
        }
    }
    return best;
}

void GaussianThompsonSampler::update(std::size_t arm, double reward) {
    auto& s = arms_.at(arm);
    ++s.pulls;
    reward_sums_[arm] += reward;
    const double precision = 1.0 / prior_variance_ + static_cast<double>(s.pulls) / noise_variance_;
    s.variance = 1.0 / precision;
    s.mean = s.variance * (prior_mean_ / prior_variance_ + reward_sums_[arm] / noise_variance_);
}

std::size_t GaussianThompsonSampler::recommend() const {
    std::size_t best = 0;
    for (std::size_t a = 1; a < arms_.size(); ++a)
        if (arms_[a].mean > arms_[best].mean) best = a;
    return best;
}

TsMabResult ts_mab_align(const ChannelRealization& channel, const BeamCodebooks& codebooks, std::size_t budget,
                         const ChannelParams& params, Rng& rng, const TsMabConfig& config) {
    if (budget < 1) throw std::invalid_argument("ts_mab_align: budget must be >= 1");
    const double reward_scale = params.p_t * params.sigma_a_sq * static_cast<double>(params.n_tx * params.n_rx);
    const double prior_var = config.prior_variance > 0.0 ? config.prior_variance : reward_scale * reward_scale;
    const double noise_var = config.noise_variance > 0.0 ? config.noise_variance : params.sigma_n_sq + params.p_t;

    GaussianThompsonSampler sampler(codebooks.pair_count(), config.prior_mean, prior_var, noise_var);
    RssProbe probe(channel, params, rng);
    TsMabResult result;
    for (std::size_t round = 0; round < budget; ++round) {
        const std::size_t arm = sampler.select(rng);
        const BeamPair z = codebooks.pair(arm);
        const double y = probe.rss(z);
        sampler.update(arm, y);
        result.trace.record(z, y);
    }
    result.arm = sampler.recommend();
    result.pair = codebooks.pair(result.arm);
    result.arms = sampler.arms();
    return result;
}

}  // namespace beamalign
