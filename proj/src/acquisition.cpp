#include "beamalign/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace beamalign {

AcquisitionState AcquisitionState::from(const Dataset& data, SearchDomain domain) {
    return {data.best_value(), domain};
}

double expected_improvement(double mu, double sigma, double f_best) {
    if (sigma < 0.0) throw std::invalid_argument("expected_improvement: negative sigma");
    if (sigma == 0.0) return 0.0;
    const double delta = mu - f_best;
    const double z = delta / sigma;
    return std::max(0.0, delta * std_normal_cdf(z) + sigma * std_normal_pdf(z));
}

std::vector<BeamPair> draw_candidates(Rng& rng, std::size_t n_random, const SearchDomain& domain,
                                      std::span<const BeamPair> fixed) {
    std::vector<BeamPair> out;
    out.reserve(n_random + fixed.size());
    for (std::size_t i = 0; i < n_random; ++i) {
        const double theta = rng.uniform(domain.lo, domain.hi);
        const double phi = rng.uniform(domain.lo, domain.hi);
        out.push_back({theta, phi});
    }
    out.insert(out.end(), fixed.begin(), fixed.end());
    return out;
}

AcquisitionChoice argmax_expected_improvement(const Surrogate& surrogate, double f_best,
                                              std::span<const BeamPair> candidates) {
    if (candidates.empty()) throw std::invalid_argument("argmax_expected_improvement: no candidates");
    const auto sigma_max = surrogate.sigma_upper_bound();
    AcquisitionChoice best{candidates[0], -1.0, 0};
    if (!sigma_max) {
        const auto predictions = surrogate.predict_batch(candidates);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const double ei = expected_improvement(predictions[i].mu, predictions[i].sigma, f_best);
            if (ei > best.value) best = {candidates[i], ei, i};
        }
        return best;
    }

    // EI grows with sigma, so EI(mu, sigma_max) bounds each candidate. Visit
    // candidates by decreasing bound and stop once no bound can beat the leader.
    const auto means = surrogate.predict_mean_batch(candidates);
    std::vector<double> bound(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i)
        bound[i] = expected_improvement(means[i], *sigma_max, f_best) * (1.0 + 1e-9) + 1e-300;
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return bound[a] > bound[b]; });

    constexpr std::size_t kChunk = 64;
    std::vector<BeamPair> chunk;
    for (std::size_t start = 0; start < order.size(); start += kChunk) {
        if (bound[order[start]] < best.value) break;
        const std::size_t end = std::min(order.size(), start + kChunk);
        chunk.clear();
        for (std::size_t k = start; k < end; ++k) chunk.push_back(candidates[order[k]]);
        const auto predictions = surrogate.predict_batch(chunk);
        for (std::size_t k = start; k < end; ++k) {
            const std::size_t i = order[k];
            const auto& p = predictions[k - start];
            const double ei = expected_improvement(p.mu, p.sigma, f_best);
            if (ei > best.value || (ei == best.value && i < best.index)) best = {candidates[i], ei, i};
        }
    }
    return best;
}

AcquisitionChoice maximize_acquisition(const Surrogate& surrogate, const AcquisitionState& state, Rng& rng,
                                       std::size_t n_candidates, std::span<const BeamPair> fixed) {
    if (n_candidates < 1) throw std::invalid_argument("maximize_acquisition: need at least one candidate");
    const auto candidates = draw_candidates(rng, n_candidates, state.domain, fixed);
    return argmax_expected_improvement(surrogate, state.f_best, candidates);
}

}  // namespace beamalign
