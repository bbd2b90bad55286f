#pragma once

#include <span>
#include <vector>

#include "beamalign/surrogates.hpp"

namespace beamalign {

/// Rectangle [lo, hi]^2 in (theta, phi).
struct SearchDomain {
    double lo = -kHalfPi;
    double hi = kHalfPi;

    bool contains(const BeamPair& z) const { return z.theta >= lo && z.theta <= hi && z.phi >= lo && z.phi <= hi; }
};

struct AcquisitionState {
    double f_best = 0.0;
    SearchDomain domain;

    /// f_best = largest observed value in data.
    static AcquisitionState from(const Dataset& data, SearchDomain domain = {});
};

/// Closed-form E[max(0, f - f_best)] for f ~ N(mu, sigma^2); 0 when sigma = 0.
double expected_improvement(double mu, double sigma, double f_best);

/// n_random uniform points in the domain followed by every point in `fixed`.
std::vector<BeamPair> draw_candidates(Rng& rng, std::size_t n_random, const SearchDomain& domain,
                                      std::span<const BeamPair> fixed = {});

struct AcquisitionChoice {
    BeamPair pair;
    double value = 0.0;
    std::size_t index = 0;  // position in the evaluated candidate list
};

/// Exhaustive argmax of EI over `candidates`; ties go to the lowest index.
AcquisitionChoice argmax_expected_improvement(const Surrogate& surrogate, double f_best,
                                              std::span<const BeamPair> candidates);

/// Draws n_candidates random points (plus `fixed`, typically the codebook cross grid)
/// and returns the EI maximizer among them.
AcquisitionChoice maximize_acquisition(const Surrogate& surrogate, const AcquisitionState& state, Rng& rng,
                                       std::size_t n_candidates, std::span<const BeamPair> fixed = {});

}  // namespace beamalign
