#pragma once

// Reference implementations used only to cross-check the library. Each one
// takes a deliberately different route from the production code (dense
// elimination instead of Cholesky, path sums instead of the channel matrix,
// sampling instead of closed forms) and favours clarity over speed.

#include <vector>

#include "beamalign/channel.hpp"
#include "beamalign/numerics.hpp"
#include "beamalign/surrogates.hpp"
#include "beamalign/tree_ensembles.hpp"

namespace beamalign::checks {

/// Solves a x = b by Gaussian elimination with partial pivoting.
std::vector<double> gaussian_elimination_solve(RealMatrix a, std::vector<double> b);
std::vector<Complex> gaussian_elimination_solve(ComplexMatrix a, std::vector<Complex> b);

struct GpOracleInput {
    std::vector<BeamPair> points;
    std::vector<double> values;
    double length_scale = 0.1;
    bool unit_rescale = true;
    bool standardize = true;
    double jitter = 0.0;
};

/// Posterior of f(z) obtained by writing out the joint Gaussian of
/// (y_1..y_m, f(z)) and conditioning on the observed block.
PosteriorPrediction conditioned_gaussian(const GpOracleInput& in, const BeamPair& z);

/// Sample mean of max(0, X - f_best) for X ~ N(mu, sigma^2).
double monte_carlo_expected_improvement(double mu, double sigma, double f_best, std::size_t samples, Rng& rng);

/// Phi(x) by composite Simpson integration of the density.
double normal_cdf_by_quadrature(double x);

/// |u^H H v|^2 summed path by path with array factors written out element by element.
double path_sum_gain(const ChannelParams& params, const std::vector<PathComponent>& paths, const BeamPair& pair);

/// Flat index (rx * G_t + tx) of the codebook pair with the largest noiseless
/// gain; earliest index on ties.
std::size_t grid_argmax(const ChannelParams& params, const std::vector<PathComponent>& paths,
                        const BeamCodebooks& codebooks);

/// Leaf value reached by walking the node table.
double walk_tree(const RegressionTree& tree, const BeamPair& z);

/// F_T(z) = F_0 + nu * sum_t h_t(z), in target units.
double staged_boosted_value(const GbrtModel& model, const BeamPair& z);

/// Mean and unbiased spread of s_b = F_0 + T nu h_b(z), in target units.
PosteriorPrediction per_tree_moments(const GbrtModel& model, const BeamPair& z);

}  // namespace beamalign::checks
