#pragma once

#include <stdexcept>
#include <vector>

#include "beamalign/channel.hpp"
#include "beamalign/optimizer.hpp"

namespace beamalign {

class BudgetTooSmall : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Exhaustive sweep

struct ExhaustiveResult {
    BeamPair pair;
    std::size_t flat_index = 0;
    std::size_t measurements = 0;
    RunTrace trace;
};

/// Probes every TX x RX codebook pair once and keeps the noisy argmax.
ExhaustiveResult exhaustive_search(const ChannelRealization& channel, const BeamCodebooks& codebooks,
                                   const ChannelParams& params, Rng& rng);

// ---------------------------------------------------------------------------
// Compressed sensing over the virtual (angular-grid) channel

/// How the OMP measurement beams are chosen.
///  - CodebookPairs: distinct random TX/RX codebook pairs. With a critically sampled
///    DFT codebook every row then observes a single virtual-channel entry.
///  - RandomPhase: independent unit-modulus beams with uniform random phases.
enum class OmpProbes { CodebookPairs, RandomPhase };

/// y = M x where x is the row-major vectorised G_r x G_t virtual channel.
struct SensingSystem {
    ComplexMatrix matrix;             // budget x (G_r * G_t)
    ComplexVector observations;       // budget
    std::vector<std::size_t> probes;  // flat codebook pair index of each row (CodebookPairs only)
    std::size_t g_rx = 0;
    std::size_t g_tx = 0;
};

/// Takes `budget` measurements with beams (u_i, v_i) and builds the matching rows
/// sqrt(P_t) (u_i^H A_R) (x) (A_T^H v_i).
SensingSystem build_sensing_system(const ChannelRealization& channel, const BeamCodebooks& codebooks,
                                   std::size_t budget, const ChannelParams& params, Rng& rng,
                                   OmpProbes probes = OmpProbes::CodebookPairs);

struct OmpSolution {
    std::vector<std::size_t> support;  // in selection order
    ComplexVector coefficients;        // least-squares values on the support
    std::vector<double> residual_norms;  // ||y||, then after each selection
};

/// Greedy max-normalised-correlation selection with a least-squares refit per step.
OmpSolution orthogonal_matching_pursuit(const ComplexMatrix& matrix, std::span<const Complex> y,
                                        std::size_t sparsity);

struct OmpResult {
    BeamPair pair;
    std::size_t flat_index = 0;
    OmpSolution solution;
    SensingSystem system;
    RunTrace trace;
};

/// Throws BudgetTooSmall when budget < sparsity.
OmpResult omp_align(const ChannelRealization& channel, const BeamCodebooks& codebooks, std::size_t budget,
                    std::size_t sparsity, const ChannelParams& params, Rng& rng,
                    OmpProbes probes = OmpProbes::CodebookPairs);

// ---------------------------------------------------------------------------
// Thompson-sampling bandit, one arm per codebook pair

struct ArmStats {
    double mean = 0.0;
    double variance = 0.0;
    std::size_t pulls = 0;
};

/// Gaussian arms with known reward variance and a conjugate Normal prior on each mean.
class GaussianThompsonSampler {
public:
    GaussianThompsonSampler(std::size_t n_arms, double prior_mean, double prior_variance, double noise_variance);

    /// Draws one value from every arm's posterior and returns the argmax.
    std::size_t select(Rng& rng) const;
    void update(std::size_t arm, double reward);
    /// Arm with the highest posterior mean (lowest index on ties).
    std::size_t recommend() const;

    const std::vector<ArmStats>& arms() const noexcept { return arms_; }
    double prior_mean() const noexcept { return prior_mean_; }

private:
    std::vector<ArmStats> arms_;
    std::vector<double> reward_sums_;
    double prior_mean_;
    double prior_variance_;
    double noise_variance_;
};

struct TsMabConfig {
    double prior_mean = 0.0;
    /// <= 0 selects (P_t sigma_a^2 N_t N_r)^2.
    double prior_variance = 0.0;
    /// <= 0 selects sigma_n^2 (1 + P_t / sigma_n^2).
    double noise_variance = 0.0;
};

struct TsMabResult {
    BeamPair pair;
    std::size_t arm = 0;
    RunTrace trace;
    std::vector<ArmStats> arms;
};

TsMabResult ts_mab_align(const ChannelRealization& channel, const BeamCodebooks& codebooks, std::size_t budget,
                         const ChannelParams& params, Rng& rng, const TsMabConfig& config = {});

}  // namespace beamalign
