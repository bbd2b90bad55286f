#pragma once

#include <optional>

#include "beamalign/surrogates.hpp"

namespace beamalign {

/// exp(-0.5 * ||(z_i - z_j) / length_scale||^2).
///
/// With unit_rescale, both angles are first mapped from [-pi/2, pi/2] onto
/// [0, 1]. unit_rescale = false with length_scale = 1 is the textbook kernel
/// applied to raw radians.
struct SquaredExponentialKernel {
    double length_scale = 0.1;
    bool unit_rescale = true;

    double operator()(const BeamPair& a, const BeamPair& b) const;
};

struct GpConfig {
    SquaredExponentialKernel kernel;
    /// Diagonal jitter added to K. Unset means 1e-6 * mean(y'^2) over the
    /// (scaled) targets.
    std::optional<double> jitter;
    bool standardize = true;
    /// Each retry multiplies the jitter by 10.
    int jitter_retries = 3;
};

/// Zero-mean GP posterior over a fixed dataset.
class GpModel {
public:
    /// Factors K + jitter I. Throws NotPositiveDefinite once the retries run out.
    static GpModel fit(const Dataset& data, const GpConfig& config);

    PosteriorPrediction predict(const BeamPair& z) const;
    std::vector<PosteriorPrediction> predict_batch(std::span<const BeamPair> zs) const;
    std::vector<double> predict_mean_batch(std::span<const BeamPair> zs) const;
    /// Prior standard deviation in target units; k(z, z) = 1 bounds every posterior sigma.
    double sigma_upper_bound() const noexcept { return scaling_.scale; }

    double jitter() const noexcept { return jitter_; }
    const CholeskyFactor<double>& factor() const noexcept { return *factor_; }
    const TargetScaling& scaling() const noexcept { return scaling_; }
    /// K(data, data) without jitter.
    RealMatrix kernel_matrix() const;

private:
    GpModel() = default;

    SquaredExponentialKernel kernel_;
    std::vector<BeamPair> points_;
    TargetScaling scaling_;
    double jitter_ = 0.0;
    std::optional<CholeskyFactor<double>> factor_;
    RealVector weights_;  // (K + jitter I)^-1 y'
};

GpModel gp_fit(const Dataset& data, const GpConfig& config);
PosteriorPrediction gp_predict(const GpModel& model, const BeamPair& z);

class GpSurrogate final : public Surrogate {
public:
    explicit GpSurrogate(GpConfig config = {}) : config_(config) {}

    void fit(const Dataset& data, Rng& rng) override;
    PosteriorPrediction predict(const BeamPair& z) const override;
    std::vector<PosteriorPrediction> predict_batch(std::span<const BeamPair> zs) const override;
    std::vector<double> predict_mean_batch(std::span<const BeamPair> zs) const override;
    std::optional<double> sigma_upper_bound() const override { return model().sigma_upper_bound(); }
    std::string_view name() const override { return "GP"; }

    const GpModel& model() const;

private:
    GpConfig config_;
    std::optional<GpModel> model_;
};

}  // namespace beamalign
