#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "beamalign/channel.hpp"
#include "beamalign/numerics.hpp"

namespace beamalign {

/// Ordered (beam pair, RSS) observations.
class Dataset {
public:
    void add(const BeamPair& z, double y);

    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }

    const std::vector<BeamPair>& points() const noexcept { return points_; }
    const std::vector<double>& values() const noexcept { return values_; }

    /// Index of the largest value; ties resolve to the earliest entry.
    std::size_t best_index() const;
    double best_value() const { return values_.at(best_index()); }

    /// Copy of the first n observations.
    Dataset prefix(std::size_t n) const;

private:
    std::vector<BeamPair> points_;
    std::vector<double> values_;
};

struct PosteriorPrediction {
    double mu = 0.0;
    double sigma = 0.0;
};

/// Affine target transform y' = (y - offset) / scale. With enabled = false it is
/// the identity; a zero-variance target keeps scale = 1.
struct TargetScaling {
    double offset = 0.0;
    double scale = 1.0;

    static TargetScaling fit(std::span<const double> y, bool enabled);

    double forward(double y) const { return (y - offset) / scale; }
    double inverse(double y) const { return offset + scale * y; }
    PosteriorPrediction inverse(const PosteriorPrediction& p) const { return {inverse(p.mu), scale * p.sigma}; }
};

/// Probabilistic regressor over beam pairs. predict() is deterministic after fit();
/// fit() draws randomness only from the stream it is handed.
class Surrogate {
public:
    virtual ~Surrogate() = default;

    virtual void fit(const Dataset& data, Rng& rng) = 0;
    virtual PosteriorPrediction predict(const BeamPair& z) const = 0;
    virtual std::vector<PosteriorPrediction> predict_batch(std::span<const BeamPair> zs) const;
    virtual std::vector<double> predict_mean_batch(std::span<const BeamPair> zs) const;
    /// A value no predicted sigma can exceed, when the model has one. Lets the EI
    /// argmax skip the variance computation for candidates that cannot win.
    virtual std::optional<double> sigma_upper_bound() const { return std::nullopt; }
    virtual std::string_view name() const = 0;
};

enum class SurrogateKind { GaussianProcess, BoostedTrees, RandomForest };

std::string_view to_string(SurrogateKind kind);

}  // namespace beamalign
