#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "beamalign/surrogates.hpp"

namespace beamalign {

struct TreeConfig {
    std::size_t max_depth = 3;
    std::size_t min_leaf = 2;
    /// Features (theta, phi) examined per split; below 2 a random subset is
    /// drawn from the fit stream.
    std::size_t max_features = 2;
};

/// Binary tree of axis-aligned splits on (theta, phi) with constant leaves.
class RegressionTree {
public:
    struct Node {
        int feature = -1;  // -1 marks a leaf; 0 = theta, 1 = phi
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
        std::size_t depth = 0;
    };

    double predict(const BeamPair& z) const;
    /// out[q] = predict(zs[q]).
    void predict_into(std::span<const BeamPair> zs, std::span<double> out) const;

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    std::size_t depth() const noexcept { return depth_; }
    std::size_t leaf_count() const;

private:
    friend class TreeBuilder;

    // Traversal copy in which every leaf routes back to itself, so a query takes
    // exactly depth_ steps.
    struct Step {
        double threshold;
        int feature;
        int left;
        int right;
    };
    void finalize();

    std::vector<Node> nodes_;
    std::vector<Step> steps_;
    std::vector<double> values_;
    std::size_t depth_ = 0;
};

/// Greedy variance-reduction induction; leaves predict the mean of their samples.
/// `rows` selects (with repetition allowed) which entries of points/targets train the tree.
RegressionTree fit_regression_tree(std::span<const BeamPair> points, std::span<const double> targets,
                                   std::span<const std::size_t> rows, const TreeConfig& config, Rng& rng);

RegressionTree fit_regression_tree(const Dataset& data, const TreeConfig& config, Rng& rng);

struct GbrtConfig {
    std::size_t n_trees = 100;
    double learning_rate = 0.1;
    TreeConfig tree{3, 2, 2};
    bool standardize = true;
};

/// Least-squares gradient boosting: F_0 = mean(y), F_t = F_{t-1} + nu * h_t where
/// h_t fits the residuals y - F_{t-1}.
///
/// The predictive spread comes from the per-tree full-model estimates
/// s_b(z) = F_0 + T * nu * h_b(z). Their mean is exactly F_T(z), and their unbiased
/// sample variance measures how much the stages disagree about z.
class GbrtModel {
public:
    static GbrtModel fit(const Dataset& data, const GbrtConfig& config, Rng& rng);

    /// F_T(z).
    double boosted_prediction(const BeamPair& z) const;
    /// Empirical mean and variance of the s_b(z).
    PosteriorPrediction predict(const BeamPair& z) const;
    std::vector<PosteriorPrediction> predict_batch(std::span<const BeamPair> zs) const;
    /// s_b(z) for every tree, in target units.
    std::vector<double> tree_estimates(const BeamPair& z) const;
    /// sum_i (y_i - F_t(z_i))^2 for t = 0..T.
    std::vector<double> staged_training_loss(const Dataset& data) const;

    const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
    double initial_value() const noexcept { return scaling_.inverse(base_); }
    double learning_rate() const noexcept { return learning_rate_; }
    const TargetScaling& scaling() const noexcept { return scaling_; }

private:
    TargetScaling scaling_;
    double base_ = 0.0;  // F_0 in scaled units
    double learning_rate_ = 0.1;
    std::vector<RegressionTree> trees_;
};

GbrtModel gbrt_fit(const Dataset& data, const GbrtConfig& config, Rng& rng);
PosteriorPrediction gbrt_predict(const GbrtModel& model, const BeamPair& z);

struct RfConfig {
    std::size_t n_trees = 50;
    TreeConfig tree{8, 2, 2};
    bool bootstrap = true;
    bool standardize = true;
};

/// Bagged regression trees; the prediction is the mean and unbiased variance of the
/// per-tree outputs. A single-tree forest reports sigma = 0.
class RfModel {
public:
    static RfModel fit(const Dataset& data, const RfConfig& config, Rng& rng);

    PosteriorPrediction predict(const BeamPair& z) const;
    std::vector<PosteriorPrediction> predict_batch(std::span<const BeamPair> zs) const;
    std::vector<double> tree_predictions(const BeamPair& z) const;
    const std::vector<RegressionTree>& trees() const noexcept { return trees_; }

private:
    TargetScaling scaling_;
    std::vector<RegressionTree> trees_;
};

RfModel rf_fit(const Dataset& data, const RfConfig& config, Rng& rng);
PosteriorPrediction rf_predict(const RfModel& model, const BeamPair& z);

class GbrtSurrogate final : public Surrogate {
public:
    explicit GbrtSurrogate(GbrtConfig config = {}) : config_(config) {}

    void fit(const Dataset& data, Rng& rng) override { model_ = GbrtModel::fit(data, config_, rng); }
    PosteriorPrediction predict(const BeamPair& z) const override;
    std::vector<PosteriorPrediction> predict_batch(std::span<const BeamPair> zs) const override;
    std::string_view name() const override { return "GBRT"; }

    const GbrtModel& model() const;

private:
    GbrtConfig config_;
    std::optional<GbrtModel> model_;
};

class RfSurrogate final : public Surrogate {
public:
    explicit RfSurrogate(RfConfig config = {}) : config_(config) {}

    void fit(const Dataset& data, Rng& rng) override { model_ = RfModel::fit(data, config_, rng); }
    PosteriorPrediction predict(const BeamPair& z) const override;
    std::vector<PosteriorPrediction> predict_batch(std::span<const BeamPair> zs) const override;
    std::string_view name() const override { return "RF"; }

    const RfModel& model() const;

private:
    RfConfig config_;
    std::optional<RfModel> model_;
};

}  // namespace beamalign
