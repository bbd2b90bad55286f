#include "beamalign/tree_ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace beamalign {

namespace {

double coordinate(const BeamPair& z, int feature) { return feature == 0 ? z.theta : z.phi; }

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

double mean_and_moments(std::span<const double> targets, std::span<const std::size_t> rows, double& sse,
                        double& sumsq) {
    double sum = 0.0;
    sumsq = 0.0;
    for (const auto r : rows) {
        sum += targets[r];
        sumsq += targets[r] * targets[r];
    }
    const double mean = sum / static_cast<double>(rows.size());
    sse = 0.0;
    for (const auto r : rows) sse += (targets[r] - mean) * (targets[r] - mean);
    return mean;
}

std::pair<double, double> mean_and_sample_sd(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    if (xs.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (const double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

// Candidates per block in the ensemble batch predictors; keeps the per-tree
// output table cache resident.
constexpr std::size_t kPredictBlock = 512;

/// Mean and unbiased sd across trees of a + b * tree(z) for each z, summing in
/// tree order so the result matches mean_and_sample_sd on the same values.
std::vector<PosteriorPrediction> ensemble_moments(const std::vector<RegressionTree>& trees, double a, double b,
                                                  std::span<const BeamPair> zs) {
    const std::size_t nt = trees.size();
    std::vector<PosteriorPrediction> out(zs.size());
    std::vector<double> table(nt * kPredictBlock);
    std::vector<double> sum(kPredictBlock);
    std::vector<double> ss(kPredictBlock);
    for (std::size_t q0 = 0; q0 < zs.size(); q0 += kPredictBlock) {
        const std::size_t nb = std::min(kPredictBlock, zs.size() - q0);
        const auto block = zs.subspan(q0, nb);
        std::fill(sum.begin(), sum.end(), 0.0);
        std::fill(ss.begin(), ss.end(), 0.0);
        for (std::size_t t = 0; t < nt; ++t) {
            double* row = &table[t * kPredictBlock];
            trees[t].predict_into(block, std::span<double>(row, nb));
            for (std::size_t c = 0; c < nb; ++c) {
                row[c] = a + b * row[c];
                sum[c] += row[c];
            }
        }
        const double n = static_cast<double>(nt);
        for (std::size_t c = 0; c < nb; ++c) sum[c] /= n;
        if (nt >= 2) {
            for (std::size_t t = 0; t < nt; ++t) {
                const double* row = &table[t * kPredictBlock];
                for (std::size_t c = 0; c < nb; ++c) ss[c] += (row[c] - sum[c]) * (row[c] - sum[c]);
            }
        }
        for (std::size_t c = 0; c < nb; ++c)
            out[q0 + c] = {sum[c], nt >= 2 ? std::sqrt(ss[c] / (n - 1.0)) : 0.0};
    }
    return out;
}

}  // namespace

class TreeBuilder {
public:
    TreeBuilder(std::span<const BeamPair> points, std::span<const double> targets, const TreeConfig& config, Rng& rng)
        : points_(points), targets_(targets), config_(config), rng_(rng) {}

    RegressionTree build(std::vector<std::size_t> rows) {
        RegressionTree tree;
        tree_ = &tree;
        grow(std::move(rows), 0);
        tree.finalize();
        return tree;
    }

private:
    int grow(std::vector<std::size_t> rows, std::size_t depth) {
        double sse = 0.0;
        double sumsq = 0.0;
        const double mean = mean_and_moments(targets_, rows, sse, sumsq);

        const int id = static_cast<int>(tree_->nodes_.size());
        tree_->nodes_.push_back({-1, 0.0, -1, -1, mean, depth});

        const std::size_t min_leaf = std::max<std::size_t>(1, config_.min_leaf);
        if (depth >= config_.max_depth || rows.size() < 2 * min_leaf) return id;
        if (sse <= 1e-20 * std::max(1.0, sumsq)) return id;

        const SplitCandidate split = best_split(rows, sse, min_leaf);
        if (split.feature < 0) return id;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (const auto r : rows) {
            if (coordinate(points_[r], split.feature) <= split.threshold)
                left.push_back(r);
            else
                right.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        auto& node = tree_->nodes_[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    std::vector<int> features() {
        if (config_.max_features >= 2) return {0, 1};
        // One of the two coordinates, chosen by the fit stream.
        return {static_cast<int>(rng_.index(2))};
    }

    SplitCandidate best_split(const std::vector<std::size_t>& rows, double sse, std::size_t min_leaf) {
        SplitCandidate best;
        best.gain = 1e-12 * sse;
        const std::size_t n = rows.size();
        double total = 0.0;
        for (const auto r : rows) total += targets_[r];
        const double base = total * total / static_cast<double>(n);

        std::vector<std::size_t> order(rows);
        for (const int f : features()) {
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                const double xa = coordinate(points_[a], f);
                const double xb = coordinate(points_[b], f);
                return xa < xb || (xa == xb && a < b);
            });
            double left_sum = 0.0;
            for (std::size_t i = 1; i < n; ++i) {
                left_sum += targets_[order[i - 1]];
                if (i < min_leaf || n - i < min_leaf) continue;
                const double lo = coordinate(points_[order[i - 1]], f);
                const double hi = coordinate(points_[order[i]], f);
                if (!(lo < hi)) continue;
                const double nl = static_cast<double>(i);
                const double nr = static_cast<double>(n - i);
                const double right_sum = total - left_sum;
                const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr - base;
                if (gain > best.gain) {
                    double mid = 0.5 * (lo + hi);
                    if (mid >= hi) mid = lo;
                    best = {f, mid, gain};
                }
            }
        }
        return best;
    }

    std::span<const BeamPair> points_;
    std::span<const double> targets_;
    const TreeConfig& config_;
    Rng& rng_;
    RegressionTree* tree_ = nullptr;
};

void RegressionTree::finalize() {
    steps_.resize(nodes_.size());
    values_.resize(nodes_.size());
    depth_ = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& n = nodes_[i];
        const int self = static_cast<int>(i);
        steps_[i] = n.feature < 0 ? Step{std::numeric_limits<double>::infinity(), 0, self, self}
                                  : Step{n.threshold, n.feature, n.left, n.right};
        values_[i] = n.value;
        depth_ = std::max(depth_, n.depth);
    }
}

double RegressionTree::predict(const BeamPair& z) const {
    std::size_t i = 0;
    for (std::size_t d = 0; d < depth_; ++d) {
        const Step& s = steps_[i];
        const double x = s.feature != 0 ? z.phi : z.theta;
        i = static_cast<std::size_t>(x <= s.threshold ? s.left : s.right);
    }
    return values_[i];
}

void RegressionTree::predict_into(std::span<const BeamPair> zs, std::span<double> out) const {
    const Step* steps = steps_.data();
    const double* values = values_.data();
    const std::size_t depth = depth_;
    const std::size_t n = zs.size();
    // Four independent walks per pass so their dependent loads overlap.
    std::size_t q = 0;
    for (; q + 4 <= n; q += 4) {
        int i0 = 0, i1 = 0, i2 = 0, i3 = 0;
        for (std::size_t d = 0; d < depth; ++d) {
            const Step& s0 = steps[i0];
            const Step& s1 = steps[i1];
            const Step& s2 = steps[i2];
            const Step& s3 = steps[i3];
            i0 = (s0.feature != 0 ? zs[q].phi : zs[q].theta) <= s0.threshold ? s0.left : s0.right;
            i1 = (s1.feature != 0 ? zs[q + 1].phi : zs[q + 1].theta) <= s1.threshold ? s1.left : s1.right;
            i2 = (s2.feature != 0 ? zs[q + 2].phi : zs[q + 2].theta) <= s2.threshold ? s2.left : s2.right;
            i3 = (s3.feature != 0 ? zs[q + 3].phi : zs[q + 3].theta) <= s3.threshold ? s3.left : s3.right;
        }
        out[q] = values[i0];
        out[q + 1] = values[i1];
        out[q + 2] = values[i2];
        out[q + 3] = values[i3];
    }
    for (; q < n; ++q) out[q] = predict(zs[q]);
}

std::size_t RegressionTree::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.feature < 0; }));
}

RegressionTree fit_regression_tree(std::span<const BeamPair> points, std::span<const double> targets,
                                   std::span<const std::size_t> rows, const TreeConfig& config, Rng& rng) {
    if (rows.empty()) throw std::invalid_argument("fit_regression_tree: no training rows");
    if (points.size() != targets.size()) throw std::invalid_argument("fit_regression_tree: size mismatch");
    return TreeBuilder(points, targets, config, rng).build({rows.begin(), rows.end()});
}

RegressionTree fit_regression_tree(const Dataset& data, const TreeConfig& config, Rng& rng) {
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return fit_regression_tree(data.points(), data.values(), rows, config, rng);
}

GbrtModel GbrtModel::fit(const Dataset& data, const GbrtConfig& config, Rng& rng) {
    if (data.empty()) throw std::invalid_argument("gbrt_fit: empty dataset");
    if (config.n_trees < 1) throw std::invalid_argument("gbrt_fit: need at least one tree");

    GbrtModel model;
    model.scaling_ = TargetScaling::fit(data.values(), config.standardize);
    model.learning_rate_ = config.learning_rate;

    const std::size_t m = data.size();
    RealVector y(m);
    for (std::size_t i = 0; i < m; ++i) y[i] = model.scaling_.forward(data.values()[i]);
    model.base_ = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(m);

    std::vector<std::size_t> rows(m);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    RealVector fitted(m, model.base_);
    RealVector residual(m);
    model.trees_.reserve(config.n_trees);
    for (std::size_t t = 0; t < config.n_trees; ++t) {
        for (std::size_t i = 0; i < m; ++i) residual[i] = y[i] - fitted[i];
        auto tree = fit_regression_tree(data.points(), residual, rows, config.tree, rng);
        for (std::size_t i = 0; i < m; ++i) fitted[i] += model.learning_rate_ * tree.predict(data.points()[i]);
        model.trees_.push_back(std::move(tree));
    }
    return model;
}

double GbrtModel::boosted_prediction(const BeamPair& z) const {
    double f = base_;
    for (const auto& t : trees_) f += learning_rate_ * t.predict(z);
    return scaling_.inverse(f);
}

std::vector<double> GbrtModel::tree_estimates(const BeamPair& z) const {
    const double stretch = static_cast<double>(trees_.size()) * learning_rate_;
    std::vector<double> s(trees_.size());
    for (std::size_t b = 0; b < trees_.size(); ++b) s[b] = base_ + stretch * trees_[b].predict(z);
    return s;
}

PosteriorPrediction GbrtModel::predict(const BeamPair& z) const {
    const auto s = tree_estimates(z);
    const auto [mean, sd] = mean_and_sample_sd(s);
    return scaling_.inverse(PosteriorPrediction{mean, sd});
}

std::vector<PosteriorPrediction> GbrtModel::predict_batch(std::span<const BeamPair> zs) const {
    const double stretch = static_cast<double>(trees_.size()) * learning_rate_;
    auto out = ensemble_moments(trees_, base_, stretch, zs);
    for (auto& p : out) p = scaling_.inverse(p);
    return out;
}

std::vector<double> GbrtModel::staged_training_loss(const Dataset& data) const {
    const std::size_t m = data.size();
    RealVector fitted(m, base_);
    std::vector<double> loss;
    loss.reserve(trees_.size() + 1);
    auto current_loss = [&] {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double e = data.values()[i] - scaling_.inverse(fitted[i]);
            acc += e * e;
        }
        return acc;
    };
    loss.push_back(current_loss());
    for (const auto& t : trees_) {
        for (std::size_t i = 0; i < m; ++i) fitted[i] += learning_rate_ * t.predict(data.points()[i]);
        loss.push_back(current_loss());
    }
    return loss;
}

GbrtModel gbrt_fit(const Dataset& data, const GbrtConfig& config, Rng& rng) { return GbrtModel::fit(data, config, rng); }

PosteriorPrediction gbrt_predict(const GbrtModel& model, const BeamPair& z) { return model.predict(z); }

RfModel RfModel::fit(const Dataset& data, const RfConfig& config, Rng& rng) {
    if (data.empty()) throw std::invalid_argument("rf_fit: empty dataset");
    if (config.n_trees < 1) throw std::invalid_argument("rf_fit: need at least one tree");

    RfModel model;
    model.scaling_ = TargetScaling::fit(data.values(), config.standardize);
    const std::size_t m = data.size();
    RealVector y(m);
    for (std::size_t i = 0; i < m; ++i) y[i] = model.scaling_.forward(data.values()[i]);

    std::vector<std::size_t> rows(m);
    model.trees_.reserve(config.n_trees);
    for (std::size_t t = 0; t < config.n_trees; ++t) {
        if (config.bootstrap) {
            for (auto& r : rows) r = rng.index(m);
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        model.trees_.push_back(fit_regression_tree(data.points(), y, rows, config.tree, rng));
    }
    return model;
}

std::vector<double> RfModel::tree_predictions(const BeamPair& z) const {
    std::vector<double> p(trees_.size());
    for (std::size_t b = 0; b < trees_.size(); ++b) p[b] = scaling_.inverse(trees_[b].predict(z));
    return p;
}

PosteriorPrediction RfModel::predict(const BeamPair& z) const {
    std::vector<double> p(trees_.size());
    for (std::size_t b = 0; b < trees_.size(); ++b) p[b] = trees_[b].predict(z);
    const auto [mean, sd] = mean_and_sample_sd(p);
    return scaling_.inverse(PosteriorPrediction{mean, sd});
}

std::vector<PosteriorPrediction> RfModel::predict_batch(std::span<const BeamPair> zs) const {
    auto out = ensemble_moments(trees_, 0.0, 1.0, zs);
    for (auto& p : out) p = scaling_.inverse(p);
    return out;
}

RfModel rf_fit(const Dataset& data, const RfConfig& config, Rng& rng) { return RfModel::fit(data, config, rng); }

PosteriorPrediction rf_predict(const RfModel& model, const BeamPair& z) { return model.predict(z); }

PosteriorPrediction GbrtSurrogate::predict(const BeamPair& z) const { return model().predict(z); }

const GbrtModel& GbrtSurrogate::model() const {
    if (!model_) throw std::logic_error("GbrtSurrogate: predict before fit");
    return *model_;
}

PosteriorPrediction RfSurrogate::predict(const BeamPair& z) const { return model().predict(z); }

std::vector<PosteriorPrediction> RfSurrogate::predict_batch(std::span<const BeamPair> zs) const {
    return model().predict_batch(zs);
}

std::vector<PosteriorPrediction> GbrtSurrogate::predict_batch(std::span<const BeamPair> zs) const {
    return model().predict_batch(zs);
}

const RfModel& RfSurrogate::model() const {
    if (!model_) throw std::logic_error("RfSurrogate: predict before fit");
    return *model_;
}

}  // namespace beamalign
