#include "beamalign/surrogates.hpp"

#include <cmath>
#include <stdexcept>

namespace beamalign {

void Dataset::add(const BeamPair& z, double y) {
    if (std::isnan(y) || std::isnan(z.theta) || std::isnan(z.phi)) throw std::invalid_argument("Dataset: NaN observation");
    points_.push_back(z);
    values_.push_back(y);
}

std::size_t Dataset::best_index() const {
    if (values_.empty()) throw std::logic_error("Dataset: empty");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values_.size(); ++i)
        if (values_[i] > values_[best]) best = i;
    return best;
}

Dataset Dataset::prefix(std::size_t n) const {
    if (n > size()) throw std::out_of_range("Dataset::prefix");
    Dataset out;
    out.points_.assign(points_.begin(), points_.begin() + static_cast<std::ptrdiff_t>(n));
    out.values_.assign(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

TargetScaling TargetScaling::fit(std::span<const double> y, bool enabled) {
    TargetScaling s;
    if (!enabled || y.empty()) return s;
    double mean = 0.0;
    for (const double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double var = 0.0;
    for (const double v : y) var += (v - mean) * (v - mean);
    var /= static_cast<double>(y.size());
    s.offset = mean;
    s.scale = var > 0.0 ? std::sqrt(var) : 1.0;
    return s;
}

std::vector<PosteriorPrediction> Surrogate::predict_batch(std::span<const BeamPair> zs) const {
    std::vector<PosteriorPrediction> out;
    out.reserve(zs.size());
    for (const auto& z : zs) out.push_back(predict(z));
    return out;
}

std::vector<double> Surrogate::predict_mean_batch(std::span<const BeamPair> zs) const {
    std::vector<double> out;
    out.reserve(zs.size());
    for (const auto& p : predict_batch(zs)) out.push_back(p.mu);
    return out;
}

std::string_view to_string(SurrogateKind kind) {
    switch (kind) {
        case SurrogateKind::GaussianProcess: return "GP";
        case SurrogateKind::BoostedTrees: return "GBRT";
        case SurrogateKind::RandomForest: return "RF";
    }
    return "?";
}

}  // namespace beamalign
