#include "beamalign/gaussian_process.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beamalign {

namespace {

struct Coordinates {
    double x;
    double y;
};

Coordinates kernel_coordinates(const SquaredExponentialKernel& k, const BeamPair& z) {
    if (!k.unit_rescale) return {z.theta / k.length_scale, z.phi / k.length_scale};
    const double s = 1.0 / (std::numbers::pi * k.length_scale);
    return {(z.theta + kHalfPi) * s, (z.phi + kHalfPi) * s};
}

double kernel_from_coordinates(const Coordinates& a, const Coordinates& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::exp(-0.5 * (dx * dx + dy * dy));
}

}  // namespace

double SquaredExponentialKernel::operator()(const BeamPair& a, const BeamPair& b) const {
    return kernel_from_coordinates(kernel_coordinates(*this, a), kernel_coordinates(*this, b));
}

GpModel GpModel::fit(const Dataset& data, const GpConfig& config) {
    if (data.empty()) throw std::invalid_argument("gp_fit: empty dataset");
    if (!(config.kernel.length_scale > 0.0)) throw std::invalid_argument("gp_fit: length scale must be > 0");

    GpModel model;
    model.kernel_ = config.kernel;
    model.points_ = data.points();
    model.scaling_ = TargetScaling::fit(data.values(), config.standardize);

    const std::size_t m = data.size();
    RealVector targets(m);
    double mean_sq = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        targets[i] = model.scaling_.forward(data.values()[i]);
        mean_sq += targets[i] * targets[i];
    }
    mean_sq /= static_cast<double>(m);

    double jitter = config.jitter.value_or(1e-6 * (mean_sq > 0.0 ? mean_sq : 1.0));
    if (jitter < 0.0) throw std::invalid_argument("gp_fit: negative jitter");

    const RealMatrix k = model.kernel_matrix();
    for (int attempt = 0;; ++attempt) {
        RealMatrix kj = k;
        for (std::size_t i = 0; i < m; ++i) kj(i, i) += jitter;
        try {
            model.factor_.emplace(kj);
            break;
        } catch (const NotPositiveDefinite&) {
            if (attempt >= config.jitter_retries) throw;
            jitter *= 10.0;
        }
    }
    model.jitter_ = jitter;
    model.weights_ = model.factor_->solve(targets);
    return model;
}

RealMatrix GpModel::kernel_matrix() const {
    const std::size_t m = points_.size();
    std::vector<Coordinates> c(m);
    for (std::size_t i = 0; i < m; ++i) c[i] = kernel_coordinates(kernel_, points_[i]);
    RealMatrix k(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        k(i, i) = 1.0;
        for (std::size_t j = 0; j < i; ++j) k(i, j) = k(j, i) = kernel_from_coordinates(c[i], c[j]);
    }
    return k;
}

PosteriorPrediction GpModel::predict(const BeamPair& z) const {
    return predict_batch(std::span<const BeamPair>(&z, 1)).front();
}

std::vector<PosteriorPrediction> GpModel::predict_batch(std::span<const BeamPair> zs) const {
    const std::size_t m = points_.size();
    std::vector<Coordinates> train(m);
    for (std::size_t i = 0; i < m; ++i) train[i] = kernel_coordinates(kernel_, points_[i]);
    const RealMatrix& lower = factor_->lower();

    // Candidates go through the triangular solve in blocks so the innermost loop
    // runs across independent queries.
    constexpr std::size_t kBlock = 8;
    std::vector<PosteriorPrediction> out(zs.size());
    RealVector kblock(m * kBlock);
    RealVector vblock(m * kBlock);
    for (std::size_t q0 = 0; q0 < zs.size(); q0 += kBlock) {
        const std::size_t nb = std::min(kBlock, zs.size() - q0);
        double mu[kBlock] = {};
        double explained[kBlock] = {};
        for (std::size_t c = 0; c < kBlock; ++c) {
            const Coordinates cq = kernel_coordinates(kernel_, zs[q0 + std::min(c, nb - 1)]);
            for (std::size_t i = 0; i < m; ++i) {
                const double kv = kernel_from_coordinates(cq, train[i]);
                kblock[i * kBlock + c] = kv;
                mu[c] += kv * weights_[i];
            }
        }
        // ||L^-1 k||^2 = k^T (K + jitter I)^-1 k
        for (std::size_t i = 0; i < m; ++i) {
            const double* li = lower.row(i).data();
            double acc[kBlock];
            for (std::size_t c = 0; c < kBlock; ++c) acc[c] = kblock[i * kBlock + c];
            for (std::size_t j = 0; j < i; ++j) {
                const double lij = li[j];
                const double* vj = &vblock[j * kBlock];
                for (std::size_t c = 0; c < kBlock; ++c) acc[c] -= lij * vj[c];
            }
            const double inv = 1.0 / li[i];
            for (std::size_t c = 0; c < kBlock; ++c) {
                const double v = acc[c] * inv;
                vblock[i * kBlock + c] = v;
                explained[c] += v * v;
            }
        }
        for (std::size_t c = 0; c < nb; ++c) {
            const double var = std::max(0.0, 1.0 - explained[c]);
            out[q0 + c] = scaling_.inverse(PosteriorPrediction{mu[c], std::sqrt(var)});
        }
    }
    return out;
}

std::vector<double> GpModel::predict_mean_batch(std::span<const BeamPair> zs) const {
    const std::size_t m = points_.size();
    std::vector<Coordinates> train(m);
    for (std::size_t i = 0; i < m; ++i) train[i] = kernel_coordinates(kernel_, points_[i]);
    std::vector<double> out(zs.size());
    for (std::size_t q = 0; q < zs.size(); ++q) {
        const Coordinates cq = kernel_coordinates(kernel_, zs[q]);
        double mu = 0.0;
        for (std::size_t i = 0; i < m; ++i) mu += kernel_from_coordinates(cq, train[i]) * weights_[i];
        out[q] = scaling_.inverse(mu);
    }
    return out;
}

GpModel gp_fit(const Dataset& data, const GpConfig& config) { return GpModel::fit(data, config); }

PosteriorPrediction gp_predict(const GpModel& model, const BeamPair& z) { return model.predict(z); }

void GpSurrogate::fit(const Dataset& data, Rng&) { model_ = GpModel::fit(data, config_); }

const GpModel& GpSurrogate::model() const {
    if (!model_) throw std::logic_error("GpSurrogate: predict before fit");
    return *model_;
}

PosteriorPrediction GpSurrogate::predict(const BeamPair& z) const { return model().predict(z); }

std::vector<PosteriorPrediction> GpSurrogate::predict_batch(std::span<const BeamPair> zs) const {
    return model().predict_batch(zs);
}

std::vector<double> GpSurrogate::predict_mean_batch(std::span<const BeamPair> zs) const {
    return model().predict_mean_batch(zs);
}

}  // namespace beamalign
