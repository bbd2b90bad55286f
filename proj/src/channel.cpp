#include "beamalign/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace beamalign {

void ChannelParams::validate() const {
    if (n_tx < 1 || n_rx < 1 || n_paths < 1) throw std::invalid_argument("channel: antenna and path counts must be >= 1");
    if (!(d_over_lambda > 0.0)) throw std::invalid_argument("channel: d_over_lambda must be > 0");
    if (!(sigma_a_sq > 0.0)) throw std::invalid_argument("channel: sigma_a_sq must be > 0");
    if (!(p_t > 0.0)) throw std::invalid_argument("channel: p_t must be > 0");
    if (!(sigma_n_sq >= 0.0)) throw std::invalid_argument("channel: sigma_n_sq must be >= 0");
}

double ChannelParams::snr_linear() const {
    if (sigma_n_sq == 0.0) return std::numeric_limits<double>::infinity();
    return p_t * sigma_a_sq / sigma_n_sq;
}

ChannelParams ChannelParams::with_snr_db(double snr_db) const {
    ChannelParams out = *this;
    out.sigma_n_sq = p_t * sigma_a_sq / std::pow(10.0, snr_db / 10.0);
    return out;
}

ComplexVector steering_vector(std::size_t n, double angle, double d_over_lambda) {
    if (n == 0) throw std::invalid_argument("steering_vector: n must be >= 1");
    ComplexVector v(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const double step = 2.0 * std::numbers::pi * d_over_lambda * std::sin(angle);
    for (std::size_t k = 0; k < n; ++k) v[k] = std::polar(scale, step * static_cast<double>(k));
    return v;
}

ChannelRealization ChannelRealization::from_paths(const ChannelParams& params, std::vector<PathComponent> paths) {
    ChannelRealization out;
    out.h = ComplexMatrix(params.n_rx, params.n_tx);
    const double scale = std::sqrt(static_cast<double>(params.n_tx * params.n_rx) / static_cast<double>(paths.size()));
    for (const auto& p : paths) {
        const auto ar = steering_vector(params.n_rx, p.phi, params.d_over_lambda);
        const auto at = steering_vector(params.n_tx, p.theta, params.d_over_lambda);
        for (std::size_t r = 0; r < params.n_rx; ++r) {
            const Complex lead = scale * p.alpha * ar[r];
            auto row = out.h.row(r);
            for (std::size_t t = 0; t < params.n_tx; ++t) row[t] += lead * std::conj(at[t]);
        }
    }
    out.paths = std::move(paths);
    return out;
}

ChannelRealization draw_channel(Rng& rng, const ChannelParams& params) {
    params.validate();
    const auto gains = sample_complex_gaussian(rng, params.n_paths, params.sigma_a_sq);
    std::vector<PathComponent> paths(params.n_paths);
    for (std::size_t l = 0; l < params.n_paths; ++l) {
        paths[l].alpha = gains[l];
        paths[l].theta = rng.uniform(-kHalfPi, kHalfPi);
        paths[l].phi = rng.uniform(-kHalfPi, kHalfPi);
    }
    return ChannelRealization::from_paths(params, std::move(paths));
}

Codebook build_codebook(std::size_t n, std::size_t g, double d_over_lambda) {
    if (g == 0) throw std::invalid_argument("build_codebook: grid size must be >= 1");
    Codebook cb;
    cb.n_antennas = n;
    cb.spatial_angles.resize(g);
    cb.columns = ComplexMatrix(n, g);
    for (std::size_t i = 0; i < g; ++i) {
        cb.spatial_angles[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(g);
        const auto v = steering_vector(n, std::asin(cb.spatial_angles[i]), d_over_lambda);
        for (std::size_t k = 0; k < n; ++k) cb.columns(k, i) = v[k];
    }
    return cb;
}

double Codebook::angle(std::size_t i) const { return std::asin(spatial_angles.at(i)); }

BeamCodebooks BeamCodebooks::build(const ChannelParams& params, std::size_t g_tx, std::size_t g_rx) {
    return {build_codebook(params.n_tx, g_tx, params.d_over_lambda),
            build_codebook(params.n_rx, g_rx, params.d_over_lambda)};
}

BeamPair BeamCodebooks::pair(std::size_t tx_index, std::size_t rx_index) const {
    return {tx.angle(tx_index), rx.angle(rx_index)};
}

BeamPair BeamCodebooks::pair(std::size_t flat_index) const {
    return pair(flat_index % tx.size(), flat_index / tx.size());
}

std::vector<BeamPair> BeamCodebooks::cross_grid() const {
    std::vector<BeamPair> grid;
    grid.reserve(pair_count());
    for (std::size_t i = 0; i < pair_count(); ++i) grid.push_back(pair(i));
    return grid;
}

Complex beam_response(const ChannelRealization& channel, const BeamPair& pair, double d_over_lambda) {
    const auto u = steering_vector(channel.h.rows(), pair.phi, d_over_lambda);
    const auto v = steering_vector(channel.h.cols(), pair.theta, d_over_lambda);
    Complex acc{};
    for (std::size_t r = 0; r < channel.h.rows(); ++r) {
        const auto row = channel.h.row(r);
        Complex hv{};
        for (std::size_t t = 0; t < row.size(); ++t) hv += row[t] * v[t];
        acc += std::conj(u[r]) * hv;
    }
    return acc;
}

Complex measure_complex(const ChannelRealization& channel, const BeamPair& pair, const ChannelParams& params,
                        Rng& rng) {
    const Complex signal = std::sqrt(params.p_t) * beam_response(channel, pair, params.d_over_lambda);
    // u^H w with unit-norm u and w ~ CN(0, sigma_n^2 I) is a single CN(0, sigma_n^2) draw,
    // but the full vector is drawn so the combining is literal.
    const auto u = steering_vector(channel.h.rows(), pair.phi, params.d_over_lambda);
    const auto w = sample_complex_gaussian(rng, channel.h.rows(), params.sigma_n_sq);
    return signal + dot<Complex>(u, w);
}

double measure_rss(const ChannelRealization& channel, const BeamPair& pair, const ChannelParams& params, Rng& rng) {
    return std::norm(measure_complex(channel, pair, params, rng));
}

double beamforming_gain(const ChannelRealization& channel, const BeamPair& pair, double d_over_lambda) {
    return std::norm(beam_response(channel, pair, d_over_lambda));
}

double spectral_efficiency(double gain, const ChannelParams& params) {
    if (gain < 0.0) throw std::invalid_argument("spectral_efficiency: negative gain");
    if (params.sigma_n_sq == 0.0) return gain > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    return std::log2(1.0 + params.p_t * gain / params.sigma_n_sq);
}

double RssProbe::rss(const BeamPair& pair) {
    ++count_;
    return measure_rss(channel_, pair, params_, rng_);
}

Complex RssProbe::complex_sample(const BeamPair& pair) {
    ++count_;
    return measure_complex(channel_, pair, params_, rng_);
}

}  // namespace beamalign
