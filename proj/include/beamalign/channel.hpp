#pragma once

#include <cstddef>
#include <numbers>
#include <vector>

#include "beamalign/numerics.hpp"

namespace beamalign {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

/// Array geometry, propagation statistics and link budget of one TX/RX link.
struct ChannelParams {
    std::size_t n_tx = 64;
    std::size_t n_rx = 16;
    std::size_t n_paths = 5;
    double d_over_lambda = 0.5;
    double sigma_a_sq = 1.0;
    double p_t = 1.0;
    double sigma_n_sq = 1.0;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;

    /// P_t * sigma_a^2 / sigma_n^2 (infinite when noiseless).
    double snr_linear() const;

    /// Sets sigma_n^2 = P_t * sigma_a^2 / 10^(snr_db / 10).
    ChannelParams with_snr_db(double snr_db) const;
};

/// Point in the beam search domain [-pi/2, pi/2]^2; theta is the AoD, phi the AoA.
struct BeamPair {
    double theta = 0.0;
    double phi = 0.0;

    bool in_domain() const { return theta >= -kHalfPi && theta <= kHalfPi && phi >= -kHalfPi && phi <= kHalfPi; }
    friend bool operator==(const BeamPair&, const BeamPair&) = default;
};

struct PathComponent {
    Complex alpha;
    double theta = 0.0;  // AoD
    double phi = 0.0;    // AoA
};

struct ChannelRealization {
    ComplexMatrix h;  // n_rx x n_tx
    std::vector<PathComponent> paths;

    /// Builds H = sqrt(N_t N_r / L) sum_l alpha_l a_r(phi_l) a_t(theta_l)^H.
    static ChannelRealization from_paths(const ChannelParams& params, std::vector<PathComponent> paths);
};

/// DFT-style beam codebook: g steering vectors at spatial angles -1 + 2i/g.
struct Codebook {
    std::size_t n_antennas = 0;
    std::vector<double> spatial_angles;
    ComplexMatrix columns;  // n_antennas x g

    std::size_t size() const noexcept { return spatial_angles.size(); }
    /// Physical angle (radians) of beam i.
    double angle(std::size_t i) const;
    ComplexVector beam(std::size_t i) const { return columns.column(i); }
};

/// TX and RX codebooks used together; pair index = rx_index * tx.size() + tx_index.
struct BeamCodebooks {
    Codebook tx;
    Codebook rx;

    static BeamCodebooks build(const ChannelParams& params, std::size_t g_tx, std::size_t g_rx);

    std::size_t pair_count() const noexcept { return tx.size() * rx.size(); }
    BeamPair pair(std::size_t tx_index, std::size_t rx_index) const;
    BeamPair pair(std::size_t flat_index) const;
    /// Every TX x RX cross point, in flat-index order.
    std::vector<BeamPair> cross_grid() const;
};

/// Unit-norm ULA response: entry k = exp(j 2 pi (d/lambda) k sin(angle)) / sqrt(n).
ComplexVector steering_vector(std::size_t n, double angle, double d_over_lambda);

ChannelRealization draw_channel(Rng& rng, const ChannelParams& params);

Codebook build_codebook(std::size_t n, std::size_t g, double d_over_lambda);

/// Noise-free combined response u^H H v for u = a_r(phi), v = a_t(theta).
Complex beam_response(const ChannelRealization& channel, const BeamPair& pair, double d_over_lambda);

/// One noisy complex observation sqrt(P_t) u^H H v + u^H w, with w ~ CN(0, sigma_n^2 I).
Complex measure_complex(const ChannelRealization& channel, const BeamPair& pair, const ChannelParams& params,
                        Rng& rng);

/// |measure_complex|^2, the received signal strength of one probe.
double measure_rss(const ChannelRealization& channel, const BeamPair& pair, const ChannelParams& params, Rng& rng);

/// Noise-free |u^H H v|^2.
double beamforming_gain(const ChannelRealization& channel, const BeamPair& pair, double d_over_lambda);

/// log2(1 + P_t gain / sigma_n^2), bits/s/Hz.
double spectral_efficiency(double gain, const ChannelParams& params);

/// The measurement black box seen by an alignment method. Owns no state besides
/// a count of the probes issued through it.
class RssProbe {
public:
    RssProbe(const ChannelRealization& channel, const ChannelParams& params, Rng& rng)
        : channel_(channel), params_(params), rng_(rng) {}

    double rss(const BeamPair& pair);
    Complex complex_sample(const BeamPair& pair);

    std::size_t count() const noexcept { return count_; }
    const ChannelParams& params() const noexcept { return params_; }

private:
    const ChannelRealization& channel_;
    const ChannelParams& params_;
    Rng& rng_;
    std::size_t count_ = 0;
};

}  // namespace beamalign
