#pragma once

// Altitude-dependent close-in path-loss model, RSSI synthesis and the
// RSSI-difference to distance-ratio transform.

#include <cstddef>
#include <span>
#include <vector>

#include "rfseeker/core.hpp"

namespace rfseek {

struct ChannelParams {
    double carrier_ghz = 2.45;
    double a = 2.772;
    double b = -0.04724;
    double uav_altitude = 100.0;
    /// Received power at 1 m in dBm; absorbs the emitter's power coefficient.
    double tx_power_offset = -30.0;
    /// Shadow-fading standard deviation in dB.
    double sigma = 0.0;
    /// Distances below this are clamped before any log is taken.
    double d_min = 1.0;

    void validate() const;

    friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

/// Path-loss slope 10 * A * h^B (dB per decade of distance).
[[nodiscard]] double kappa(const ChannelParams& params);

/// Deterministic part of the path loss in dB at distance d.
[[nodiscard]] double path_loss(const ChannelParams& params, double d);

struct RssiSample {
    Position position;
    double rssi = 0.0;  // dBm

    friend bool operator==(const RssiSample&, const RssiSample&) = default;
};

/// One noisy RSSI reading of `source` taken at `at`. Always consumes one
/// normal variate so streams stay aligned across noise levels.
[[nodiscard]] RssiSample synth_rssi(const ChannelParams& params, const Position& source,
                                    const Position& at, RngStream& rng);

/// Shadowing std for an SNR in dB: sigma_ref at 0 dB, scaled by 10^(-snr/20).
/// An infinite SNR maps to a noiseless channel.
[[nodiscard]] double sigma_for_snr(double snr_db, double sigma_ref);

/// d_i / d_j implied by two RSSI readings: 10^((r_j - r_i) / kappa).
[[nodiscard]] double distance_ratio(double r_i, double r_j, double kappa);

/// Distance ratios of one leg, anchored at its first sample:
/// ratios[j-1] = d_anchor / d_j for j = 1..n-1.
struct RatioArray {
    std::size_t anchor_index = 0;
    std::vector<double> ratios;
};

[[nodiscard]] RatioArray ratio_array(std::span<const RssiSample> samples, double kappa);

}  // namespace rfseek
