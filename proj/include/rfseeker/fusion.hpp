#pragma once

// Confidence of a leg's RSSI differentials under the Gaussian shadowing model,
// and the confidence-weighted Kalman fusion of per-leg estimates.

#include <span>

#include <Eigen/Core>

#include "rfseeker/channel.hpp"
#include "rfseeker/core.hpp"

namespace rfseek {

enum class ConfidenceMode {
    /// 2 * (1 - Phi(|z|)): 1 at perfect agreement, falling with |z|.
    symmetric,
    /// Phi(z) exactly as the one-sided formula reads.
    verbatim,
};

/// Which position stands in for the unknown source when predicting the
/// RSSI differences of a leg.
enum class ConfidenceReference {
    /// The leg's own preliminary estimate.
    preliminary,
    /// The previous fused estimate (the preliminary one on the first leg).
    prior,
};

struct ConfidenceConfig {
    ConfidenceMode mode = ConfidenceMode::symmetric;
    ConfidenceReference reference = ConfidenceReference::preliminary;
    /// Shadowing std (dB) used in the z-score. With track_channel set, the
    /// localizer uses max(channel sigma, sigma) instead, so this acts as a
    /// floor for noiseless channels.
    double sigma = 0.1;
    bool track_channel = true;
    /// Lower bound applied to a leg confidence before it scales the noise.
    double floor = 1e-3;

    void validate() const;
    friend bool operator==(const ConfidenceConfig&, const ConfidenceConfig&) = default;
};

[[nodiscard]] double std_normal_cdf(double x);

[[nodiscard]] double pair_confidence(double delta_measured, double delta_predicted, double sigma,
                                     ConfidenceMode mode = ConfidenceMode::symmetric);

/// -kappa * log10(d_i / d_j) with both distances measured from `estimate`.
[[nodiscard]] double predicted_delta(const Position& p_i, const Position& p_j,
                                     const Position& estimate, double kappa, double d_min = 1.0);

/// Mean pair confidence over (first sample, sample t) for t = 1..n-1.
[[nodiscard]] double segment_confidence(std::span<const RssiSample> samples,
                                        const Position& estimate, double kappa,
                                        const ConfidenceConfig& cfg, double d_min = 1.0);

struct FusionState {
    Position mean;
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity();
    /// Reference measurement noise (m^2); a leg with confidence l gets p0 / l.
    double p0 = 2500.0;
    /// Process noise added per fusion step (m^2).
    double q = 2500.0;

    void validate() const;
};

[[nodiscard]] FusionState kf_init(const Position& first_estimate, double l, double p0, double q);

/// Predict with F = I (adding q I), then update with H = I and R = (p0 / l) I.
[[nodiscard]] FusionState kf_update(const FusionState& state, const Position& measurement,
                                    double l);

}  // namespace rfseek
