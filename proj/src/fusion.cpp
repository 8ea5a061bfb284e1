#include "rfseeker/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

namespace rfseek {

void ConfidenceConfig::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ContractError("confidence.sigma: must be finite and > 0");
    }
    if (!(floor > 0.0 && floor <= 1.0)) throw ContractError("confidence.floor: must be in (0, 1]");
}

double std_normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double pair_confidence(double delta_measured, double delta_predicted, double sigma,
                       ConfidenceMode mode) {
    if (!(sigma > 0.0)) throw ContractError("pair_confidence: sigma must be > 0");
    const double z = (delta_measured - delta_predicted) / (std::numbers::sqrt2 * sigma);
    if (mode == ConfidenceMode::verbatim) return std_normal_cdf(z);
    // 2 * (1 - Phi(|z|)) == erfc(|z| / sqrt 2), without cancellation in the tail.
    return std::erfc(std::abs(z) / std::numbers::sqrt2);
}

double predicted_delta(const Position& p_i, const Position& p_j, const Position& estimate,
                       double kappa, double d_min) {
    const double d_i = std::max(distance(p_i, estimate), d_min);
    const double d_j = std::max(distance(p_j, estimate), d_min);
    return -kappa * std::log10(d_i / d_j);
}

double segment_confidence(std::span<const RssiSample> samples, const Position& estimate,
                          double kappa, const ConfidenceConfig& cfg, double d_min) {
    cfg.validate();
    if (samples.size() < 2) {
        throw InsufficientDataError("segment_confidence: need at least 2 samples");
    }
    const RssiSample& anchor = samples.front();
    double sum = 0.0;
    for (std::size_t t = 1; t < samples.size(); ++t) {
        const double measured = anchor.rssi - samples[t].rssi;
        const double predicted =
            predicted_delta(anchor.position, samples[t].position, estimate, kappa, d_min);
        sum += pair_confidence(measured, predicted, cfg.sigma, cfg.mode);
    }
    const double mean = sum / static_cast<double>(samples.size() - 1);
    // Keep the result strictly positive even if every tail underflowed.
    return std::max(mean, std::numeric_limits<double>::min());
}

void FusionState::validate() const {
    if (!mean.finite()) throw ContractError("FusionState: mean must be finite");
    if (!(p0 > 0.0)) throw ContractError("FusionState: p0 must be > 0");
    if (!(q >= 0.0)) throw ContractError("FusionState: q must be >= 0");
    if (!covariance.allFinite()) throw ContractError("FusionState: covariance must be finite");
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() >
        1e-12 * std::max(1.0, covariance.cwiseAbs().maxCoeff())) {
        throw ContractError("FusionState: covariance must be symmetric");
    }
}

FusionState kf_init(const Position& first_estimate, double l, double p0, double q) {
    if (!(l > 0.0 && l <= 1.0)) throw ContractError("kf_init: confidence must be in (0, 1]");
    if (!(p0 > 0.0)) throw ContractError("kf_init: p0 must be > 0");
    if (!(q >= 0.0)) throw ContractError("kf_init: q must be >= 0");
    FusionState s;
    s.mean = first_estimate;
    s.covariance = (p0 / l) * Eigen::Matrix3d::Identity();
    s.p0 = p0;
    s.q = q;
    return s;
}

FusionState kf_update(const FusionState& state, const Position& measurement, double l) {
    if (!(l > 0.0 && l <= 1.0)) throw ContractError("kf_update: confidence must be in (0, 1]");
    state.validate();
    const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity();
    const Eigen::Matrix3d predicted = state.covariance + state.q * eye;
    const Eigen::Matrix3d noise = (state.p0 / l) * eye;
    const Eigen::Matrix3d gain = predicted * (predicted + noise).inverse();

    const Eigen::Vector3d prior(state.mean.x, state.mean.y, state.mean.z);
    const Eigen::Vector3d z(measurement.x, measurement.y, measurement.z);
    const Eigen::Vector3d posterior = prior + gain * (z - prior);

    Eigen::Matrix3d cov = (eye - gain) * predicted;
    cov = 0.5 * (cov + cov.transpose());

    FusionState out = state;
    out.mean = {posterior[0], posterior[1], posterior[2]};
    out.covariance = cov;
    return out;
}

}  // namespace rfseek
