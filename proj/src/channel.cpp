#include "rfseeker/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rfseek {

void ChannelParams::validate() const {
    if (!(carrier_ghz > 0.0)) throw ContractError("channel.carrier_ghz: must be > 0");
    if (!(uav_altitude > 0.0)) throw ContractError("channel.uav_altitude: must be > 0");
    if (!(sigma >= 0.0)) throw ContractError("channel.sigma: must be >= 0");
    if (!(d_min > 0.0)) throw ContractError("channel.d_min: must be > 0");
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(tx_power_offset) ||
        !std::isfinite(sigma) || !std::isfinite(d_min)) {
        throw ContractError("channel: parameters must be finite");
    }
    const double k = 10.0 * a * std::pow(uav_altitude, b);
    if (!(std::isfinite(k) && k > 0.0)) {
        throw ContractError("channel: derived kappa must be finite and > 0");
    }
}

double kappa(const ChannelParams& params) {
    params.validate();
    return 10.0 * params.a * std::pow(params.uav_altitude, params.b);
}

double path_loss(const ChannelParams& params, double d) {
    const double k = kappa(params);
    return 32.4 + 20.0 * std::log10(params.carrier_ghz) +
           k * std::log10(std::max(d, params.d_min));
}

RssiSample synth_rssi(const ChannelParams& params, const Position& source, const Position& at,
                      RngStream& rng) {
    const double k = kappa(params);
    const double d = std::max(distance(source, at), params.d_min);
    const double shadow = params.sigma * rng.normal();
    return {at, params.tx_power_offset - k * std::log10(d) - shadow};
}

double sigma_for_snr(double snr_db, double sigma_ref) {
    if (!(sigma_ref > 0.0)) throw ContractError("sigma_for_snr: sigma_ref must be > 0");
    if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
    if (!std::isfinite(snr_db)) throw ContractError("sigma_for_snr: snr must be finite or +inf");
    return sigma_ref * std::pow(10.0, -snr_db / 20.0);
}

double distance_ratio(double r_i, double r_j, double kappa) {
    if (!(kappa > 0.0)) throw ContractError("distance_ratio: kappa must be > 0");
    return std::pow(10.0, (r_j - r_i) / kappa);
}

RatioArray ratio_array(std::span<const RssiSample> samples, double kappa) {
    if (samples.size() < 3) {
        throw InsufficientDataError("ratio_array: need at least 3 samples, got " +
                                    std::to_string(samples.size()));
    }
    RatioArray out;
    out.anchor_index = 0;
    out.ratios.reserve(samples.size() - 1);
    const double anchor = samples.front().rssi;
    for (std::size_t j = 1; j < samples.size(); ++j) {
        out.ratios.push_back(distance_ratio(anchor, samples[j].rssi, kappa));
    }
    return out;
}

}  // namespace rfseek
