#include "rfseeker/core.hpp"

#include <cmath>
#include <numbers>

namespace rfseek {

bool Position::finite() const noexcept {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
}

double distance(const Position& p, const Position& q) {
    const double dx = p.x - q.x;
    const double dy = p.y - q.y;
    const double dz = p.z - q.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double horizontal_distance(const Position& p, const Position& q) noexcept {
    return std::hypot(p.x - q.x, p.y - q.y);
}

double rmse(std::span<const double> errors) {
    if (errors.empty()) {
        throw ContractError("rmse: empty error list");
    }
    double sum = 0.0;
    for (double e : errors) {
        if (!std::isfinite(e) || e < 0.0) {
            throw ContractError("rmse: errors must be finite and non-negative");
        }
        sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(errors.size()));
}

void Roi::validate() const {
    if (!(std::isfinite(x_min) && std::isfinite(x_max) && std::isfinite(y_min) &&
          std::isfinite(y_max) && std::isfinite(z_min) && std::isfinite(z_max))) {
        throw ContractError("roi: bounds must be finite");
    }
    if (!(x_min < x_max)) throw ContractError("roi: x_min must be < x_max");
    if (!(y_min < y_max)) throw ContractError("roi: y_min must be < y_max");
    if (!(z_min <= z_max)) throw ContractError("roi: z_min must be <= z_max");
}

bool Roi::contains(const Position& p) const noexcept {
    return contains_footprint(p) && p.z >= z_min && p.z <= z_max;
}

bool Roi::contains_footprint(const Position& p) const noexcept {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
}

Position Roi::clamp(const Position& p) const noexcept {
    return {std::clamp(p.x, x_min, x_max), std::clamp(p.y, y_min, y_max),
            std::clamp(p.z, z_min, z_max)};
}

double Roi::lower(int axis) const noexcept {
    return axis == 0 ? x_min : axis == 1 ? y_min : z_min;
}

double Roi::upper(int axis) const noexcept {
    return axis == 0 ? x_max : axis == 1 ? y_max : z_max;
}

double reflect_into(double v, double lo, double hi) noexcept {
    const double span = hi - lo;
    if (!(span > 0.0)) return lo;
    // Triangle wave with period 2*span.
    double t = std::fmod(v - lo, 2.0 * span);
    if (t < 0.0) t += 2.0 * span;
    return t <= span ? lo + t : lo + 2.0 * span - t;
}

void MissionConfig::validate() const {
    if (!start.finite()) throw ContractError("mission.start: must be finite");
    if (!(leg_length > 0.0)) throw ContractError("mission.leg_length: must be > 0");
    if (!(sample_spacing > 0.0 && sample_spacing <= leg_length)) {
        throw ContractError("mission.sample_spacing: must satisfy 0 < spacing <= leg_length");
    }
    const double steps = leg_length / sample_spacing;
    if (std::abs(steps - std::round(steps)) > 1e-6) {
        throw ContractError("mission.leg_length: must be an integer multiple of sample_spacing");
    }
    if (max_iterations < 1) throw ContractError("mission.max_iterations: must be >= 1");
    if (!(termination_epsilon >= 0.0)) {
        throw ContractError("mission.termination_epsilon: must be >= 0");
    }
}

std::uint64_t mix64(std::uint64_t v) noexcept {
    v += 0x9e3779b97f4a7c15ULL;
    v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
    v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
    return v ^ (v >> 31);
}

std::uint64_t string_key(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

RngStream RngStream::derive(std::uint64_t master_seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = mix64(master_seed);
    for (std::uint64_t k : keys) {
        h = mix64(h ^ mix64(k));
    }
    return RngStream(h);
}

double RngStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::uint64_t RngStream::index(std::uint64_t n) {
    if (n == 0) throw ContractError("RngStream::index: n must be > 0");
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
}

}  // namespace rfseek
