#pragma once

// Shared geometry, metrics, errors and the seeded random stream.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>

namespace rfseek {

/// Raised when a caller breaks a documented precondition.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when there are too few samples for the requested computation.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when the sample geometry cannot constrain a solution.
class DegenerateGeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point in meters. Used for UAV samples, waypoints, sources and estimates.
struct Position {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    [[nodiscard]] bool finite() const noexcept;

    friend Position operator+(const Position& a, const Position& b) noexcept {
        return {a.x + b.x, a.y + b.y, a.z + b.z};
    }
    friend Position operator-(const Position& a, const Position& b) noexcept {
        return {a.x - b.x, a.y - b.y, a.z - b.z};
    }
    friend Position operator*(double s, const Position& p) noexcept {
        return {s * p.x, s * p.y, s * p.z};
    }
    friend bool operator==(const Position&, const Position&) = default;
};

[[nodiscard]] double distance(const Position& p, const Position& q);

/// Distance between the ground footprints of two points.
[[nodiscard]] double horizontal_distance(const Position& p, const Position& q) noexcept;

/// Root mean square of a non-empty list of errors.
[[nodiscard]] double rmse(std::span<const double> errors);

/// Axis-aligned region of interest. The z range doubles as the source search band;
/// z_min == z_max pins the search to a single altitude.
struct Roi {
    double x_min = 0.0;
    double x_max = 1250.0;
    double y_min = 0.0;
    double y_max = 1250.0;
    double z_min = 0.0;
    double z_max = 0.0;

    void validate() const;
    [[nodiscard]] bool contains(const Position& p) const noexcept;
    [[nodiscard]] bool contains_footprint(const Position& p) const noexcept;
    [[nodiscard]] Position clamp(const Position& p) const noexcept;
    [[nodiscard]] double lower(int axis) const noexcept;
    [[nodiscard]] double upper(int axis) const noexcept;
    [[nodiscard]] double extent(int axis) const noexcept { return upper(axis) - lower(axis); }

    friend bool operator==(const Roi&, const Roi&) = default;
};

/// Folds a coordinate back into [lo, hi] by mirror reflection at the walls.
[[nodiscard]] double reflect_into(double v, double lo, double hi) noexcept;

struct MissionConfig {
    Position start{100.0, 100.0, 100.0};
    double leg_length = 100.0;
    double sample_spacing = 10.0;
    int max_iterations = 15;
    double termination_epsilon = 2.0;

    void validate() const;

    friend bool operator==(const MissionConfig&, const MissionConfig&) = default;
};

/// Seeded pseudo-random stream. The engine is mt19937_64 and the variate
/// transforms are implemented here, so sequences do not depend on the
/// standard library's distribution implementations.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    /// Stream keyed by a master seed and an ordered list of integer keys.
    [[nodiscard]] static RngStream derive(std::uint64_t master_seed,
                                          std::initializer_list<std::uint64_t> keys);

    [[nodiscard]] std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    [[nodiscard]] double uniform();
    [[nodiscard]] double uniform(double lo, double hi);
    /// Standard normal variate (Box-Muller, spare value cached).
    [[nodiscard]] double normal();
    /// Uniform index in [0, n).
    [[nodiscard]] std::uint64_t index(std::uint64_t n);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finalizer; used to fold keys into derived seeds.
[[nodiscard]] std::uint64_t mix64(std::uint64_t v) noexcept;

/// Stable 64-bit key for a string (FNV-1a).
[[nodiscard]] std::uint64_t string_key(std::string_view s) noexcept;

}  // namespace rfseek
