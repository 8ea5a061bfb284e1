#pragma once

// Progressive localization: fly a leg, solve it, fuse, steer toward the fused
// estimate, repeat.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rfseeker/channel.hpp"
#include "rfseeker/core.hpp"
#include "rfseeker/fusion.hpp"
#include "rfseeker/solver.hpp"

namespace rfseek {

struct Scenario {
    std::string id = "scenario";
    /// Footprint the UAV flies in; its z range is the source search band.
    Roi roi;
    Position source{625.0, 625.0, 0.0};
    ChannelParams channel;
    MissionConfig mission;

    void validate() const;
    friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct LocalizerConfig {
    PsoConfig pso;
    LmConfig lm;
    ConfidenceConfig confidence;
    double p0 = 2500.0;
    /// Process noise added per iteration (m^2).
    double q = 2500.0;
    /// Legs pooled into each solve: the current one plus window_legs - 1
    /// predecessors.
    int window_legs = 5;

    void validate() const;
    friend bool operator==(const LocalizerConfig&, const LocalizerConfig&) = default;
};

struct IterationRecord {
    int index = 0;
    Position leg_start;
    Position leg_end;
    std::vector<RssiSample> samples;
    Position preliminary;
    double confidence = 1.0;
    Position fused;
    double covariance_trace = 0.0;
    /// Distance from the fused estimate to the true source.
    double error = 0.0;
    double objective = 0.0;
    bool solver_converged = false;
};

enum class Termination { max_iters, step_converged, reached_estimate };

[[nodiscard]] std::string_view termination_name(Termination t) noexcept;
[[nodiscard]] Termination parse_termination(std::string_view name);

struct LocalizationTrace {
    std::string scenario_id;
    Position source;
    std::vector<IterationRecord> iterations;
    Position final_estimate;
    double final_error = 0.0;
    Termination terminated_by = Termination::max_iters;

    [[nodiscard]] std::size_t total_samples() const noexcept;
};

/// End of the first leg: distance L at a uniformly random heading, same
/// altitude, folded back into the ROI footprint if it would leave it.
[[nodiscard]] Position initial_leg(const Position& start, double leg_length, const Roi& roi,
                                   RngStream& rng);

/// Next waypoint: L toward the estimate's footprint, stopping above it when it
/// is closer than L. A zero horizontal offset falls back to a random heading.
[[nodiscard]] Position next_leg(const Position& current, const Position& fused_estimate,
                                double leg_length, const Roi& roi, RngStream& rng);

/// Samples at inclusive, evenly spaced points from `from` to `to`.
[[nodiscard]] std::vector<RssiSample> sample_leg(const Position& from, const Position& to,
                                                 double spacing, const ChannelParams& channel,
                                                 const Position& source, RngStream& rng);

[[nodiscard]] std::optional<Termination> check_termination(const LocalizationTrace& trace,
                                                           const MissionConfig& mission);

[[nodiscard]] LocalizationTrace run_localization(const Scenario& scenario,
                                                 const LocalizerConfig& cfg, RngStream& rng);

/// Trace as two CSV files: one row per iteration, one row per sample.
void write_trace(const LocalizationTrace& trace, const std::string& iterations_path,
                 const std::string& samples_path);

[[nodiscard]] LocalizationTrace read_trace(const std::string& iterations_path,
                                           const std::string& samples_path);

}  // namespace rfseek
