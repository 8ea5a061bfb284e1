#pragma once

// Monte Carlo runner: progressive localization against the baselines over an
// SNR sweep, with per-trial RNG streams and CSV output.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfseeker/baselines.hpp"
#include "rfseeker/localizer.hpp"

namespace rfseek {

inline constexpr std::string_view kProgressive = "progressive";

enum class SourceMode { random, fixed };

[[nodiscard]] std::string_view source_mode_name(SourceMode m) noexcept;

struct ExperimentConfig {
    Scenario scenario;
    /// random: source redrawn uniformly in the ROI footprint per trial, at
    /// z = roi.z_min. fixed: scenario.source for every trial.
    SourceMode source_mode = SourceMode::random;
    LocalizerConfig localizer;
    TrilaterationConfig trilateration;
    CentroidConfig centroid;

    std::vector<std::string> methods{"progressive", "single_shot_pso_lm", "trilateration",
                                     "weighted_centroid"};
    /// Noise levels in dB SNR; +inf means a noiseless channel.
    std::vector<double> snr_sweep{0.0, 10.0, 20.0, std::numeric_limits<double>::infinity()};
    /// Shadowing std at 0 dB SNR.
    double sigma_ref = 4.0;
    /// Iterations at which the baselines are evaluated, each with the sample
    /// budget the progressive run had consumed by then.
    std::vector<int> iteration_caps{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
    int trials = 100;
    std::uint64_t master_seed = 1;
    std::string output_dir = "out";
    /// Worker threads; 0 picks the hardware concurrency.
    int threads = 0;

    void validate() const;
    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

struct RawRow {
    std::string method;
    double snr_db = 0.0;
    int iteration = 0;
    int trial = 0;
    double error_m = 0.0;

    friend bool operator==(const RawRow&, const RawRow&) = default;
};

struct RmseRow {
    std::string method;
    double snr_db = 0.0;
    int iteration = 0;
    double rmse_m = 0.0;
    int trials = 0;

    friend bool operator==(const RmseRow&, const RmseRow&) = default;
};

struct ExperimentReport {
    std::vector<RawRow> raw;
    std::vector<RmseRow> rmse;
    /// One progressive run (trial 0 at the last SNR of the sweep) for plotting.
    std::optional<LocalizationTrace> trajectory;
    /// Method failures that were dropped from the tables, as "method snr trial: what".
    std::vector<std::string> failures;
};

/// Source position of a trial.
[[nodiscard]] Position trial_source(const ExperimentConfig& cfg, int trial);

/// Stream for one (snr index, method, trial) cell; `sub` separates the
/// baseline evaluations at different iteration caps.
[[nodiscard]] RngStream cell_stream(std::uint64_t master_seed, std::size_t snr_index,
                                    std::string_view method, int trial, std::uint64_t sub = 0);

/// Samples the baselines see: a straight line from A0 through the progressive
/// run's first waypoint, at the mission spacing, folded at the ROI walls.
[[nodiscard]] std::vector<RssiSample> baseline_samples(const LocalizationTrace& progressive,
                                                       std::size_t count,
                                                       const Scenario& scenario,
                                                       RngStream& rng);

/// Samples consumed by the first `iterations` legs of a trace.
[[nodiscard]] std::size_t samples_through(const LocalizationTrace& trace, int iterations);

/// Runs one baseline on a sample set.
[[nodiscard]] Position run_baseline(BaselineMethod method, std::span<const RssiSample> samples,
                                    const ExperimentConfig& cfg, const ChannelParams& channel,
                                    RngStream& rng);

/// Aggregates raw rows into RMSE rows, one per (method, snr, iteration) in
/// first-appearance order.
[[nodiscard]] std::vector<RmseRow> aggregate(const std::vector<RawRow>& raw);

[[nodiscard]] ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Writes raw.csv and rmse.csv into `dir` (created if missing).
void emit_csv(const ExperimentReport& report, const std::string& dir);

/// Reads raw.csv and rmse.csv back from `dir`.
[[nodiscard]] ExperimentReport read_csv(const std::string& dir);

/// Writes one row per iteration: waypoint, fused estimate and its error.
void emit_trajectory(const LocalizationTrace& trace, const std::string& path);

}  // namespace rfseek
