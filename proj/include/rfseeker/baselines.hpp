#pragma once

// Comparison methods that see a fixed, pre-planned set of samples.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "rfseeker/channel.hpp"
#include "rfseeker/core.hpp"
#include "rfseeker/solver.hpp"

namespace rfseek {

enum class BaselineMethod { single_shot_pso_lm, trilateration, weighted_centroid };

[[nodiscard]] std::string_view baseline_name(BaselineMethod m) noexcept;
[[nodiscard]] std::optional<BaselineMethod> parse_baseline(std::string_view name) noexcept;

struct TrilaterationConfig {
    int max_triples = 200;
    void validate() const;
    friend bool operator==(const TrilaterationConfig&, const TrilaterationConfig&) = default;
};

struct CentroidConfig {
    int iterations = 5;
    void validate() const;
    friend bool operator==(const CentroidConfig&, const CentroidConfig&) = default;
};

/// One PSO-LM solve over all samples, ratios anchored at the first sample.
[[nodiscard]] Position single_shot_pso_lm(std::span<const RssiSample> samples,
                                          const ChannelParams& channel, const Roi& bounds,
                                          const PsoConfig& pso, const LmConfig& lm,
                                          RngStream& rng);

/// Ratio trilateration over sample triples.
///
/// Each triple (i, j, k) gives two Apollonius spheres d_i = rho_ij d_j and
/// d_i = rho_ik d_k. Eliminating |x|^2 between them leaves a plane; cutting it
/// with the horizontal plane at the bottom of the search band gives a line,
/// along which the sphere residual is minimized by a 1-D search. Of the (up
/// to two) roots of a triple, the one that better fits the ratios of all
/// samples is kept, and the per-triple points are reduced to their
/// geometric median. Throws DegenerateGeometryError if no triple is usable.
[[nodiscard]] Position trilateration(std::span<const RssiSample> samples, double kappa,
                                     const Roi& bounds, RngStream& rng,
                                     const TrilaterationConfig& cfg = {});

/// Iterative weighted centroid. Initial weights 10^(R/kappa); each round
/// multiplies them by 1 / (distance to the current centroid + d_min). The
/// altitude is the mean sample altitude projected into the search band.
[[nodiscard]] Position weighted_centroid(std::span<const RssiSample> samples, double kappa,
                                         int iterations, const Roi& bounds, double d_min = 1.0);

/// Weiszfeld geometric median.
[[nodiscard]] Position geometric_median(std::span<const Position> points);

/// `count` points `spacing` apart along the straight line from `start`
/// through `heading_point`, folded back into the ROI footprint at its walls.
[[nodiscard]] std::vector<Position> continuation_path(const Position& start,
                                                      const Position& heading_point,
                                                      double spacing, std::size_t count,
                                                      const Roi& roi);

}  // namespace rfseek
