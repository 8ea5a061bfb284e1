#pragma once

// Distance-ratio least squares: particle swarm search for a starting point,
// then Levenberg-Marquardt refinement inside the search bounds.

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rfseeker/channel.hpp"
#include "rfseeker/core.hpp"
#include "rfseeker/kernels.hpp"

namespace rfseek {

struct PsoConfig {
    int swarm_size = 60;
    double inertia = 0.72;
    double c1 = 1.49;
    double c2 = 1.49;
    int max_iters = 150;
    /// Per-axis velocity limit as a fraction of the bounds extent.
    double velocity_clamp = 0.2;
    /// Global-best improvements at or below this count as a stall.
    double convergence_tol = 1e-12;
    int stall_iters = 30;

    void validate() const;
    friend bool operator==(const PsoConfig&, const PsoConfig&) = default;
};

struct LmConfig {
    double lambda_init = 1e-3;
    /// Applied on rejected steps; must be > 1.
    double lambda_up = 10.0;
    /// Applied on accepted steps; must lie in (0, 1).
    double lambda_down = 0.1;
    double step_tol = 1e-6;
    int max_iters = 100;

    void validate() const;
    friend bool operator==(const LmConfig&, const LmConfig&) = default;
};

inline constexpr double kLambdaMin = 1e-12;
inline constexpr double kLambdaMax = 1e12;

/// Sample positions of one solve and the ratios measured along them.
class RatioObjective {
public:
    RatioObjective(std::vector<Position> positions, RatioArray ratios, double d_min);

    /// Builds the ratio array from raw samples.
    [[nodiscard]] static RatioObjective from_samples(std::span<const RssiSample> samples,
                                                     double kappa, double d_min);

    [[nodiscard]] const std::vector<Position>& positions() const noexcept { return positions_; }
    [[nodiscard]] const RatioArray& ratios() const noexcept { return ratios_; }
    [[nodiscard]] double d_min() const noexcept { return d_min_; }
    [[nodiscard]] std::size_t residual_count() const noexcept { return ratios_.ratios.size(); }
    [[nodiscard]] kernels::RatioProblemView view() const noexcept;

private:
    std::vector<Position> positions_;
    RatioArray ratios_;
    double d_min_;
    std::vector<double> xs_, ys_, zs_;
};

struct SolverResult {
    Position estimate;
    double objective = 0.0;
    int pso_iters = 0;
    int lm_iters = 0;
    bool converged = false;
    /// Global-best fitness after initialization and after every swarm iteration.
    std::vector<double> pso_history;
    /// Objective at the start point and after every accepted LM step.
    std::vector<double> lm_history;
    /// Damping factor after every LM iteration.
    std::vector<double> lm_lambdas;
};

/// r[j-1] = d_0(x) / d_j(x) - ratios[j-1].
[[nodiscard]] std::vector<double> residuals(const Position& candidate, const RatioObjective& obj);

/// Sum of squared residuals.
[[nodiscard]] double fitness(const Position& candidate, const RatioObjective& obj);

using Jacobian = Eigen::Matrix<double, Eigen::Dynamic, 3>;

/// Analytic d r / d x. Partials through a clamped distance are zero.
[[nodiscard]] Jacobian lm_jacobian(const Position& candidate, const RatioObjective& obj);

[[nodiscard]] SolverResult pso_minimize(const RatioObjective& obj, const Roi& bounds,
                                        const PsoConfig& cfg, RngStream& rng);

/// LM from x0. With bounds, every trial point is projected into them and axes
/// pinned at a bound (or with zero extent) are held fixed for that step.
[[nodiscard]] SolverResult lm_refine(const Position& x0, const RatioObjective& obj,
                                     const LmConfig& cfg,
                                     const std::optional<Roi>& bounds = std::nullopt);

[[nodiscard]] SolverResult pso_lm_localize(const RatioObjective& obj, const Roi& bounds,
                                           const PsoConfig& pso, const LmConfig& lm,
                                           RngStream& rng);

}  // namespace rfseek
