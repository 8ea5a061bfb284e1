#include "rfseeker/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>

namespace rfseek {

void PsoConfig::validate() const {
    if (swarm_size < 1) throw ContractError("pso.swarm_size: must be >= 1");
    if (!(inertia > 0.0 && inertia <= 1.0)) throw ContractError("pso.inertia: must be in (0, 1]");
    if (!(c1 > 0.0)) throw ContractError("pso.c1: must be > 0");
    if (!(c2 > 0.0)) throw ContractError("pso.c2: must be > 0");
    if (max_iters < 1) throw ContractError("pso.max_iters: must be >= 1");
    if (!(velocity_clamp > 0.0)) throw ContractError("pso.velocity_clamp: must be > 0");
    if (!(convergence_tol >= 0.0)) throw ContractError("pso.convergence_tol: must be >= 0");
    if (stall_iters < 1) throw ContractError("pso.stall_iters: must be >= 1");
}

void LmConfig::validate() const {
    if (!(lambda_init > 0.0)) throw ContractError("lm.lambda_init: must be > 0");
    if (!(lambda_up > 1.0)) throw ContractError("lm.lambda_up: must be > 1");
    if (!(lambda_down > 0.0 && lambda_down < 1.0)) {
        throw ContractError("lm.lambda_down: must be in (0, 1)");
    }
    if (!(step_tol > 0.0)) throw ContractError("lm.step_tol: must be > 0");
    if (max_iters < 1) throw ContractError("lm.max_iters: must be >= 1");
}

RatioObjective::RatioObjective(std::vector<Position> positions, RatioArray ratios, double d_min)
    : positions_(std::move(positions)), ratios_(std::move(ratios)), d_min_(d_min) {
    if (positions_.size() != ratios_.ratios.size() + 1) {
        throw ContractError("RatioObjective: positions count must equal ratios count + 1");
    }
    if (ratios_.ratios.empty()) {
        throw InsufficientDataError("RatioObjective: need at least one ratio");
    }
    if (ratios_.anchor_index != 0) {
        throw ContractError("RatioObjective: ratios must be anchored at the first sample");
    }
    if (!(d_min_ > 0.0)) throw ContractError("RatioObjective: d_min must be > 0");
    xs_.reserve(positions_.size());
    ys_.reserve(positions_.size());
    zs_.reserve(positions_.size());
    for (const auto& p : positions_) {
        xs_.push_back(p.x);
        ys_.push_back(p.y);
        zs_.push_back(p.z);
    }
}

RatioObjective RatioObjective::from_samples(std::span<const RssiSample> samples, double kappa,
                                            double d_min) {
    RatioArray ratios = ratio_array(samples, kappa);
    std::vector<Position> positions;
    positions.reserve(samples.size());
    for (const auto& s : samples) positions.push_back(s.position);
    return RatioObjective(std::move(positions), std::move(ratios), d_min);
}

kernels::RatioProblemView RatioObjective::view() const noexcept {
    return {xs_, ys_, zs_, ratios_.ratios, d_min_};
}

std::vector<double> residuals(const Position& candidate, const RatioObjective& obj) {
    const auto& pos = obj.positions();
    const auto& ratios = obj.ratios().ratios;
    const double d0 = std::max(distance(candidate, pos[0]), obj.d_min());
    std::vector<double> r(ratios.size());
    for (std::size_t j = 1; j < pos.size(); ++j) {
        const double dj = std::max(distance(candidate, pos[j]), obj.d_min());
        r[j - 1] = d0 / dj - ratios[j - 1];
    }
    return r;
}

double fitness(const Position& candidate, const RatioObjective& obj) {
    const std::array<double, 1> cx{candidate.x}, cy{candidate.y}, cz{candidate.z};
    std::array<double, 1> out{};
    kernels::ratio_fitness(obj.view(), {cx, cy, cz}, out, kernels::Isa::scalar);
    return out[0];
}

namespace {

struct ClampedDistance {
    double value;
    Eigen::RowVector3d gradient;  // zero when the clamp is active
};

ClampedDistance clamped_distance(const Position& x, const Position& anchor, double d_min) {
    const Eigen::RowVector3d diff(x.x - anchor.x, x.y - anchor.y, x.z - anchor.z);
    const double d = diff.norm();
    if (d <= d_min) return {d_min, Eigen::RowVector3d::Zero()};
    return {d, diff / d};
}

}  // namespace

Jacobian lm_jacobian(const Position& candidate, const RatioObjective& obj) {
    const auto& pos = obj.positions();
    Jacobian jac(static_cast<Eigen::Index>(pos.size() - 1), 3);
    const ClampedDistance a = clamped_distance(candidate, pos[0], obj.d_min());
    for (std::size_t j = 1; j < pos.size(); ++j) {
        const ClampedDistance b = clamped_distance(candidate, pos[j], obj.d_min());
        // d(a/b) = grad_a / b - a * grad_b / b^2
        jac.row(static_cast<Eigen::Index>(j - 1)) =
            a.gradient / b.value - (a.value / (b.value * b.value)) * b.gradient;
    }
    return jac;
}

SolverResult pso_minimize(const RatioObjective& obj, const Roi& bounds, const PsoConfig& cfg,
                          RngStream& rng) {
    bounds.validate();
    cfg.validate();
    const auto n = static_cast<std::size_t>(cfg.swarm_size);

    std::array<double, 3> lo{}, hi{}, vmax{};
    for (int a = 0; a < 3; ++a) {
        lo[a] = bounds.lower(a);
        hi[a] = bounds.upper(a);
        vmax[a] = cfg.velocity_clamp * bounds.extent(a);
    }

    // Structure-of-arrays swarm so the fitness kernel can read it directly.
    std::array<std::vector<double>, 3> x, v, best;
    for (int a = 0; a < 3; ++a) {
        x[a].resize(n);
        v[a].resize(n);
    }
    for (std::size_t t = 0; t < n; ++t) {
        for (int a = 0; a < 3; ++a) {
            x[a][t] = rng.uniform(lo[a], hi[a]);
            v[a][t] = rng.uniform(-vmax[a], vmax[a]);
        }
    }

    std::vector<double> fit(n);
    const auto view = obj.view();
    kernels::ratio_fitness(view, {x[0], x[1], x[2]}, fit);

    best = x;
    std::vector<double> best_fit = fit;
    std::size_t g = static_cast<std::size_t>(
        std::distance(best_fit.begin(), std::min_element(best_fit.begin(), best_fit.end())));

    SolverResult result;
    result.pso_history.push_back(best_fit[g]);

    int stall = 0;
    int iter = 0;
    while (iter < cfg.max_iters) {
        ++iter;
        const std::array<double, 3> gbest{best[0][g], best[1][g], best[2][g]};
        for (std::size_t t = 0; t < n; ++t) {
            for (int a = 0; a < 3; ++a) {
                const double r1 = rng.uniform();
                const double r2 = rng.uniform();
                double vel = cfg.inertia * v[a][t] + cfg.c1 * r1 * (best[a][t] - x[a][t]) +
                             cfg.c2 * r2 * (gbest[a] - x[a][t]);
                vel = std::clamp(vel, -vmax[a], vmax[a]);
                double pos = x[a][t] + vel;
                if (pos < lo[a]) {
                    pos = lo[a] + (lo[a] - pos);
                    vel = -vel;
                } else if (pos > hi[a]) {
                    pos = hi[a] - (pos - hi[a]);
                    vel = -vel;
                }
                x[a][t] = std::clamp(pos, lo[a], hi[a]);
                v[a][t] = vel;
            }
        }
        kernels::ratio_fitness(view, {x[0], x[1], x[2]}, fit);

        const double previous = best_fit[g];
        for (std::size_t t = 0; t < n; ++t) {
            if (fit[t] < best_fit[t]) {
                best_fit[t] = fit[t];
                for (int a = 0; a < 3; ++a) best[a][t] = x[a][t];
                if (fit[t] < best_fit[g]) g = t;
            }
        }
        result.pso_history.push_back(best_fit[g]);

        stall = (previous - best_fit[g] <= cfg.convergence_tol) ? stall + 1 : 0;
        if (stall >= cfg.stall_iters) {
            result.converged = true;
            break;
        }
    }

    result.estimate = {best[0][g], best[1][g], best[2][g]};
    result.objective = best_fit[g];
    result.pso_iters = iter;
    return result;
}

SolverResult lm_refine(const Position& x0, const RatioObjective& obj, const LmConfig& cfg,
                       const std::optional<Roi>& bounds) {
    cfg.validate();
    if (!x0.finite()) throw ContractError("lm_refine: start point must be finite");
    if (bounds) bounds->validate();

    SolverResult result;
    Position x = bounds ? bounds->clamp(x0) : x0;
    double f = fitness(x, obj);
    double lambda = std::clamp(cfg.lambda_init, kLambdaMin, kLambdaMax);
    result.lm_history.push_back(f);

    auto coord = [](const Position& p, int a) { return a == 0 ? p.x : a == 1 ? p.y : p.z; };

    constexpr int kMaxSolveRetries = 12;
    bool failed = false;
    int iter = 0;
    while (iter < cfg.max_iters) {
        ++iter;
        const std::vector<double> r = residuals(x, obj);
        const Eigen::Map<const Eigen::VectorXd> rv(r.data(), static_cast<Eigen::Index>(r.size()));
        Jacobian jac = lm_jacobian(x, obj);

        std::array<bool, 3> fixed{false, false, false};
        if (bounds) {
            for (int a = 0; a < 3; ++a) fixed[a] = !(bounds->extent(a) > 0.0);
        }

        Eigen::Vector3d step = Eigen::Vector3d::Zero();
        bool solved = false;
        for (int attempt = 0; attempt < kMaxSolveRetries && !solved; ++attempt) {
            // Re-solve with newly pinned axes until the active set is stable.
            for (int pass = 0; pass < 4; ++pass) {
                Jacobian jf = jac;
                for (int a = 0; a < 3; ++a) {
                    if (fixed[a]) jf.col(a).setZero();
                }
                const Eigen::Matrix3d normal =
                    jf.transpose() * jf + lambda * Eigen::Matrix3d::Identity();
                const Eigen::Vector3d grad = jf.transpose() * rv;
                const Eigen::LDLT<Eigen::Matrix3d> ldlt(normal);
                step = -ldlt.solve(grad);
                solved = ldlt.info() == Eigen::Success && step.allFinite();
                if (!solved || !bounds) break;

                bool changed = false;
                for (int a = 0; a < 3; ++a) {
                    if (fixed[a]) continue;
                    const double c = coord(x, a);
                    if ((c <= bounds->lower(a) && step[a] < 0.0) ||
                        (c >= bounds->upper(a) && step[a] > 0.0)) {
                        fixed[a] = true;
                        changed = true;
                    }
                }
                if (!changed) break;
            }
            if (!solved) lambda = std::min(lambda * cfg.lambda_up, kLambdaMax);
        }
        if (!solved) {
            failed = true;
            break;
        }

        Position trial{x.x + step[0], x.y + step[1], x.z + step[2]};
        if (bounds) trial = bounds->clamp(trial);
        const double applied = distance(trial, x);
        const double ft = applied > 0.0 ? fitness(trial, obj) : f;

        if (ft < f) {
            x = trial;
            f = ft;
            lambda = std::max(lambda * cfg.lambda_down, kLambdaMin);
            result.lm_history.push_back(f);
        } else {
            lambda = std::min(lambda * cfg.lambda_up, kLambdaMax);
        }
        result.lm_lambdas.push_back(lambda);

        if (applied < cfg.step_tol) {
            result.converged = true;
            break;
        }
    }

    result.lm_iters = iter;
    // x only ever moves on accepted steps, so a failed solve still returns the best point.
    if (failed) result.converged = false;
    result.estimate = x;
    result.objective = f;
    return result;
}

SolverResult pso_lm_localize(const RatioObjective& obj, const Roi& bounds, const PsoConfig& pso,
                             const LmConfig& lm, RngStream& rng) {
    SolverResult coarse = pso_minimize(obj, bounds, pso, rng);
    SolverResult fine = lm_refine(coarse.estimate, obj, lm, bounds);
    fine.pso_iters = coarse.pso_iters;
    fine.pso_history = std::move(coarse.pso_history);
    return fine;
}

}  // namespace rfseek
