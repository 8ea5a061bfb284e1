#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rfseeker/solver.hpp"

using namespace rfseek;

namespace {

RatioObjective noiseless_objective(const Position& src, const std::vector<Position>& path) {
    RatioArray ra;
    ra.ratios = oracle::true_ratios(src, path);
    return RatioObjective(path, ra, 1.0);
}

RatioObjective objective_with(const std::vector<Position>& path, std::vector<double> ratios) {
    RatioArray ra;
    ra.ratios = std::move(ratios);
    return RatioObjective(path, ra, 1.0);
}

Roi ground(double x0, double x1, double y0, double y1) {
    Roi r;
    r.x_min = x0;
    r.x_max = x1;
    r.y_min = y0;
    r.y_max = y1;
    return r;
}

}  // namespace

TEST(RatioObjective, Construction) {
    const auto path = oracle::l_shape({0, 0, 100}, 20, 10);
    EXPECT_THROW(objective_with(path, {1.0}), ContractError);
    EXPECT_THROW(objective_with({{0, 0, 0}}, {}), InsufficientDataError);
    RatioArray shifted;
    shifted.anchor_index = 1;
    shifted.ratios = {1.0};
    EXPECT_THROW(RatioObjective({{0, 0, 0}, {1, 0, 0}}, shifted, 1.0), ContractError);
}

TEST(RatioObjective, FromSamplesBuildsAnchoredRatios) {
    ChannelParams ch;
    RngStream rng(4);
    const Position src{250, 320, 0};
    std::vector<RssiSample> samples;
    const auto path = oracle::l_shape({100, 100, 100}, 100, 10);
    for (const auto& p : path) samples.push_back(synth_rssi(ch, src, p, rng));
    const auto obj = RatioObjective::from_samples(samples, kappa(ch), 1.0);
    EXPECT_EQ(obj.residual_count(), path.size() - 1);
    EXPECT_LT(fitness(src, obj), 1e-20);
}

TEST(Solver, FitnessMatchesOracleAndResiduals) {
    oracle::Gen g(12);
    for (int k = 0; k < 200; ++k) {
        const auto path = oracle::l_shape(g.point(0, 1000, 0, 1000, 100, 100), 50, 10);
        std::vector<double> ratios;
        for (std::size_t j = 1; j < path.size(); ++j) ratios.push_back(g.uniform(0.3, 2.0));
        const auto obj = objective_with(path, ratios);
        const Position c = g.point(0, 1250, 0, 1250, 0, 0);
        const double ref = oracle::ratio_objective(c, path, ratios);
        ASSERT_NEAR(fitness(c, obj), ref, 1e-12 * (1 + ref));
        double ss = 0;
        for (double r : residuals(c, obj)) ss += r * r;
        ASSERT_NEAR(ss, ref, 1e-12 * (1 + ref));
    }
}

TEST(Solver, JacobianMatchesFiniteDifferences) {
    oracle::Gen g(77);
    for (int k = 0; k < 100; ++k) {
        const auto path = oracle::l_shape(g.point(0, 1000, 0, 1000, 100, 100), 100, 10);
        std::vector<double> ratios;
        for (std::size_t j = 1; j < path.size(); ++j) ratios.push_back(g.uniform(0.3, 2.0));
        const auto obj = objective_with(path, ratios);
        // Off-plane points too, so every column is exercised.
        const Position c = g.point(0, 1250, 0, 1250, -30, 60);
        const auto fd = oracle::central_jacobian([&](const Position& p) { return residuals(p, obj); },
                                                 c, 1e-5);
        const Jacobian jac = lm_jacobian(c, obj);
        ASSERT_EQ(jac.rows(), static_cast<Eigen::Index>(fd.size()));
        for (std::size_t r = 0; r < fd.size(); ++r) {
            for (int a = 0; a < 3; ++a) {
                ASSERT_NEAR(jac(static_cast<Eigen::Index>(r), a), fd[r][a], 1e-7) << "row " << r;
            }
        }
    }
}

TEST(Solver, JacobianZeroThroughClampedDistance) {
    const auto path = oracle::l_shape({0, 0, 0}, 20, 10);
    const auto obj = objective_with(path, std::vector<double>(path.size() - 1, 1.0));
    const Jacobian jac = lm_jacobian(path[0] + Position{0.2, 0.1, 0.0}, obj);
    // Numerator distance is clamped, the denominators are not.
    for (Eigen::Index r = 0; r < jac.rows(); ++r) {
        const Position pj = path[static_cast<std::size_t>(r) + 1];
        const Position c = path[0] + Position{0.2, 0.1, 0.0};
        const double dj = oracle::dist(c, pj);
        const double scale = -1.0 / (dj * dj * dj);  // -d0 * (c - pj)/dj / dj^2 with d0 = 1
        EXPECT_NEAR(jac(r, 0), scale * (c.x - pj.x), 1e-12);
        EXPECT_NEAR(jac(r, 1), scale * (c.y - pj.y), 1e-12);
    }
}

TEST(Solver, PsoLmMatchesGridOracle) {
    // Noisy ratios: the minimizer is no longer the source, so compare against
    // an exhaustive grid search over the same objective.
    oracle::Gen g(2024);
    RngStream rng(9);
    for (int k = 0; k < 6; ++k) {
        const Position corner = g.point(100, 300, 100, 300, 100, 100);
        const auto path = oracle::l_shape(corner, 100, 10);
        const Position src = g.point(0, 500, 0, 500, 0, 0);
        auto ratios = oracle::true_ratios(src, path);
        for (double& r : ratios) r *= std::pow(10.0, g.uniform(-0.01, 0.01));
        const auto obj = objective_with(path, ratios);
        const Roi roi = ground(0, 500, 0, 500);
        const auto res = pso_lm_localize(obj, roi, {}, {}, rng);
        const auto grid = oracle::grid_minimize([&](const Position& p) {
            return oracle::ratio_objective(p, path, ratios);
        }, 0, 500, 0, 500, 0, 1.0, 0.01);
        EXPECT_LE(res.objective, grid.value * (1 + 1e-9) + 1e-15) << "trial " << k;
        EXPECT_LT(oracle::dist(res.estimate, grid.best), 1.0) << "trial " << k;
    }
}

TEST(Solver, NoiselessRecoversSource) {
    oracle::Gen g(5);
    RngStream rng(1);
    for (int k = 0; k < 10; ++k) {
        const Position src = g.point(0, 1250, 0, 1250, 0, 0);
        const auto obj = noiseless_objective(src, oracle::l_shape({500, 500, 100}, 100, 10));
        const auto res = pso_lm_localize(obj, Roi{}, {}, {}, rng);
        EXPECT_LT(distance(res.estimate, src), 1e-3) << "trial " << k;
    }
}

TEST(Solver, EstimatesStayInBounds) {
    oracle::Gen g(31);
    RngStream rng(2);
    const Roi roi = ground(0, 300, 0, 300);
    for (int k = 0; k < 20; ++k) {
        // Sources outside the bounds pull the unconstrained minimum outside.
        const Position src = g.point(-500, 800, -500, 800, 0, 0);
        const auto obj = noiseless_objective(src, oracle::l_shape(g.point(0, 200, 0, 200, 100, 100), 100, 10));
        const auto res = pso_lm_localize(obj, roi, {}, {}, rng);
        ASSERT_TRUE(roi.contains(res.estimate)) << res.estimate.x << "," << res.estimate.y << "," << res.estimate.z;
    }
}

TEST(Solver, PsoHistoryNonIncreasingAndSingleParticleWorks) {
    RngStream rng(3);
    const auto obj = noiseless_objective({700, 200, 0}, oracle::l_shape({500, 500, 100}, 100, 10));
    for (int n : {1, 2, 60}) {
        PsoConfig cfg;
        cfg.swarm_size = n;
        const auto res = pso_minimize(obj, Roi{}, cfg, rng);
        ASSERT_EQ(res.pso_history.size(), static_cast<std::size_t>(res.pso_iters) + 1);
        for (std::size_t i = 1; i < res.pso_history.size(); ++i) {
            ASSERT_LE(res.pso_history[i], res.pso_history[i - 1]);
        }
        EXPECT_TRUE(Roi{}.contains(res.estimate));
        EXPECT_DOUBLE_EQ(res.objective, res.pso_history.back());
    }
}

TEST(Solver, PsoDeterministicForSeed) {
    const auto obj = noiseless_objective({700, 200, 0}, oracle::l_shape({500, 500, 100}, 100, 10));
    RngStream a(8), b(8);
    const auto ra = pso_lm_localize(obj, Roi{}, {}, {}, a);
    const auto rb = pso_lm_localize(obj, Roi{}, {}, {}, b);
    EXPECT_EQ(ra.estimate, rb.estimate);
    EXPECT_EQ(ra.pso_history, rb.pso_history);
    EXPECT_EQ(ra.lm_history, rb.lm_history);
}

TEST(Solver, LmHistoryDecreasesAndLambdaStaysClamped) {
    oracle::Gen g(44);
    for (int k = 0; k < 30; ++k) {
        const Position src = g.point(0, 1250, 0, 1250, 0, 0);
        const auto obj = noiseless_objective(src, oracle::l_shape(g.point(0, 1100, 0, 1100, 100, 100), 100, 10));
        LmConfig cfg;
        cfg.lambda_init = (k % 2) ? 1e-14 : 1e14;
        const auto res = lm_refine(g.point(0, 1250, 0, 1250, 0, 0), obj, cfg, Roi{});
        for (std::size_t i = 1; i < res.lm_history.size(); ++i) {
            ASSERT_LT(res.lm_history[i], res.lm_history[i - 1]);
        }
        for (double l : res.lm_lambdas) {
            ASSERT_GE(l, kLambdaMin);
            ASSERT_LE(l, kLambdaMax);
        }
        EXPECT_LE(res.objective, res.lm_history.front());
        EXPECT_TRUE(Roi{}.contains(res.estimate));
    }
}

TEST(Solver, LmUnboundedConvergesNearSource) {
    const Position src{420, 380, 0};
    const auto obj = noiseless_objective(src, oracle::l_shape({300, 300, 100}, 100, 10));
    const auto res = lm_refine(src + Position{15, -10, 0}, obj, {});
    EXPECT_LT(distance(res.estimate, src), 1e-4);
    EXPECT_TRUE(res.converged);
}

TEST(Solver, ConfigValidation) {
    PsoConfig p;
    p.swarm_size = 0;
    EXPECT_THROW(p.validate(), ContractError);
    p = {};
    p.inertia = 1.5;
    EXPECT_THROW(p.validate(), ContractError);
    LmConfig l;
    l.lambda_down = 1.0;
    EXPECT_THROW(l.validate(), ContractError);
    l = {};
    l.lambda_up = 1.0;
    EXPECT_THROW(l.validate(), ContractError);
    const auto obj = noiseless_objective({1, 2, 0}, oracle::l_shape({0, 0, 100}, 20, 10));
    EXPECT_THROW((void)lm_refine({NAN, 0, 0}, obj, {}), ContractError);
}
