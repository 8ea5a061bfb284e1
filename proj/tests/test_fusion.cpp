#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "rfseeker/fusion.hpp"

using namespace rfseek;

TEST(NormalCdf, MatchesNumericIntegration) {
    for (double x = -6.0; x <= 6.0; x += 0.25) {
        EXPECT_NEAR(std_normal_cdf(x), oracle::normal_cdf_integrated(x), 1e-10) << x;
    }
    EXPECT_DOUBLE_EQ(std_normal_cdf(0.0), 0.5);
}

TEST(PairConfidence, KnownValues) {
    // z = (measured - predicted) / (sqrt 2 sigma).
    EXPECT_DOUBLE_EQ(pair_confidence(3.0, 3.0, 2.0), 1.0);
    const double s = std::sqrt(2.0);
    EXPECT_NEAR(pair_confidence(s, 0.0, 1.0), 2.0 * (1.0 - oracle::normal_cdf_integrated(1.0)), 1e-10);
    EXPECT_NEAR(pair_confidence(-2 * s, 0.0, 1.0), 2.0 * (1.0 - oracle::normal_cdf_integrated(2.0)), 1e-10);
    EXPECT_NEAR(pair_confidence(s, 0.0, 1.0, ConfidenceMode::verbatim),
                oracle::normal_cdf_integrated(1.0), 1e-10);
    EXPECT_NEAR(pair_confidence(0.0, 0.0, 1.0, ConfidenceMode::verbatim), 0.5, 1e-15);
    EXPECT_THROW((void)pair_confidence(0, 0, 0), ContractError);
}

TEST(PairConfidence, SymmetricAndMonotone) {
    oracle::Gen g(6);
    for (int k = 0; k < 2000; ++k) {
        const double sigma = g.uniform(0.05, 8);
        const double p = g.uniform(-40, 40);
        const double e1 = g.uniform(0, 20), e2 = e1 + g.uniform(0, 20);
        const double c1 = pair_confidence(p + e1, p, sigma);
        ASSERT_NEAR(c1, pair_confidence(p - e1, p, sigma), 1e-12);
        ASSERT_GE(c1, pair_confidence(p + e2, p, sigma));
        ASSERT_GE(c1, 0.0);
        ASSERT_LE(c1, 1.0);
    }
}

TEST(PairConfidence, ExpectedValueUnderModelNoise) {
    // With the true source as reference, the z-score is standard normal, so the
    // mean symmetric confidence is E[2(1 - Phi(|Z|))] = 0.5.
    const double oracle_mean = oracle::expected_symmetric_confidence();
    EXPECT_NEAR(oracle_mean, 0.5, 1e-6);
    RngStream rng(10);
    const double sigma = 3.0;
    double sum = 0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
        const double noise = sigma * (rng.normal() - rng.normal());
        sum += pair_confidence(5.0 + noise, 5.0, sigma);
    }
    EXPECT_NEAR(sum / n, oracle_mean, 0.005);
}

TEST(PredictedDelta, MatchesLogDistance) {
    const double k = 22.3;
    EXPECT_NEAR(predicted_delta({10, 0, 0}, {100, 0, 0}, {0, 0, 0}, k), k, 1e-12);
    EXPECT_NEAR(predicted_delta({0, 0, 0}, {10, 0, 0}, {0, 0, 0}, k, 1.0), k, 1e-12);
}

TEST(SegmentConfidence, PerfectAtSourceFallsAway) {
    ChannelParams ch;
    RngStream rng(1);
    const Position src{400, 300, 0};
    std::vector<RssiSample> leg;
    for (const auto& p : oracle::l_shape({200, 200, 100}, 100, 10)) leg.push_back(synth_rssi(ch, src, p, rng));
    ConfidenceConfig cfg;
    const double at_src = segment_confidence(leg, src, kappa(ch), cfg);
    EXPECT_NEAR(at_src, 1.0, 1e-9);
    const double near = segment_confidence(leg, src + Position{30, 0, 0}, kappa(ch), cfg);
    const double far = segment_confidence(leg, src + Position{300, 200, 0}, kappa(ch), cfg);
    EXPECT_LT(near, at_src);
    EXPECT_LT(far, near);
    EXPECT_GT(far, 0.0);
    EXPECT_THROW((void)segment_confidence(std::span(leg).first(1), src, kappa(ch), cfg),
                 InsufficientDataError);
}

TEST(SegmentConfidence, MeanOfPairs) {
    const std::vector<RssiSample> leg{{{0, 0, 100}, -60}, {{10, 0, 100}, -61}, {{20, 0, 100}, -58}};
    const Position est{50, 50, 0};
    ConfidenceConfig cfg;
    cfg.sigma = 2.0;
    double expect = 0;
    for (int t = 1; t < 3; ++t) {
        expect += pair_confidence(leg[0].rssi - leg[t].rssi,
                                  predicted_delta(leg[0].position, leg[t].position, est, 22.3), 2.0);
    }
    EXPECT_NEAR(segment_confidence(leg, est, 22.3, cfg), expect / 2, 1e-15);
}

TEST(ConfidenceConfig, Validation) {
    ConfidenceConfig c;
    EXPECT_NO_THROW(c.validate());
    c.sigma = 0;
    EXPECT_THROW(c.validate(), ContractError);
    c = {};
    c.floor = 0;
    EXPECT_THROW(c.validate(), ContractError);
    c.floor = 1.5;
    EXPECT_THROW(c.validate(), ContractError);
}

TEST(Kalman, InitAndScalarUpdate) {
    const FusionState s = kf_init({10, 20, 0}, 0.5, 100, 0);
    EXPECT_TRUE(s.covariance.isApprox(200.0 * Eigen::Matrix3d::Identity()));
    // Isotropic: each axis is a scalar filter with P = 200, R = 100.
    const FusionState u = kf_update(s, {40, 20, 0}, 1.0);
    EXPECT_NEAR(u.mean.x, 10 + (200.0 / 300.0) * 30, 1e-12);
    EXPECT_NEAR(u.mean.y, 20, 1e-12);
    EXPECT_NEAR(u.covariance(0, 0), 200.0 * 100.0 / 300.0, 1e-9);
    EXPECT_THROW((void)kf_update(s, {0, 0, 0}, 0.0), ContractError);
    EXPECT_THROW((void)kf_init({0, 0, 0}, 1.5, 1, 1), ContractError);
}

TEST(Kalman, TraceShrinksWithoutProcessNoiseAndStaysSymmetric) {
    oracle::Gen g(15);
    for (int rep = 0; rep < 100; ++rep) {
        FusionState s = kf_init(g.point(0, 1000, 0, 1000, 0, 0), g.uniform(0.01, 1), g.uniform(1, 5000), 0);
        for (int k = 0; k < 10; ++k) {
            const double before = s.covariance.trace();
            s = kf_update(s, g.point(0, 1000, 0, 1000, 0, 0), g.uniform(0.001, 1));
            ASSERT_LT(s.covariance.trace(), before);
            ASSERT_TRUE(s.covariance.isApprox(s.covariance.transpose()));
            ASSERT_GT(s.covariance.eigenvalues().real().minCoeff(), 0.0);
        }
    }
}

TEST(Kalman, ConvergesToRepeatedMeasurement) {
    FusionState s = kf_init({0, 0, 0}, 1.0, 2500, 2500);
    for (int k = 0; k < 60; ++k) s = kf_update(s, {300, 400, 0}, 0.8);
    EXPECT_LT(distance(s.mean, {300, 400, 0}), 1e-6);
}

TEST(Kalman, ZeroProcessNoiseClosesGapAsOneOverK) {
    // Equal prior and measurement variance: after k updates the mean is the
    // average of k + 1 equally weighted values.
    const Position start{0, 0, 0}, target{600, 800, 0};
    FusionState s = kf_init(start, 1.0, 2500, 0);
    for (int k = 1; k <= 1000; ++k) {
        s = kf_update(s, target, 1.0);
        if (k % 100 == 0) {
            ASSERT_NEAR(distance(s.mean, target), 1000.0 / (1 + k), 1e-9 * 1000.0) << k;
        }
    }
    EXPECT_NEAR(s.covariance(0, 0), 2500.0 / 1001.0, 1e-9);
}

TEST(Kalman, PosteriorMeanOnSegment) {
    oracle::Gen g(23);
    for (int k = 0; k < 500; ++k) {
        const FusionState s = kf_init(g.point(0, 1250, 0, 1250, 0, 0), g.uniform(0.01, 1), g.uniform(1, 5000),
                                      g.uniform(0, 5000));
        const Position z = g.point(0, 1250, 0, 1250, 0, 0);
        const auto u = kf_update(s, z, g.uniform(0.001, 1));
        const double along = distance(s.mean, u.mean) + distance(u.mean, z);
        ASSERT_NEAR(along, distance(s.mean, z), 1e-9 * (1 + distance(s.mean, z)));
    }
}

TEST(Kalman, HigherConfidencePullsHarder) {
    const FusionState s = kf_init({0, 0, 0}, 1.0, 2500, 2500);
    const auto strong = kf_update(s, {100, 0, 0}, 1.0);
    const auto weak = kf_update(s, {100, 0, 0}, 0.05);
    EXPECT_GT(strong.mean.x, weak.mean.x);
    EXPECT_GT(weak.mean.x, 0.0);
    EXPECT_LT(strong.mean.x, 100.0);
}
