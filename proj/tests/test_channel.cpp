#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rfseeker/channel.hpp"

using namespace rfseek;

TEST(Channel, KappaAtDefaultAltitude) {
    ChannelParams p;
    // 10 * 2.772 * 100^-0.04724, evaluated independently.
    const double expected = 27.72 * std::exp(-0.04724 * std::log(100.0));
    EXPECT_NEAR(kappa(p), expected, 1e-12);
    EXPECT_NEAR(kappa(p), 22.30, 0.01);
}

TEST(Channel, KappaFallsWithAltitude) {
    ChannelParams lo, hi;
    lo.uav_altitude = 50;
    hi.uav_altitude = 200;
    EXPECT_GT(kappa(lo), kappa(hi));
}

TEST(Channel, ValidateRejectsBadParameters) {
    ChannelParams p;
    p.uav_altitude = 0;
    EXPECT_THROW(p.validate(), ContractError);
    p = {};
    p.sigma = -1;
    EXPECT_THROW(p.validate(), ContractError);
    p = {};
    p.d_min = 0;
    EXPECT_THROW(p.validate(), ContractError);
    p = {};
    p.carrier_ghz = -2;
    EXPECT_THROW(p.validate(), ContractError);
}

TEST(Channel, PathLossSlopePerDecade) {
    ChannelParams p;
    EXPECT_NEAR(path_loss(p, 100.0) - path_loss(p, 10.0), kappa(p), 1e-9);
    // Below d_min the loss is flat.
    EXPECT_DOUBLE_EQ(path_loss(p, 0.1), path_loss(p, 1.0));
}

TEST(Channel, NoiselessRssiFollowsLogDistance) {
    ChannelParams p;
    RngStream rng(1);
    const Position src{0, 0, 0};
    const auto s = synth_rssi(p, src, {0, 0, 100}, rng);
    EXPECT_NEAR(s.rssi, -30.0 - kappa(p) * 2.0, 1e-12);
    EXPECT_EQ(s.position, (Position{0, 0, 100}));
}

TEST(Channel, SynthAlwaysConsumesOneVariate) {
    ChannelParams quiet, noisy;
    noisy.sigma = 3.0;
    RngStream a(5), b(5);
    (void)synth_rssi(quiet, {}, {10, 0, 100}, a);
    (void)synth_rssi(noisy, {}, {10, 0, 100}, b);
    EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Channel, ShadowingStatistics) {
    ChannelParams p;
    p.sigma = 4.0;
    RngStream rng(17);
    const Position src{0, 0, 0}, at{300, 400, 0};
    const double mean_expected = -30.0 - kappa(p) * std::log10(500.0);
    const int n = 50000;
    double s1 = 0, s2 = 0;
    for (int k = 0; k < n; ++k) {
        const double r = synth_rssi(p, src, at, rng).rssi - mean_expected;
        s1 += r;
        s2 += r * r;
    }
    EXPECT_NEAR(s1 / n, 0.0, 0.08);
    EXPECT_NEAR(std::sqrt(s2 / n), 4.0, 0.06);
}

TEST(Channel, SigmaForSnr) {
    EXPECT_DOUBLE_EQ(sigma_for_snr(0.0, 4.0), 4.0);
    EXPECT_NEAR(sigma_for_snr(20.0, 4.0), 0.4, 1e-15);
    EXPECT_NEAR(sigma_for_snr(10.0, 4.0), 4.0 / std::sqrt(10.0), 1e-14);
    EXPECT_EQ(sigma_for_snr(INFINITY, 4.0), 0.0);
    EXPECT_THROW((void)sigma_for_snr(-INFINITY, 4.0), ContractError);
    EXPECT_THROW((void)sigma_for_snr(NAN, 4.0), ContractError);
    EXPECT_THROW((void)sigma_for_snr(0.0, 0.0), ContractError);
}

TEST(Channel, DistanceRatioRoundTrip) {
    ChannelParams p;
    RngStream rng(0);
    const Position src{0, 0, 0};
    const auto a = synth_rssi(p, src, {20, 0, 0}, rng);
    const auto b = synth_rssi(p, src, {40, 0, 0}, rng);
    EXPECT_NEAR(distance_ratio(a.rssi, b.rssi, kappa(p)), 0.5, 1e-12);
    EXPECT_DOUBLE_EQ(distance_ratio(-50, -50, 22.3), 1.0);
    EXPECT_THROW((void)distance_ratio(0, 0, 0), ContractError);
}

TEST(Channel, RatioArrayMatchesGeometryWhenNoiseless) {
    ChannelParams p;
    oracle::Gen g(3);
    for (int trial = 0; trial < 50; ++trial) {
        RngStream rng(trial);
        const Position src = g.point(0, 1250, 0, 1250, 0, 0);
        const auto path = oracle::l_shape(g.point(0, 1000, 0, 1000, 100, 100), 100, 10);
        std::vector<RssiSample> samples;
        for (const auto& at : path) samples.push_back(synth_rssi(p, src, at, rng));
        const RatioArray ra = ratio_array(samples, kappa(p));
        const auto truth = oracle::true_ratios(src, path);
        ASSERT_EQ(ra.anchor_index, 0u);
        ASSERT_EQ(ra.ratios.size(), truth.size());
        for (std::size_t j = 0; j < truth.size(); ++j) ASSERT_NEAR(ra.ratios[j], truth[j], 1e-9 * truth[j]);
    }
}

TEST(Channel, RatioArrayNeedsThreeSamples) {
    std::vector<RssiSample> two{{{0, 0, 0}, -40}, {{1, 0, 0}, -41}};
    EXPECT_THROW((void)ratio_array(two, 22.3), InsufficientDataError);
    two.push_back({{2, 0, 0}, -42});
    EXPECT_EQ(ratio_array(two, 22.3).ratios.size(), 2u);
}
