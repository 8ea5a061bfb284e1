#include <gtest/gtest.h>

#include <bit>
#include <cstdint>
#include <vector>

#include "oracles.hpp"
#include "rfseeker/kernels.hpp"

using namespace rfseek;
using namespace rfseek::kernels;

namespace {

struct Problem {
    std::vector<Position> samples;
    std::vector<double> xs, ys, zs, ratios;
    RatioProblemView view() const { return {xs, ys, zs, ratios, 1.0}; }
};

Problem make_problem(oracle::Gen& g, int n) {
    Problem p;
    for (int k = 0; k < n; ++k) {
        const Position s = g.point(0, 1250, 0, 1250, 100, 100);
        p.samples.push_back(s);
        p.xs.push_back(s.x);
        p.ys.push_back(s.y);
        p.zs.push_back(s.z);
        if (k > 0) p.ratios.push_back(g.uniform(0.2, 3.0));
    }
    return p;
}

struct Batch {
    std::vector<Position> pts;
    std::vector<double> xs, ys, zs;
    CandidateBatch view() const { return {xs, ys, zs}; }
};

Batch make_batch(oracle::Gen& g, const Problem& prob, int n) {
    Batch b;
    for (int k = 0; k < n; ++k) {
        Position c = g.point(-50, 1300, -50, 1300, 0, 0);
        // Some candidates sit on or next to a sample to exercise the d_min clamp.
        if (k % 7 == 3) c = prob.samples[static_cast<std::size_t>(k) % prob.samples.size()];
        if (k % 11 == 5) c = prob.samples[0] + Position{0.3, 0.2, 0.0};
        b.pts.push_back(c);
        b.xs.push_back(c.x);
        b.ys.push_back(c.y);
        b.zs.push_back(c.z);
    }
    return b;
}

}  // namespace

TEST(Kernels, ScalarAlwaysAvailable) {
    const auto isas = available_isas();
    ASSERT_FALSE(isas.empty());
    EXPECT_EQ(isas.front(), Isa::scalar);
    EXPECT_EQ(isa_name(Isa::scalar), "scalar");
    EXPECT_EQ(isa_name(Isa::avx2), "avx2");
}

TEST(Kernels, ScalarMatchesDirectFormula) {
    oracle::Gen g(21);
    for (int rep = 0; rep < 20; ++rep) {
        const Problem prob = make_problem(g, 3 + rep);
        const Batch b = make_batch(g, prob, 37);
        std::vector<double> out(b.pts.size());
        ratio_fitness(prob.view(), b.view(), out, Isa::scalar);
        for (std::size_t c = 0; c < b.pts.size(); ++c) {
            const double ref = oracle::ratio_objective(b.pts[c], prob.samples, prob.ratios);
            ASSERT_NEAR(out[c], ref, 1e-10 * (1.0 + ref));
        }
    }
}

TEST(Kernels, EveryIsaBitIdenticalToScalar) {
    oracle::Gen g(99);
    for (Isa isa : available_isas()) {
        SCOPED_TRACE(std::string(isa_name(isa)));
        // Batch sizes around the vector widths, including an empty batch.
        for (int n : {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 60, 61}) {
            const Problem prob = make_problem(g, 3 + n % 20);
            const Batch b = make_batch(g, prob, n);
            std::vector<double> ref(b.pts.size()), got(b.pts.size(), -1.0);
            ratio_fitness(prob.view(), b.view(), ref, Isa::scalar);
            ratio_fitness(prob.view(), b.view(), got, isa);
            for (std::size_t c = 0; c < ref.size(); ++c) {
                ASSERT_EQ(std::bit_cast<std::uint64_t>(ref[c]), std::bit_cast<std::uint64_t>(got[c]))
                    << "n=" << n << " c=" << c;
            }
        }
    }
}

TEST(Kernels, DefaultDispatchMatchesScalar) {
    oracle::Gen g(5);
    const Problem prob = make_problem(g, 21);
    const Batch b = make_batch(g, prob, 60);
    std::vector<double> ref(60), got(60);
    ratio_fitness(prob.view(), b.view(), ref, Isa::scalar);
    ratio_fitness(prob.view(), b.view(), got);
    EXPECT_EQ(ref, got);
}

TEST(Kernels, ZeroAtTrueSource) {
    oracle::Gen g(8);
    const Position src{400, 700, 0};
    Problem prob;
    prob.samples = oracle::l_shape({300, 300, 100}, 100, 10);
    for (const auto& s : prob.samples) {
        prob.xs.push_back(s.x);
        prob.ys.push_back(s.y);
        prob.zs.push_back(s.z);
    }
    prob.ratios = oracle::true_ratios(src, prob.samples);
    const std::vector<double> xs{src.x}, ys{src.y}, zs{src.z};
    std::vector<double> out(1);
    for (Isa isa : available_isas()) {
        ratio_fitness(prob.view(), {xs, ys, zs}, out, isa);
        EXPECT_LT(out[0], 1e-24);
    }
}

TEST(Kernels, RejectsMismatchedSizes) {
    oracle::Gen g(1);
    const Problem prob = make_problem(g, 5);
    const Batch b = make_batch(g, prob, 4);
    std::vector<double> out(3);
    EXPECT_THROW(ratio_fitness(prob.view(), b.view(), out, Isa::scalar), std::invalid_argument);
}
