#pragma once

// Test-only reference computations. None of these call into the code under
// test beyond plain data types, so they can serve as independent checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "rfseeker/core.hpp"

namespace oracle {

using rfseek::Position;

inline double dist(const Position& a, const Position& b) {
    const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Ratio objective written out directly: sum_j (d_0/d_j - rho_j)^2.
inline double ratio_objective(const Position& c, const std::vector<Position>& samples,
                              const std::vector<double>& ratios, double d_min = 1.0) {
    const double d0 = std::max(dist(c, samples[0]), d_min);
    double s = 0.0;
    for (std::size_t j = 1; j < samples.size(); ++j) {
        const double r = d0 / std::max(dist(c, samples[j]), d_min) - ratios[j - 1];
        s += r * r;
    }
    return s;
}

/// Noiseless ratios d_0/d_j of a source seen from `samples`.
inline std::vector<double> true_ratios(const Position& source, const std::vector<Position>& samples) {
    std::vector<double> r;
    for (std::size_t j = 1; j < samples.size(); ++j) {
        r.push_back(dist(source, samples[0]) / dist(source, samples[j]));
    }
    return r;
}

struct GridResult {
    Position best;
    double value = std::numeric_limits<double>::infinity();
};

/// Exhaustive minimization of f over the rectangle at height z: a `coarse`
/// grid, then a `fine` sweep over one coarse cell around the best node. In a
/// long narrow valley the best coarse node can sit more than a cell away from
/// the minimum, so the sweep is re-centred while its best point lands on the
/// window edge.
inline GridResult grid_minimize(const std::function<double(const Position&)>& f, double x0,
                                double x1, double y0, double y1, double z, double coarse,
                                double fine) {
    GridResult g;
    const int nx = static_cast<int>(std::round((x1 - x0) / coarse));
    const int ny = static_cast<int>(std::round((y1 - y0) / coarse));
    for (int i = 0; i <= nx; ++i) {
        for (int j = 0; j <= ny; ++j) {
            const Position p{x0 + i * coarse, y0 + j * coarse, z};
            const double v = f(p);
            if (v < g.value) g = {p, v};
        }
    }
    const int m = static_cast<int>(std::round(coarse / fine));
    for (int round = 0; round < 100; ++round) {
        const Position c = g.best;
        int bi = 0, bj = 0;
        for (int i = -m; i <= m; ++i) {
            for (int j = -m; j <= m; ++j) {
                const Position p{std::clamp(c.x + i * fine, x0, x1), std::clamp(c.y + j * fine, y0, y1), z};
                const double v = f(p);
                if (v < g.value) {
                    g = {p, v};
                    bi = i;
                    bj = j;
                }
            }
        }
        const bool on_edge = std::abs(bi) == m || std::abs(bj) == m;
        const bool at_bound = g.best.x == x0 || g.best.x == x1 || g.best.y == y0 || g.best.y == y1;
        if (!on_edge || at_bound) break;
    }
    return g;
}

/// Central difference of a vector function along each axis.
inline std::vector<std::array<double, 3>> central_jacobian(
    const std::function<std::vector<double>(const Position&)>& f, const Position& x, double h) {
    const auto base = f(x);
    std::vector<std::array<double, 3>> jac(base.size());
    for (int axis = 0; axis < 3; ++axis) {
        Position lo = x, hi = x;
        (axis == 0 ? lo.x : axis == 1 ? lo.y : lo.z) -= h;
        (axis == 0 ? hi.x : axis == 1 ? hi.y : hi.z) += h;
        const auto fl = f(lo), fh = f(hi);
        for (std::size_t r = 0; r < base.size(); ++r) jac[r][axis] = (fh[r] - fl[r]) / (2.0 * h);
    }
    return jac;
}

/// Standard normal CDF by composite Simpson integration of the density from
/// -12 (where the tail is below 1e-32) to x.
inline double normal_cdf_integrated(double x, int panels = 20000) {
    const double a = -12.0;
    if (x <= a) return 0.0;
    const double h = (x - a) / panels;
    auto pdf = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); };
    double s = pdf(a) + pdf(x);
    for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * pdf(a + k * h);
    return s * h / 3.0;
}

/// E[2(1 - Phi(|Z|))] for Z ~ N(0,1), integrated numerically.
inline double expected_symmetric_confidence(int panels = 4000) {
    // 2 * integral_0^inf 2(1 - Phi(z)) phi(z) dz, Phi from the integrator above.
    const double b = 10.0;
    const double h = b / panels;
    auto g = [](double z) {
        const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
        return 2.0 * 2.0 * (1.0 - normal_cdf_integrated(z, 2000)) * phi;
    };
    double s = g(0.0) + g(b);
    for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * g(k * h);
    return s * h / 3.0;
}

/// Uniform point in a box with a hand-rolled generator independent of RngStream.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : state_(seed * 0x9E3779B97F4A7C15ULL + 1) {}
    double uniform() {
        // xorshift64*
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return static_cast<double>((state_ * 0x2545F4914F6CDD1DULL) >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    Position point(double x0, double x1, double y0, double y1, double z0, double z1) {
        const double x = uniform(x0, x1);
        const double y = uniform(y0, y1);
        const double z = uniform(z0, z1);
        return {x, y, z};
    }

private:
    std::uint64_t state_;
};

/// Positions of an L-shaped flight: `len` along +x from `corner`, then `len`
/// along +y, every `spacing` meters, corner shared.
inline std::vector<Position> l_shape(const Position& corner, double len, double spacing) {
    std::vector<Position> out;
    const int n = static_cast<int>(std::round(len / spacing));
    for (int k = 0; k <= n; ++k) out.push_back({corner.x + k * spacing, corner.y, corner.z});
    for (int k = 1; k <= n; ++k) out.push_back({corner.x + len, corner.y + k * spacing, corner.z});
    return out;
}

}  // namespace oracle
