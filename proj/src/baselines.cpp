#include "rfseeker/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace rfseek {

std::string_view baseline_name(BaselineMethod m) noexcept {
    switch (m) {
        case BaselineMethod::single_shot_pso_lm: return "single_shot_pso_lm";
        case BaselineMethod::trilateration: return "trilateration";
        case BaselineMethod::weighted_centroid: return "weighted_centroid";
    }
    return "unknown";
}

std::optional<BaselineMethod> parse_baseline(std::string_view name) noexcept {
    for (BaselineMethod m : {BaselineMethod::single_shot_pso_lm, BaselineMethod::trilateration,
                             BaselineMethod::weighted_centroid}) {
        if (baseline_name(m) == name) return m;
    }
    return std::nullopt;
}

void TrilaterationConfig::validate() const {
    if (max_triples < 1) throw ContractError("baselines.trilateration_max_triples: must be >= 1");
}

void CentroidConfig::validate() const {
    if (iterations < 0) throw ContractError("baselines.centroid_iterations: must be >= 0");
}

Position single_shot_pso_lm(std::span<const RssiSample> samples, const ChannelParams& channel,
                            const Roi& bounds, const PsoConfig& pso, const LmConfig& lm,
                            RngStream& rng) {
    const RatioObjective obj =
        RatioObjective::from_samples(samples, kappa(channel), channel.d_min);
    return pso_lm_localize(obj, bounds, pso, lm, rng).estimate;
}

namespace {

struct Vec3 {
    double x, y, z;
};

Vec3 sub(const Position& a, const Position& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Sphere |x - p_i|^2 - rho^2 |x - p_j|^2 = 0 written as
/// quad * |x|^2 + lin . x + c = 0.
struct Sphere {
    double quad;
    Vec3 lin;
    double c;
};

Sphere apollonius(const Position& pi, const Position& pj, double rho) {
    const double r2 = rho * rho;
    const Vec3 vi{pi.x, pi.y, pi.z};
    const Vec3 vj{pj.x, pj.y, pj.z};
    return {1.0 - r2,
            {-2.0 * pi.x + 2.0 * r2 * pj.x, -2.0 * pi.y + 2.0 * r2 * pj.y,
             -2.0 * pi.z + 2.0 * r2 * pj.z},
            dot(vi, vi) - r2 * dot(vj, vj)};
}

struct TripleCandidates {
    std::array<Position, 2> points;
    int count = 0;
};

/// Solves one triple; count == 0 means the triple was unusable.
TripleCandidates solve_triple(const RssiSample& si, const RssiSample& sj, const RssiSample& sk,
                              double kappa, const Roi& bounds, double d_min) {
    TripleCandidates out;
    const Vec3 e1 = sub(sj.position, si.position);
    const Vec3 e2 = sub(sk.position, si.position);
    // Collinear triples are fine: the radical plane is then normal to the track
    // and the ground-plane cut still yields the source and its mirror image.
    if (!(norm(e1) > 0.0 && norm(e2) > 0.0 && norm(sub(sk.position, sj.position)) > 0.0)) {
        return out;
    }

    const double rho_ij = distance_ratio(si.rssi, sj.rssi, kappa);
    const double rho_ik = distance_ratio(si.rssi, sk.rssi, kappa);
    const Sphere a = apollonius(si.position, sj.position, rho_ij);
    const Sphere b = apollonius(si.position, sk.position, rho_ik);

    // Plane left after eliminating |x|^2; a unit-ratio sphere is already a plane.
    Vec3 lin;
    double c;
    constexpr double kFlat = 1e-12;
    if (std::abs(a.quad) < kFlat) {
        lin = a.lin;
        c = a.c;
    } else if (std::abs(b.quad) < kFlat) {
        lin = b.lin;
        c = b.c;
    } else {
        lin = {b.quad * a.lin.x - a.quad * b.lin.x, b.quad * a.lin.y - a.quad * b.lin.y,
               b.quad * a.lin.z - a.quad * b.lin.z};
        c = b.quad * a.c - a.quad * b.c;
    }

    // Line in the plane z = z_ref: lin.x * x + lin.y * y + (lin.z * z_ref + c) = 0.
    const double z_ref = bounds.z_min;
    const double nx = lin.x;
    const double ny = lin.y;
    const double n2 = nx * nx + ny * ny;
    const double lin_scale = std::max({std::abs(lin.x), std::abs(lin.y), std::abs(lin.z)});
    if (!(n2 > 0.0) || std::sqrt(n2) <= 1e-12 * lin_scale) return out;
    const double offset = lin.z * z_ref + c;
    const double ox = -offset * nx / n2;
    const double oy = -offset * ny / n2;
    const double len = std::sqrt(n2);
    const double ux = -ny / len;
    const double uy = nx / len;

    // Clip the line to the footprint.
    double t0 = -std::numeric_limits<double>::infinity();
    double t1 = std::numeric_limits<double>::infinity();
    auto slab = [&](double o, double u, double lo, double hi) {
        if (std::abs(u) < 1e-15) {
            if (o < lo || o > hi) t0 = 1.0, t1 = 0.0;
            return;
        }
        double ta = (lo - o) / u;
        double tb = (hi - o) / u;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    };
    slab(ox, ux, bounds.x_min, bounds.x_max);
    slab(oy, uy, bounds.y_min, bounds.y_max);
    if (!(t0 <= t1)) return out;

    auto point = [&](double t) { return Position{ox + t * ux, oy + t * uy, z_ref}; };
    auto residual = [&](double t) {
        const Position p = point(t);
        const double di = std::max(distance(p, si.position), d_min);
        const double dj = std::max(distance(p, sj.position), d_min);
        const double dk = std::max(distance(p, sk.position), d_min);
        const double r1 = di / dj - rho_ij;
        const double r2 = di / dk - rho_ik;
        return r1 * r1 + r2 * r2;
    };

    constexpr int kScan = 256;
    std::array<double, kScan + 1> ts{}, qs{};
    for (int m = 0; m <= kScan; ++m) {
        ts[m] = t0 + (t1 - t0) * m / kScan;
        qs[m] = residual(ts[m]);
    }

    struct Minimum {
        double t, q;
    };
    std::vector<Minimum> minima;
    for (int m = 0; m <= kScan; ++m) {
        const bool left = m == 0 || qs[m] <= qs[m - 1];
        const bool right = m == kScan || qs[m] <= qs[m + 1];
        if (!(left && right)) continue;
        // Golden-section refinement inside the neighbouring scan cells.
        double lo = ts[std::max(m - 1, 0)];
        double hi = ts[std::min(m + 1, kScan)];
        constexpr double kInvPhi = 0.6180339887498949;
        double x1 = hi - kInvPhi * (hi - lo);
        double x2 = lo + kInvPhi * (hi - lo);
        double f1 = residual(x1);
        double f2 = residual(x2);
        while (hi - lo > 1e-7) {
            if (f1 <= f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - kInvPhi * (hi - lo);
                f1 = residual(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + kInvPhi * (hi - lo);
                f2 = residual(x2);
            }
        }
        const double t = 0.5 * (lo + hi);
        minima.push_back({t, residual(t)});
    }
    if (minima.empty()) return out;
    std::sort(minima.begin(), minima.end(),
              [](const Minimum& l, const Minimum& r) { return l.q < r.q; });

    out.points[0] = point(minima[0].t);
    out.count = 1;
    // The sphere pair meets the plane twice in general; keep the second root
    // when it fits comparably well.
    if (minima.size() > 1 && minima[1].q <= 10.0 * minima[0].q + 1e-6 &&
        std::abs(minima[1].t - minima[0].t) > 1e-3) {
        out.points[1] = point(minima[1].t);
        out.count = 2;
    }
    return out;
}

}  // namespace

Position trilateration(std::span<const RssiSample> samples, double kappa, const Roi& bounds,
                       RngStream& rng, const TrilaterationConfig& cfg) {
    cfg.validate();
    bounds.validate();
    if (samples.size() < 3) {
        throw InsufficientDataError("trilateration: need at least 3 samples");
    }
    if (!(kappa > 0.0)) throw ContractError("trilateration: kappa must be > 0");
    constexpr double kDMin = 1.0;
    const std::size_t n = samples.size();
    const std::size_t cap = static_cast<std::size_t>(cfg.max_triples);

    // A triple's two roots fit it equally well; the rest of the samples decide.
    const RatioObjective all = RatioObjective::from_samples(samples, kappa, kDMin);
    std::vector<Position> candidates;
    auto add = [&](std::size_t i, std::size_t j, std::size_t k) -> bool {
        const TripleCandidates tc =
            solve_triple(samples[i], samples[j], samples[k], kappa, bounds, kDMin);
        if (tc.count == 0) return false;
        Position pick = tc.points[0];
        if (tc.count == 2 && fitness(tc.points[1], all) < fitness(pick, all)) pick = tc.points[1];
        candidates.push_back(pick);
        return true;
    };

    const double combos = static_cast<double>(n) * (n - 1) * (n - 2) / 6.0;
    if (combos <= static_cast<double>(cap)) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                for (std::size_t k = j + 1; k < n; ++k) add(i, j, k);
    } else {
        std::size_t used = 0;
        for (std::size_t attempt = 0; attempt < 50 * cap && used < cap; ++attempt) {
            const std::size_t i = rng.index(n);
            const std::size_t j = rng.index(n);
            const std::size_t k = rng.index(n);
            if (i == j || j == k || i == k) continue;
            if (add(i, j, k)) ++used;
        }
    }
    if (candidates.empty()) {
        throw DegenerateGeometryError("trilateration: every sample triple is degenerate");
    }
    return geometric_median(candidates);
}

Position weighted_centroid(std::span<const RssiSample> samples, double kappa, int iterations,
                           const Roi& bounds, double d_min) {
    if (samples.empty()) throw InsufficientDataError("weighted_centroid: no samples");
    if (!(kappa > 0.0)) throw ContractError("weighted_centroid: kappa must be > 0");
    if (iterations < 0) throw ContractError("weighted_centroid: iterations must be >= 0");

    double r_max = -std::numeric_limits<double>::infinity();
    double z_mean = 0.0;
    for (const auto& s : samples) {
        r_max = std::max(r_max, s.rssi);
        z_mean += s.position.z;
    }
    z_mean /= static_cast<double>(samples.size());

    // Scaled by the strongest reading to stay in range; normalization cancels it.
    std::vector<double> base(samples.size());
    for (std::size_t t = 0; t < samples.size(); ++t) {
        base[t] = std::pow(10.0, (samples[t].rssi - r_max) / kappa);
    }

    auto centroid = [&](const std::vector<double>& w) {
        double sw = 0.0, sx = 0.0, sy = 0.0;
        for (std::size_t t = 0; t < samples.size(); ++t) {
            sw += w[t];
            sx += w[t] * samples[t].position.x;
            sy += w[t] * samples[t].position.y;
        }
        return Position{sx / sw, sy / sw, z_mean};
    };

    Position c = centroid(base);
    std::vector<double> w(samples.size());
    for (int round = 0; round < iterations; ++round) {
        for (std::size_t t = 0; t < samples.size(); ++t) {
            w[t] = base[t] / (horizontal_distance(samples[t].position, c) + d_min);
        }
        c = centroid(w);
    }
    c.z = std::clamp(z_mean, bounds.z_min, bounds.z_max);
    return c;
}

Position geometric_median(std::span<const Position> points) {
    if (points.empty()) throw ContractError("geometric_median: no points");
    Position m{};
    for (const auto& p : points) m = m + p;
    m = (1.0 / static_cast<double>(points.size())) * m;
    for (int iter = 0; iter < 500; ++iter) {
        Position num{};
        double den = 0.0;
        for (const auto& p : points) {
            const double w = 1.0 / std::max(distance(p, m), 1e-12);
            num = num + w * p;
            den += w;
        }
        const Position next = (1.0 / den) * num;
        const double moved = distance(next, m);
        m = next;
        if (moved < 1e-10) break;
    }
    return m;
}

std::vector<Position> continuation_path(const Position& start, const Position& heading_point,
                                        double spacing, std::size_t count, const Roi& roi) {
    if (!(spacing > 0.0)) throw ContractError("continuation_path: spacing must be > 0");
    const double dx = heading_point.x - start.x;
    const double dy = heading_point.y - start.y;
    const double len = std::hypot(dx, dy);
    if (!(len > 0.0)) throw ContractError("continuation_path: heading point equals start");
    std::vector<Position> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double s = spacing * static_cast<double>(k);
        out.push_back({reflect_into(start.x + s * dx / len, roi.x_min, roi.x_max),
                       reflect_into(start.y + s * dy / len, roi.y_min, roi.y_max), start.z});
    }
    return out;
}

}  // namespace rfseek
