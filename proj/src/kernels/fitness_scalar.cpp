#include <algorithm>
#include <cmath>

#include "rfseeker/kernels.hpp"

namespace rfseek::kernels::detail {

// Reference kernel. The SIMD variants mirror this operation order exactly.
void ratio_fitness_scalar(const RatioProblemView& problem, const CandidateBatch& batch,
                          std::span<double> fitness, std::size_t begin, std::size_t end) {
    const std::size_t n = problem.xs.size();
    const double d_min = problem.d_min;
    for (std::size_t c = begin; c < end; ++c) {
        const double cx = batch.xs[c];
        const double cy = batch.ys[c];
        const double cz = batch.zs[c];

        double dx = cx - problem.xs[0];
        double dy = cy - problem.ys[0];
        double dz = cz - problem.zs[0];
        const double d0 = std::max(std::sqrt(dx * dx + dy * dy + dz * dz), d_min);

        double acc = 0.0;
        for (std::size_t j = 1; j < n; ++j) {
            dx = cx - problem.xs[j];
            dy = cy - problem.ys[j];
            dz = cz - problem.zs[j];
            const double dj = std::max(std::sqrt(dx * dx + dy * dy + dz * dz), d_min);
            const double r = d0 / dj - problem.ratios[j - 1];
            acc = acc + r * r;
        }
        fitness[c] = acc;
    }
}

}  // namespace rfseek::kernels::detail
