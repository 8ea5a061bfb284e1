// AArch64 only. Two candidates per register.

#include <arm_neon.h>

#include "rfseeker/kernels.hpp"

namespace rfseek::kernels::detail {

void ratio_fitness_neon(const RatioProblemView& problem, const CandidateBatch& batch,
                        std::span<double> fitness) {
    const std::size_t n = problem.xs.size();
    const std::size_t m = batch.xs.size();
    const float64x2_t d_min = vdupq_n_f64(problem.d_min);

    std::size_t c = 0;
    for (; c + 2 <= m; c += 2) {
        const float64x2_t cx = vld1q_f64(batch.xs.data() + c);
        const float64x2_t cy = vld1q_f64(batch.ys.data() + c);
        const float64x2_t cz = vld1q_f64(batch.zs.data() + c);

        float64x2_t dx = vsubq_f64(cx, vdupq_n_f64(problem.xs[0]));
        float64x2_t dy = vsubq_f64(cy, vdupq_n_f64(problem.ys[0]));
        float64x2_t dz = vsubq_f64(cz, vdupq_n_f64(problem.zs[0]));
        // vmulq + vaddq rather than vfmaq to match the scalar rounding.
        float64x2_t sq =
            vaddq_f64(vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy)), vmulq_f64(dz, dz));
        const float64x2_t d0 = vmaxq_f64(vsqrtq_f64(sq), d_min);

        float64x2_t acc = vdupq_n_f64(0.0);
        for (std::size_t j = 1; j < n; ++j) {
            dx = vsubq_f64(cx, vdupq_n_f64(problem.xs[j]));
            dy = vsubq_f64(cy, vdupq_n_f64(problem.ys[j]));
            dz = vsubq_f64(cz, vdupq_n_f64(problem.zs[j]));
            sq = vaddq_f64(vaddq_f64(vmulq_f64(dx, dx), vmulq_f64(dy, dy)), vmulq_f64(dz, dz));
            const float64x2_t dj = vmaxq_f64(vsqrtq_f64(sq), d_min);
            const float64x2_t r =
                vsubq_f64(vdivq_f64(d0, dj), vdupq_n_f64(problem.ratios[j - 1]));
            acc = vaddq_f64(acc, vmulq_f64(r, r));
        }
        vst1q_f64(fitness.data() + c, acc);
    }
    if (c < m) {
        ratio_fitness_scalar(problem, batch, fitness, c, m);
    }
}

}  // namespace rfseek::kernels::detail
