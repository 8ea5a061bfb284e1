// Compiled with -mavx2 only; dispatch guarantees the CPU supports it.

#include <immintrin.h>

#include "rfseeker/kernels.hpp"

namespace rfseek::kernels::detail {

void ratio_fitness_avx2(const RatioProblemView& problem, const CandidateBatch& batch,
                        std::span<double> fitness) {
    const std::size_t n = problem.xs.size();
    const std::size_t m = batch.xs.size();
    const __m256d d_min = _mm256_set1_pd(problem.d_min);

    // Four candidates per register, one lane each.
    std::size_t c = 0;
    for (; c + 4 <= m; c += 4) {
        const __m256d cx = _mm256_loadu_pd(batch.xs.data() + c);
        const __m256d cy = _mm256_loadu_pd(batch.ys.data() + c);
        const __m256d cz = _mm256_loadu_pd(batch.zs.data() + c);

        __m256d dx = _mm256_sub_pd(cx, _mm256_set1_pd(problem.xs[0]));
        __m256d dy = _mm256_sub_pd(cy, _mm256_set1_pd(problem.ys[0]));
        __m256d dz = _mm256_sub_pd(cz, _mm256_set1_pd(problem.zs[0]));
        __m256d sq = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                                   _mm256_mul_pd(dz, dz));
        const __m256d d0 = _mm256_max_pd(_mm256_sqrt_pd(sq), d_min);

        __m256d acc = _mm256_setzero_pd();
        for (std::size_t j = 1; j < n; ++j) {
            dx = _mm256_sub_pd(cx, _mm256_set1_pd(problem.xs[j]));
            dy = _mm256_sub_pd(cy, _mm256_set1_pd(problem.ys[j]));
            dz = _mm256_sub_pd(cz, _mm256_set1_pd(problem.zs[j]));
            sq = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                               _mm256_mul_pd(dz, dz));
            const __m256d dj = _mm256_max_pd(_mm256_sqrt_pd(sq), d_min);
            const __m256d r =
                _mm256_sub_pd(_mm256_div_pd(d0, dj), _mm256_set1_pd(problem.ratios[j - 1]));
            acc = _mm256_add_pd(acc, _mm256_mul_pd(r, r));
        }
        _mm256_storeu_pd(fitness.data() + c, acc);
    }
    if (c < m) {
        ratio_fitness_scalar(problem, batch, fitness, c, m);
    }
}

}  // namespace rfseek::kernels::detail
