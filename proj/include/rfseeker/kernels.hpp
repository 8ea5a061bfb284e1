#pragma once

// Batched evaluation of the distance-ratio objective.
//
// The swarm search spends nearly all of its time scoring candidate source
// positions against one leg's samples. These kernels score a batch of
// candidates (structure-of-arrays) in one call. Every variant performs the
// same IEEE operations in the same order per candidate (no FMA), so all
// variants return bit-identical results; the tests hold them to that.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace rfseek::kernels {

/// Sample positions of one objective in SoA layout plus its ratio array.
/// ratios.size() == xs.size() - 1; sample 0 is the anchor.
struct RatioProblemView {
    std::span<const double> xs;
    std::span<const double> ys;
    std::span<const double> zs;
    std::span<const double> ratios;
    double d_min = 1.0;
};

struct CandidateBatch {
    std::span<const double> xs;
    std::span<const double> ys;
    std::span<const double> zs;
};

enum class Isa { scalar, avx2, neon };

[[nodiscard]] std::string_view isa_name(Isa isa) noexcept;

/// Variants compiled into this build and supported by the running CPU.
[[nodiscard]] std::vector<Isa> available_isas();

/// Widest available variant. RFSEEKER_ISA=scalar|avx2|neon in the environment
/// overrides the choice when that variant is available.
[[nodiscard]] Isa best_isa();

/// fitness[c] = sum_j (d_0(c) / d_j(c) - ratios[j-1])^2 with every distance
/// clamped below at d_min.
void ratio_fitness(const RatioProblemView& problem, const CandidateBatch& batch,
                   std::span<double> fitness, Isa isa);

/// Same, using best_isa().
void ratio_fitness(const RatioProblemView& problem, const CandidateBatch& batch,
                   std::span<double> fitness);

namespace detail {
void ratio_fitness_scalar(const RatioProblemView& problem, const CandidateBatch& batch,
                          std::span<double> fitness, std::size_t begin, std::size_t end);
void ratio_fitness_avx2(const RatioProblemView& problem, const CandidateBatch& batch,
                        std::span<double> fitness);
void ratio_fitness_neon(const RatioProblemView& problem, const CandidateBatch& batch,
                        std::span<double> fitness);
}  // namespace detail

}  // namespace rfseek::kernels
