#include <algorithm>
#include <cstdlib>
#include <string>

#include "rfseeker/core.hpp"
#include "rfseeker/kernels.hpp"

namespace rfseek::kernels {

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

std::vector<Isa> available_isas() {
    std::vector<Isa> out{Isa::scalar};
#if defined(RFSEEKER_HAVE_AVX2)
    if (__builtin_cpu_supports("avx2")) out.push_back(Isa::avx2);
#endif
#if defined(RFSEEKER_HAVE_NEON)
    out.push_back(Isa::neon);
#endif
    return out;
}

namespace {

Isa select_isa() {
    const auto isas = available_isas();
    if (const char* forced = std::getenv("RFSEEKER_ISA")) {
        for (Isa isa : isas) {
            if (isa_name(isa) == forced) return isa;
        }
    }
    return isas.back();
}

}  // namespace

Isa best_isa() {
    static const Isa chosen = select_isa();
    return chosen;
}

void ratio_fitness(const RatioProblemView& problem, const CandidateBatch& batch,
                   std::span<double> fitness, Isa isa) {
    const std::size_t m = batch.xs.size();
    if (batch.ys.size() != m || batch.zs.size() != m || fitness.size() != m) {
        throw ContractError("ratio_fitness: candidate and output spans must have equal length");
    }
    const std::size_t n = problem.xs.size();
    if (n < 2 || problem.ys.size() != n || problem.zs.size() != n ||
        problem.ratios.size() != n - 1) {
        throw ContractError("ratio_fitness: malformed problem view");
    }
    switch (isa) {
        case Isa::scalar:
            detail::ratio_fitness_scalar(problem, batch, fitness, 0, m);
            return;
        case Isa::avx2:
#if defined(RFSEEKER_HAVE_AVX2)
            detail::ratio_fitness_avx2(problem, batch, fitness);
            return;
#else
            break;
#endif
        case Isa::neon:
#if defined(RFSEEKER_HAVE_NEON)
            detail::ratio_fitness_neon(problem, batch, fitness);
            return;
#else
            break;
#endif
    }
    throw ContractError("ratio_fitness: variant '" + std::string(isa_name(isa)) +
                        "' not compiled into this build");
}

void ratio_fitness(const RatioProblemView& problem, const CandidateBatch& batch,
                   std::span<double> fitness) {
    ratio_fitness(problem, batch, fitness, best_isa());
}

}  // namespace rfseek::kernels
