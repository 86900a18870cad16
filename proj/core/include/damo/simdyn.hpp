#pragma once

// Synthetic multitask training-dynamics oracle. A pure function
// (mixture, step) -> per-task scores built from four dataset/task interaction
// kernels plus pairwise oscillating cross-terms and hashed noise.

#include "damo/mixspace.hpp"
#include "damo/step_grid.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace damo::simdyn {

using mixspace::LatticePoint;
using mixspace::MixtureProportion;

enum class Interaction { enhancement, conflict, neutral, overfitting };
enum class Preset { smooth, rugged };

std::string_view to_string(Interaction kind) noexcept;
std::string_view to_string(Preset preset) noexcept;
/// Throws DomainError on an unknown name.
Interaction parse_interaction(std::string_view name);
Preset parse_preset(std::string_view name);

/// Kernel response at x = p_i * (t/T) / timescale.
///   enhancement  1 - e^-x
///   conflict     -(1 - e^-x)
///   neutral      0
///   overfitting  x e^(1-x), peak 1 at x = 1
double kernel(Interaction kind, double x) noexcept;

/// c * p_a * p_b * sin(2 pi frequency t/T + phase), added to one task.
struct CrossTerm {
    std::size_t first = 0;
    std::size_t second = 0;
    std::size_t task = 0;
    double weight = 0.0;
    double frequency = 0.0;
    double phase = 0.0;

    friend bool operator==(const CrossTerm&, const CrossTerm&) = default;
};

/// Per-task affine remap of the clamped base score, modelling a different
/// target model: s' = clamp(scale_j * s_j + offset_j + noise).
struct AffineTarget {
    std::vector<double> scale;
    std::vector<double> offset;

    friend bool operator==(const AffineTarget&, const AffineTarget&) = default;
};

struct OracleSpec {
    std::size_t m = 0;
    std::size_t k = 0;
    std::vector<Interaction> kinds; // m x k, row-major by dataset
    std::vector<double> strength;   // m x k, in [0, 1]
    std::vector<double> timescale;  // m x k, fraction of the run horizon, > 0
    std::vector<double> base;       // k, in [0, 1]
    std::vector<CrossTerm> cross;
    double noise = 0.0;
    std::uint64_t seed = 0;
    std::string id;
    std::optional<AffineTarget> target;

    Interaction kind(std::size_t i, std::size_t j) const { return kinds[i * k + j]; }
    double gain(std::size_t i, std::size_t j) const { return strength[i * k + j]; }
    double tau(std::size_t i, std::size_t j) const { return timescale[i * k + j]; }

    /// Throws DomainError on inconsistent sizes or out-of-range values.
    void validate() const;

    friend bool operator==(const OracleSpec&, const OracleSpec&) = default;
};

/// Seeded random oracle. smooth: no cross-terms, no noise. rugged: three
/// oscillating cross-terms per task and noise 0.01.
OracleSpec make_oracle(std::size_t m, std::size_t k, std::uint64_t seed, Preset preset);

/// Oracle in which every dataset/task pair uses `kind`; no cross-terms, no noise.
OracleSpec make_kernel_oracle(std::size_t m, std::size_t k, std::uint64_t seed, Interaction kind);

/// Copy of `base` remapped per task, with its own noise amplitude and seed.
OracleSpec make_affine_target(const OracleSpec& base, AffineTarget target, double noise, std::uint64_t seed);

/// Scores at step t of a T-step run. Pure: identical inputs give identical bits.
std::vector<double> oracle_eval(const OracleSpec& spec, const MixtureProportion& p, std::uint32_t t,
                                std::uint32_t total_steps);

/// Mean of oracle_eval over tasks.
double oracle_average(const OracleSpec& spec, const MixtureProportion& p, std::uint32_t t,
                      std::uint32_t total_steps);

struct BruteForceResult {
    LatticePoint point;
    std::uint32_t step = 0;
    double average = 0.0;
};

inline constexpr std::uint64_t kDefaultEvaluationBudget = 10'000'000;

/// Exact argmax of the true overall average over lattice x grid. Ties go to
/// the lexicographically smallest point, then the earliest step. Throws
/// BudgetError when lattice_size * |grid| exceeds the budget.
BruteForceResult brute_force_best(const OracleSpec& spec, std::uint32_t b, const StepGrid& grid,
                                  std::uint64_t budget = kDefaultEvaluationBudget, std::size_t shards = 1);

/// True overall averages for every (lattice index, grid step), lattice-major.
std::vector<double> true_average_table(const OracleSpec& spec, std::uint32_t b, const StepGrid& grid,
                                       std::uint64_t budget = kDefaultEvaluationBudget);

} // namespace damo::simdyn
