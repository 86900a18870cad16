#pragma once

// Exhaustive extrapolation of a trained surrogate over the mixing lattice and
// checkpoint grid, with deterministic top-K selection.

#include "damo/mixspace.hpp"
#include "damo/step_grid.hpp"
#include "damo/surrogate.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace damo::optimizer {

using mixspace::LatticePoint;
using mixspace::MixtureProportion;
using surrogate::SurrogateModel;

struct Objective {
    std::size_t step_index = 0;
    std::uint32_t best_step = 0;
    double average = 0.0;        // mean of the clamped per-task scores
    std::vector<double> scores;  // clamped to [0, 1]
};

/// Best grid step for mixture p: maximizes the clamped per-task mean; ties go
/// to the earliest step. Throws DomainError on an empty grid.
Objective predict_objective(const SurrogateModel& model, const MixtureProportion& p, const StepGrid& grid);

struct RankedMixture {
    LatticePoint mixture;
    std::uint32_t best_step = 0;
    std::vector<double> scores;
    double average = 0.0;
    std::size_t rank = 0;
};

/// Ranking order: higher average first, then lexicographically smaller
/// mixture, then earlier step.
bool ranks_before(const RankedMixture& a, const RankedMixture& b);

struct RankingOptions {
    std::size_t shards = 0;  // 0: one shard per worker
    std::size_t workers = 0; // 0: worker_count()
};

struct Ranking {
    std::vector<RankedMixture> entries;
    std::uint64_t lattice_size = 0;
    std::size_t requested = 0;
    bool truncated = false; // requested K exceeded the lattice size
};

/// Top-K mixtures over the full (m, b) lattice. The lattice is split into
/// contiguous index ranges; the result does not depend on the shard count.
Ranking rank_lattice(const SurrogateModel& model, std::uint32_t b, const StepGrid& grid, std::size_t top_k,
                     const RankingOptions& options = {});

/// Rank-1 entry of rank_lattice over the checkpoint grid {tau, 2 tau, ..., T}.
RankedMixture optimal_mixture(const SurrogateModel& model, std::uint32_t b, std::uint32_t total_steps,
                              std::uint32_t tau, const RankingOptions& options = {});

/// Deterministically merges per-shard rankings into one top-K list with ranks 1..K.
std::vector<RankedMixture> merge_rankings(std::vector<std::vector<RankedMixture>> parts, std::size_t top_k);

} // namespace damo::optimizer
