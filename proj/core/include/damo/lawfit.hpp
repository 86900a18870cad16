#pragma once

// Exponential mixing-law baseline: per task, s_j(p) = c_j + k_j * exp(t_j . p),
// fitted by damped Gauss-Newton (Levenberg-Marquardt) at one checkpoint step.

#include "damo/mixspace.hpp"
#include "damo/surrogate.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace damo::lawfit {

using mixspace::LatticePoint;
using mixspace::MixtureProportion;
using surrogate::SamplePoint;

struct ExpLawParams {
    std::size_t task = 0;
    std::uint32_t step = 0;
    double intercept = 0.0;
    double scale = 0.0;
    std::vector<double> slopes;
    double residual_mse = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    /// Sum of squared residuals after each accepted step, starting with the initial guess.
    std::vector<double> residual_history;

    double predict(std::span<const double> p) const;
    double predict(const MixtureProportion& p) const { return predict(p.values()); }
};

struct FitOptions {
    std::size_t max_iterations = 500;
    std::size_t starts = 3;
    std::uint64_t seed = 0;
    /// Checkpoint to fit at; the largest step present when unset.
    std::optional<std::uint32_t> step;
};

/// Fits rows of proportions (n x m, row-major) against targets. Multi-start;
/// the lowest residual wins. Throws DomainError with fewer than m+2 rows.
ExpLawParams fit_exp_law(std::span<const double> proportions, std::size_t m, std::span<const double> targets,
                         const FitOptions& options = {});

/// Fits task `task` on the samples recorded at the selected step.
ExpLawParams fit_exp_law(std::span<const SamplePoint> samples, std::size_t task, const FitOptions& options = {});

/// One law per task.
std::vector<ExpLawParams> fit_exp_laws(std::span<const SamplePoint> samples, const FitOptions& options = {});

struct LawChoice {
    LatticePoint point;
    MixtureProportion proportions;
    double predicted_average = 0.0;
};

/// Lattice point maximizing the mean over tasks of the clamped law
/// predictions; ties go to the lexicographically smallest point.
LawChoice exp_law_best_mixture(std::span<const ExpLawParams> laws, std::size_t m, std::uint32_t b);

} // namespace damo::lawfit
