#pragma once

// Affine cross-model correction g = f(.) W + b and Pearson diagnostics.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace damo::calibrate {

enum class CalibrationMode { diagonal, full };

std::string_view to_string(CalibrationMode mode) noexcept;
CalibrationMode parse_mode(std::string_view name);

/// Product-moment correlation. Throws DomainError on length mismatch, fewer
/// than two points, or a constant input.
double pearson(std::span<const double> x, std::span<const double> y);

struct CalibrationMap {
    CalibrationMode mode = CalibrationMode::diagonal;
    std::size_t k = 0;
    std::vector<double> weights; // k x k row-major; W(i, j) maps input task i to output task j
    std::vector<double> bias;    // k
    double residual = 0.0;       // training sum of squared errors
    std::size_t samples = 0;
    std::string base_model_id;
    std::string target_model_id;

    static CalibrationMap identity(std::size_t k);

    double weight(std::size_t i, std::size_t j) const { return weights[i * k + j]; }
};

inline constexpr double kRidge = 1e-8;

/// Least squares fit of target ~ base W + b via ridge-damped normal equations.
/// Diagonal mode fits a scale and offset per task (needs >= 2 samples); full
/// mode fits a dense W (needs >= k+1 samples).
CalibrationMap fit_calibration(std::span<const std::vector<double>> base_predictions,
                               std::span<const std::vector<double>> target_scores,
                               CalibrationMode mode = CalibrationMode::diagonal);

/// prediction . W + b, unclamped.
std::vector<double> apply_calibration(const CalibrationMap& map, std::span<const double> prediction);

/// Sum of squared errors of the map over the pairs.
double calibration_residual(const CalibrationMap& map, std::span<const std::vector<double>> base_predictions,
                            std::span<const std::vector<double>> target_scores);

struct CorrelationReport {
    double pearson_before = 0.0;
    double pearson_after = 0.0;
    std::size_t samples = 0;
    /// (predicted, actual) overall averages, before and after mapping; clamped to [0, 1].
    std::vector<std::pair<double, double>> scatter_before;
    std::vector<std::pair<double, double>> scatter_after;
};

/// Pearson r of overall averages of clamped predictions against actual
/// averages, without and with the map.
CorrelationReport correlation_report(const CalibrationMap& map, std::span<const std::vector<double>> base_predictions,
                                     std::span<const std::vector<double>> actual_scores);

} // namespace damo::calibrate
