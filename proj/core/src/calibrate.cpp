#include "damo/calibrate.hpp"

#include "damo/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace damo::calibrate {

namespace {

std::size_t check_pairs(std::span<const std::vector<double>> base, std::span<const std::vector<double>> target)
{
    if (base.size() != target.size()) {
        throw DomainError("calibration: base and target sample counts differ");
    }
    if (base.empty()) {
        throw DomainError("calibration: no samples");
    }
    const std::size_t k = base.front().size();
    if (k == 0) {
        throw DomainError("calibration: empty score vectors");
    }
    for (std::size_t r = 0; r < base.size(); ++r) {
        if (base[r].size() != k || target[r].size() != k) {
            throw DomainError("calibration: sample " + std::to_string(r) + " has inconsistent width");
        }
    }
    return k;
}

// Solves (X^T X + ridge I) beta = X^T y.
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y)
{
    Eigen::MatrixXd normal = x.transpose() * x;
    normal.diagonal().array() += kRidge;
    return normal.ldlt().solve(x.transpose() * y);
}

double mean_clamped(std::span<const double> v)
{
    double sum = 0.0;
    for (double s : v) {
        sum += std::clamp(s, 0.0, 1.0);
    }
    return sum / static_cast<double>(v.size());
}

} // namespace

std::string_view to_string(CalibrationMode mode) noexcept
{
    return mode == CalibrationMode::diagonal ? "diagonal" : "full";
}

CalibrationMode parse_mode(std::string_view name)
{
    if (name == "diagonal") {
        return CalibrationMode::diagonal;
    }
    if (name == "full") {
        return CalibrationMode::full;
    }
    throw DomainError("unknown calibration mode '" + std::string(name) + "' (expected diagonal or full)");
}

double pearson(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw DomainError("pearson: inputs have different lengths");
    }
    if (x.size() < 2) {
        throw DomainError("pearson: at least two points are required");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) {
        throw DomainError("pearson: input is constant");
    }
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CalibrationMap CalibrationMap::identity(std::size_t k)
{
    CalibrationMap map;
    map.k = k;
    map.weights.assign(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
        map.weights[i * k + i] = 1.0;
    }
    map.bias.assign(k, 0.0);
    return map;
}

CalibrationMap fit_calibration(std::span<const std::vector<double>> base_predictions,
                               std::span<const std::vector<double>> target_scores, CalibrationMode mode)
{
    const std::size_t k = check_pairs(base_predictions, target_scores);
    const std::size_t n = base_predictions.size();
    if (mode == CalibrationMode::diagonal && n < 2) {
        throw DomainError("calibration: diagonal mode needs at least 2 samples");
    }
    if (mode == CalibrationMode::full && n < k + 1) {
        throw DomainError("calibration: full mode needs at least k+1 = " + std::to_string(k + 1) + " samples");
    }

    CalibrationMap map;
    map.mode = mode;
    map.k = k;
    map.weights.assign(k * k, 0.0);
    map.bias.assign(k, 0.0);
    map.samples = n;

    const auto rows = static_cast<Eigen::Index>(n);
    for (std::size_t j = 0; j < k; ++j) {
        Eigen::VectorXd y(rows);
        for (std::size_t r = 0; r < n; ++r) {
            y[static_cast<Eigen::Index>(r)] = target_scores[r][j];
        }
        if (mode == CalibrationMode::diagonal) {
            Eigen::MatrixXd x(rows, 2);
            for (std::size_t r = 0; r < n; ++r) {
                x(static_cast<Eigen::Index>(r), 0) = base_predictions[r][j];
                x(static_cast<Eigen::Index>(r), 1) = 1.0;
            }
            const Eigen::VectorXd beta = ridge_solve(x, y);
            map.weights[j * k + j] = beta[0];
            map.bias[j] = beta[1];
        } else {
            Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(k + 1));
            for (std::size_t r = 0; r < n; ++r) {
                for (std::size_t i = 0; i < k; ++i) {
                    x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = base_predictions[r][i];
                }
                x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = 1.0;
            }
            const Eigen::VectorXd beta = ridge_solve(x, y);
            for (std::size_t i = 0; i < k; ++i) {
                map.weights[i * k + j] = beta[static_cast<Eigen::Index>(i)];
            }
            map.bias[j] = beta[static_cast<Eigen::Index>(k)];
        }
    }
    for (double w : map.weights) {
        if (!std::isfinite(w)) {
            throw DomainError("calibration: fit produced non-finite weights");
        }
    }
    map.residual = calibration_residual(map, base_predictions, target_scores);
    return map;
}

std::vector<double> apply_calibration(const CalibrationMap& map, std::span<const double> prediction)
{
    if (prediction.size() != map.k) {
        throw DomainError("calibration: prediction has " + std::to_string(prediction.size()) +
                          " tasks, map expects " + std::to_string(map.k));
    }
    std::vector<double> out(map.bias);
    for (std::size_t i = 0; i < map.k; ++i) {
        const double x = prediction[i];
        for (std::size_t j = 0; j < map.k; ++j) {
            out[j] += x * map.weights[i * map.k + j];
        }
    }
    return out;
}

double calibration_residual(const CalibrationMap& map, std::span<const std::vector<double>> base_predictions,
                            std::span<const std::vector<double>> target_scores)
{
    check_pairs(base_predictions, target_scores);
    double sum = 0.0;
    for (std::size_t r = 0; r < base_predictions.size(); ++r) {
        const auto mapped = apply_calibration(map, base_predictions[r]);
        for (std::size_t j = 0; j < map.k; ++j) {
            const double e = mapped[j] - target_scores[r][j];
            sum += e * e;
        }
    }
    return sum;
}

CorrelationReport correlation_report(const CalibrationMap& map, std::span<const std::vector<double>> base_predictions,
                                     std::span<const std::vector<double>> actual_scores)
{
    check_pairs(base_predictions, actual_scores);
    CorrelationReport report;
    report.samples = base_predictions.size();
    std::vector<double> before;
    std::vector<double> after;
    std::vector<double> actual;
    for (std::size_t r = 0; r < base_predictions.size(); ++r) {
        const double a = mean_clamped(actual_scores[r]);
        const double p0 = mean_clamped(base_predictions[r]);
        const double p1 = mean_clamped(apply_calibration(map, base_predictions[r]));
        before.push_back(p0);
        after.push_back(p1);
        actual.push_back(a);
        report.scatter_before.emplace_back(p0, a);
        report.scatter_after.emplace_back(p1, a);
    }
    report.pearson_before = pearson(before, actual);
    report.pearson_after = pearson(after, actual);
    return report;
}

} // namespace damo::calibrate
