#include "damo/lawfit.hpp"

#include "damo/error.hpp"
#include "damo/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace damo::lawfit {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kInitialDamping = 1e-3;
constexpr double kMaxDamping = 1e16;
constexpr double kRelativeTolerance = 1e-14;

// theta = [c, k, t_1..t_m]
double sse(const RowMatrix& p, const VectorXd& y, const VectorXd& theta, VectorXd* residual = nullptr)
{
    const Eigen::Index m = p.cols();
    const VectorXd e = (p * theta.tail(m)).array().exp();
    const VectorXd r = (theta[0] + theta[1] * e.array()).matrix() - y;
    if (residual) {
        *residual = r;
    }
    const double value = r.squaredNorm();
    return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
}

MatrixXd jacobian(const RowMatrix& p, const VectorXd& theta)
{
    const Eigen::Index n = p.rows();
    const Eigen::Index m = p.cols();
    const VectorXd e = (p * theta.tail(m)).array().exp();
    MatrixXd j(n, m + 2);
    j.col(0).setOnes();
    j.col(1) = e;
    for (Eigen::Index i = 0; i < m; ++i) {
        j.col(2 + i) = theta[1] * p.col(i).cwiseProduct(e);
    }
    return j;
}

struct Solution {
    VectorXd theta;
    double sse = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> history;
};

Solution levenberg_marquardt(const RowMatrix& p, const VectorXd& y, VectorXd theta, std::size_t max_iterations)
{
    Solution sol;
    VectorXd residual;
    double current = sse(p, y, theta, &residual);
    sol.history.push_back(current);
    double damping = kInitialDamping;

    std::size_t iter = 0;
    for (; iter < max_iterations; ++iter) {
        if (current <= std::numeric_limits<double>::min()) {
            sol.converged = true;
            break;
        }
        const MatrixXd j = jacobian(p, theta);
        const MatrixXd a = j.transpose() * j;
        const VectorXd g = j.transpose() * residual;
        VectorXd scale = a.diagonal();
        const double floor = std::max(scale.maxCoeff(), 1.0) * 1e-12;
        scale = scale.cwiseMax(floor);

        bool accepted = false;
        while (damping <= kMaxDamping) {
            MatrixXd lhs = a;
            lhs.diagonal() += damping * scale;
            const VectorXd step = lhs.ldlt().solve(-g);
            const VectorXd candidate = theta + step;
            VectorXd candidate_residual;
            const double value = step.allFinite() ? sse(p, y, candidate, &candidate_residual)
                                                  : std::numeric_limits<double>::infinity();
            if (value < current) {
                const double gain = current - value;
                theta = candidate;
                residual = candidate_residual;
                current = value;
                sol.history.push_back(current);
                damping = std::max(damping * 0.3, 1e-12);
                accepted = true;
                if (gain <= kRelativeTolerance * current) {
                    sol.converged = true;
                }
                break;
            }
            damping *= 10.0;
        }
        if (!accepted) {
            // No descent direction left at working precision.
            sol.converged = true;
            break;
        }
        if (sol.converged) {
            ++iter;
            break;
        }
    }
    sol.theta = theta;
    sol.sse = current;
    sol.iterations = iter;
    return sol;
}

VectorXd initial_guess(const RowMatrix& p, const VectorXd& y, std::size_t start, Rng& rng)
{
    const Eigen::Index m = p.cols();
    VectorXd theta(m + 2);
    VectorXd slopes = VectorXd::Zero(m);
    if (start > 0) {
        for (Eigen::Index i = 0; i < m; ++i) {
            slopes[i] = uniform_real(rng, -1.0, 1.0);
        }
    }
    const double mean = y.mean();
    const double spread = std::sqrt((y.array() - mean).square().mean());
    const double k = (start % 2 == 0 ? 1.0 : -1.0) * std::max(spread, 1e-3);
    const double mean_exp = (p * slopes).array().exp().mean();
    theta[0] = mean - k * mean_exp;
    theta[1] = k;
    theta.tail(m) = slopes;
    return theta;
}

} // namespace

double ExpLawParams::predict(std::span<const double> p) const
{
    if (p.size() != slopes.size()) {
        throw DomainError("exp law: mixture has " + std::to_string(p.size()) + " entries, law expects " +
                          std::to_string(slopes.size()));
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        dot += slopes[i] * p[i];
    }
    return intercept + scale * std::exp(dot);
}

ExpLawParams fit_exp_law(std::span<const double> proportions, std::size_t m, std::span<const double> targets,
                         const FitOptions& options)
{
    if (m == 0) {
        throw DomainError("exp law fit: m must be >= 1");
    }
    const std::size_t n = targets.size();
    if (proportions.size() != n * m) {
        throw DomainError("exp law fit: proportions must be targets.size() x m");
    }
    if (n < m + 2) {
        throw DomainError("exp law fit: " + std::to_string(n) + " samples, at least m+2 = " + std::to_string(m + 2) +
                          " required");
    }
    if (options.starts == 0) {
        throw DomainError("exp law fit: at least one start is required");
    }
    const RowMatrix p = Eigen::Map<const RowMatrix>(proportions.data(), static_cast<Eigen::Index>(n),
                                                    static_cast<Eigen::Index>(m));
    const VectorXd y = Eigen::Map<const VectorXd>(targets.data(), static_cast<Eigen::Index>(n));

    Rng rng(derive_seed(options.seed, 0xe4b1a3ULL));
    Solution best;
    for (std::size_t s = 0; s < options.starts; ++s) {
        Solution sol = levenberg_marquardt(p, y, initial_guess(p, y, s, rng), options.max_iterations);
        if (sol.sse < best.sse || best.theta.size() == 0) {
            best = std::move(sol);
        }
    }

    ExpLawParams law;
    law.intercept = best.theta[0];
    law.scale = best.theta[1];
    law.slopes.assign(best.theta.data() + 2, best.theta.data() + 2 + m);
    law.residual_mse = best.sse / static_cast<double>(n);
    law.iterations = best.iterations;
    law.converged = best.converged;
    law.residual_history = std::move(best.history);
    return law;
}

ExpLawParams fit_exp_law(std::span<const SamplePoint> samples, std::size_t task, const FitOptions& options)
{
    if (samples.empty()) {
        throw DomainError("exp law fit: no samples");
    }
    std::uint32_t step = 0;
    if (options.step) {
        step = *options.step;
    } else {
        for (const auto& s : samples) {
            step = std::max(step, s.step);
        }
    }
    const std::size_t m = samples.front().mixture_dims();
    std::vector<double> proportions;
    std::vector<double> targets;
    for (const auto& s : samples) {
        if (s.mixture_dims() != m) {
            throw DomainError("exp law fit: samples disagree on the number of datasets");
        }
        if (task >= s.tasks()) {
            throw DomainError("exp law fit: task index " + std::to_string(task) + " out of range");
        }
        if (s.step != step) {
            continue;
        }
        proportions.insert(proportions.end(), s.proportions.values().begin(), s.proportions.values().end());
        targets.push_back(s.scores[task]);
    }
    ExpLawParams law = fit_exp_law(proportions, m, targets, options);
    law.task = task;
    law.step = step;
    return law;
}

std::vector<ExpLawParams> fit_exp_laws(std::span<const SamplePoint> samples, const FitOptions& options)
{
    if (samples.empty()) {
        throw DomainError("exp law fit: no samples");
    }
    std::vector<ExpLawParams> laws;
    for (std::size_t j = 0; j < samples.front().tasks(); ++j) {
        laws.push_back(fit_exp_law(samples, j, options));
    }
    return laws;
}

LawChoice exp_law_best_mixture(std::span<const ExpLawParams> laws, std::size_t m, std::uint32_t b)
{
    if (laws.empty()) {
        throw DomainError("exp law selection: no fitted laws");
    }
    for (const auto& law : laws) {
        if (law.slopes.size() != m) {
            throw DomainError("exp law selection: law dimension does not match m");
        }
    }
    LawChoice best;
    bool have = false;
    for (const auto& point : mixspace::enumerate_lattice(m, b)) {
        auto p = mixspace::to_proportions(point);
        double sum = 0.0;
        for (const auto& law : laws) {
            sum += std::clamp(law.predict(p), 0.0, 1.0);
        }
        const double avg = sum / static_cast<double>(laws.size());
        if (!have || avg > best.predicted_average) {
            best = {point, std::move(p), avg};
            have = true;
        }
    }
    return best;
}

} // namespace damo::lawfit
