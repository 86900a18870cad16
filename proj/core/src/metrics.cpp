#include "damo/metrics.hpp"

#include "damo/error.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

namespace damo::metrics {

double overall_average(std::span<const double> scores)
{
    if (scores.empty()) {
        throw DomainError("overall_average: empty score vector");
    }
    double sum = 0.0;
    for (double s : scores) {
        sum += s;
    }
    return sum / static_cast<double>(scores.size());
}

double weighted_average(std::span<const double> scores, std::span<const double> weights)
{
    if (scores.empty() || scores.size() != weights.size()) {
        throw DomainError("weighted_average: scores and weights must be non-empty and equally long");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!(weights[i] >= 0.0)) {
            throw DomainError("weighted_average: weights must be non-negative");
        }
        num += weights[i] * scores[i];
        den += weights[i];
    }
    if (!(den > 0.0)) {
        throw DomainError("weighted_average: weights sum to zero");
    }
    return num / den;
}

void PlanGraph::validate() const
{
    if (nodes == 0) {
        throw DomainError("plan graph: at least one node is required");
    }
    if (acyclic && edges > nodes * (nodes - 1) / 2) {
        throw DomainError("plan graph: too many edges for a DAG on " + std::to_string(nodes) + " nodes");
    }
}

double dag_complexity(const PlanGraph& graph)
{
    if (graph.nodes == 0) {
        throw DomainError("dag_complexity: zero nodes");
    }
    return static_cast<double>(graph.edges) / static_cast<double>(graph.nodes);
}

Tokens tokenize(std::string_view text, bool fold_case)
{
    Tokens tokens;
    std::string current;
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
            continue;
        }
        current.push_back(fold_case ? static_cast<char>(std::tolower(static_cast<unsigned char>(ch))) : ch);
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b)
{
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double rouge_l(std::span<const std::string> a, std::span<const std::string> b)
{
    if (a.empty() || b.empty()) {
        throw DomainError("rouge_l: sequences must be non-empty");
    }
    const double lcs = static_cast<double>(lcs_length(a, b));
    if (lcs == 0.0) {
        return 0.0;
    }
    const double precision = lcs / static_cast<double>(b.size());
    const double recall = lcs / static_cast<double>(a.size());
    return 2.0 * precision * recall / (precision + recall);
}

double diversity(std::span<const Tokens> queries)
{
    if (queries.size() < 2) {
        throw DomainError("diversity: at least two queries are required");
    }
    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        for (std::size_t j = i + 1; j < queries.size(); ++j) {
            sum += rouge_l(queries[i], queries[j]);
            ++pairs;
        }
    }
    return 1.0 - sum / static_cast<double>(pairs);
}

} // namespace damo::metrics
