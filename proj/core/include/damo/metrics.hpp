#pragma once

// Scalar evaluation utilities: overall average score, plan-graph complexity,
// ROUGE-L similarity and query-set diversity.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace damo::metrics {

using Tokens = std::vector<std::string>;

/// Unweighted mean of per-task scores. Throws DomainError when empty.
double overall_average(std::span<const double> scores);

/// Weighted mean; weights must be non-negative with a positive sum.
double weighted_average(std::span<const double> scores, std::span<const double> weights);

struct PlanGraph {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    bool acyclic = true;

    /// Throws DomainError for zero nodes or, when acyclic, more than n(n-1)/2 edges.
    void validate() const;
};

/// edges / nodes.
double dag_complexity(const PlanGraph& graph);

/// Whitespace split, optionally lower-cased (ASCII).
Tokens tokenize(std::string_view text, bool fold_case = true);

/// Length of the longest common subsequence.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// ROUGE-L F1: P = LCS/|b|, R = LCS/|a|, F = 2PR/(P+R); 0 when LCS = 0.
/// Throws DomainError if either sequence is empty.
double rouge_l(std::span<const std::string> a, std::span<const std::string> b);

/// 1 - mean ROUGE-L over unordered pairs. Throws DomainError for fewer than two queries.
double diversity(std::span<const Tokens> queries);

} // namespace damo::metrics
