#include "damo/optimizer.hpp"

#include "damo/error.hpp"
#include "damo/parallel.hpp"

#include <algorithm>
#include <queue>

namespace damo::optimizer {

namespace {

// Points evaluated per forward_batch call.
constexpr std::size_t kChunk = 64;

struct Entry {
    double average = 0.0;
    std::uint64_t index = 0;
    std::size_t step_index = 0;
    std::vector<double> scores;
};

bool entry_before(const Entry& a, const Entry& b)
{
    if (a.average != b.average) {
        return a.average > b.average;
    }
    if (a.index != b.index) {
        return a.index < b.index;
    }
    return a.step_index < b.step_index;
}

struct EntryWorseFirst {
    bool operator()(const Entry& a, const Entry& b) const { return entry_before(a, b); }
};

double clamped_mean(const double* scores, std::size_t k)
{
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        sum += std::clamp(scores[j], 0.0, 1.0);
    }
    return sum / static_cast<double>(k);
}

// Best step of one point given its grid-major raw predictions (|grid| x k).
std::pair<std::size_t, double> best_step(const double* raw, std::size_t grid_size, std::size_t k)
{
    std::size_t best = 0;
    double best_avg = clamped_mean(raw, k);
    for (std::size_t g = 1; g < grid_size; ++g) {
        const double avg = clamped_mean(raw + g * k, k);
        if (avg > best_avg) {
            best_avg = avg;
            best = g;
        }
    }
    return {best, best_avg};
}

void require_model(const SurrogateModel& model)
{
    if (model.layers().empty()) {
        throw DomainError("optimizer: model has no layers");
    }
}

void fill_rows(const MixtureProportion& p, const StepGrid& grid, double* rows)
{
    const std::size_t m = p.dims();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double* row = rows + g * (m + 1);
        std::copy(p.values().begin(), p.values().end(), row);
        row[m] = grid.normalized(g);
    }
}

std::vector<Entry> scan_range(const SurrogateModel& model, std::uint32_t b, const StepGrid& grid,
                              std::uint64_t begin, std::uint64_t end, std::size_t top_k)
{
    const std::size_t m = model.mixture_dims();
    const std::size_t k = model.tasks();
    const std::size_t g_count = grid.size();
    const std::size_t row_width = m + 1;

    std::priority_queue<Entry, std::vector<Entry>, EntryWorseFirst> heap;
    std::vector<double> inputs(kChunk * g_count * row_width);
    std::vector<double> outputs(kChunk * g_count * k);

    LatticePoint point = mixspace::unrank_lattice(begin, m, b);
    for (std::uint64_t chunk_start = begin; chunk_start < end; chunk_start += kChunk) {
        const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, end - chunk_start));
        for (std::size_t c = 0; c < n; ++c) {
            if (c > 0 || chunk_start > begin) {
                mixspace::next_point(point);
            }
            fill_rows(mixspace::to_proportions(point), grid, inputs.data() + c * g_count * row_width);
        }
        const std::size_t rows = n * g_count;
        model.forward_batch(std::span<const double>(inputs.data(), rows * row_width), rows,
                            std::span<double>(outputs.data(), rows * k));
        for (std::size_t c = 0; c < n; ++c) {
            const double* raw = outputs.data() + c * g_count * k;
            const auto [g, avg] = best_step(raw, g_count, k);
            Entry candidate{avg, chunk_start + c, g, {}};
            if (heap.size() < top_k || entry_before(candidate, heap.top())) {
                const double* chosen = raw + g * k;
                candidate.scores.resize(k);
                for (std::size_t j = 0; j < k; ++j) {
                    candidate.scores[j] = std::clamp(chosen[j], 0.0, 1.0);
                }
                heap.push(std::move(candidate));
                if (heap.size() > top_k) {
                    heap.pop();
                }
            }
        }
    }
    std::vector<Entry> out;
    out.reserve(heap.size());
    while (!heap.empty()) {
        out.push_back(heap.top());
        heap.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
}

} // namespace

Objective predict_objective(const SurrogateModel& model, const MixtureProportion& p, const StepGrid& grid)
{
    require_model(model);
    if (grid.empty()) {
        throw DomainError("predict_objective: step grid is empty");
    }
    if (p.dims() != model.mixture_dims()) {
        throw DomainError("predict_objective: mixture has " + std::to_string(p.dims()) +
                          " entries, model expects " + std::to_string(model.mixture_dims()));
    }
    const std::size_t k = model.tasks();
    const std::size_t rows = grid.size();
    std::vector<double> inputs(rows * (p.dims() + 1));
    std::vector<double> outputs(rows * k);
    fill_rows(p, grid, inputs.data());
    model.forward_batch(inputs, rows, outputs);

    const auto [g, avg] = best_step(outputs.data(), rows, k);
    Objective obj;
    obj.step_index = g;
    obj.best_step = grid[g];
    obj.average = avg;
    obj.scores.assign(outputs.begin() + static_cast<std::ptrdiff_t>(g * k),
                      outputs.begin() + static_cast<std::ptrdiff_t>((g + 1) * k));
    obj.scores = surrogate::clamp_scores(std::move(obj.scores));
    return obj;
}

bool ranks_before(const RankedMixture& a, const RankedMixture& b)
{
    if (a.average != b.average) {
        return a.average > b.average;
    }
    if (a.mixture != b.mixture) {
        return a.mixture < b.mixture;
    }
    return a.best_step < b.best_step;
}

std::vector<RankedMixture> merge_rankings(std::vector<std::vector<RankedMixture>> parts, std::size_t top_k)
{
    std::vector<RankedMixture> all;
    for (auto& part : parts) {
        std::move(part.begin(), part.end(), std::back_inserter(all));
    }
    std::sort(all.begin(), all.end(), ranks_before);
    if (all.size() > top_k) {
        all.resize(top_k);
    }
    for (std::size_t r = 0; r < all.size(); ++r) {
        all[r].rank = r + 1;
    }
    return all;
}

Ranking rank_lattice(const SurrogateModel& model, std::uint32_t b, const StepGrid& grid, std::size_t top_k,
                     const RankingOptions& options)
{
    require_model(model);
    if (grid.empty()) {
        throw DomainError("rank_lattice: step grid is empty");
    }
    if (top_k == 0) {
        throw DomainError("rank_lattice: K must be >= 1");
    }
    const std::size_t m = model.mixture_dims();
    Ranking ranking;
    ranking.lattice_size = mixspace::lattice_size_u64(m, b);
    ranking.requested = top_k;
    if (top_k > ranking.lattice_size) {
        ranking.truncated = true;
        top_k = static_cast<std::size_t>(ranking.lattice_size);
    }

    const std::size_t workers = options.workers ? options.workers : worker_count();
    std::size_t shards = options.shards ? options.shards : workers;
    shards = static_cast<std::size_t>(std::min<std::uint64_t>(shards, ranking.lattice_size));

    std::vector<std::vector<RankedMixture>> parts(shards);
    parallel_for(shards, workers, [&](std::size_t shard) {
        const std::uint64_t begin = ranking.lattice_size * shard / shards;
        const std::uint64_t end = ranking.lattice_size * (shard + 1) / shards;
        auto entries = scan_range(model, b, grid, begin, end, top_k);
        auto& out = parts[shard];
        out.reserve(entries.size());
        for (auto& e : entries) {
            RankedMixture r;
            r.mixture = mixspace::unrank_lattice(e.index, m, b);
            r.best_step = grid[e.step_index];
            r.scores = std::move(e.scores);
            r.average = e.average;
            out.push_back(std::move(r));
        }
    });

    ranking.entries = merge_rankings(std::move(parts), top_k);
    return ranking;
}

RankedMixture optimal_mixture(const SurrogateModel& model, std::uint32_t b, std::uint32_t total_steps,
                              std::uint32_t tau, const RankingOptions& options)
{
    const StepGrid grid = StepGrid::every(tau, total_steps);
    return rank_lattice(model, b, grid, 1, options).entries.front();
}

} // namespace damo::optimizer
