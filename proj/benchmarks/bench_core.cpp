#include "damo/metrics.hpp"
#include "damo/mixspace.hpp"
#include "damo/optimizer.hpp"
#include "damo/simdyn.hpp"
#include "damo/surrogate.hpp"

#include <benchmark/benchmark.h>

#include <vector>

using namespace damo;

static void BM_Enumerate(benchmark::State& state)
{
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto b = static_cast<std::uint32_t>(state.range(1));
    std::uint64_t points = 0;
    for (auto _ : state) {
        points = 0;
        for (const auto& point : mixspace::enumerate_lattice(m, b)) {
            benchmark::DoNotOptimize(point.counts().data());
            ++points;
        }
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * points));
}
BENCHMARK(BM_Enumerate)->Args({5, 8})->Args({8, 12})->Args({12, 8});

static void BM_ForwardBatch(benchmark::State& state)
{
    const auto rows = static_cast<std::size_t>(state.range(0));
    const auto model = surrogate::SurrogateModel::init(12, 10, 1);
    std::vector<double> inputs(rows * model.input_dims(), 1.0 / 13.0);
    std::vector<double> out(rows * model.tasks());
    for (auto _ : state) {
        model.forward_batch(inputs, rows, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * rows));
}
BENCHMARK(BM_ForwardBatch)->Arg(4)->Arg(64)->Arg(1024);

static void BM_RankLattice(benchmark::State& state)
{
    const auto b = static_cast<std::uint32_t>(state.range(0));
    const auto model = surrogate::SurrogateModel::init(5, 4, 2);
    const auto grid = StepGrid::quarters(1000);
    for (auto _ : state) {
        auto ranking = optimizer::rank_lattice(model, b, grid, 50, {.shards = 1, .workers = 1});
        benchmark::DoNotOptimize(ranking.entries.data());
    }
    state.SetItemsProcessed(
        static_cast<std::int64_t>(state.iterations() * mixspace::lattice_size_u64(5, b) * grid.size()));
}
BENCHMARK(BM_RankLattice)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_TrainStep(benchmark::State& state)
{
    const auto oracle = simdyn::make_oracle(5, 4, 0, simdyn::Preset::smooth);
    const auto grid = StepGrid::quarters(1000);
    std::vector<surrogate::SamplePoint> samples;
    for (const auto& point : mixspace::sample_lattice(5, 8, 250, 0)) {
        const auto p = mixspace::to_proportions(point);
        for (auto t : grid.steps()) {
            samples.push_back(surrogate::SamplePoint::make(point, t, 1000, simdyn::oracle_eval(oracle, p, t, 1000)));
        }
    }
    const auto data = surrogate::TrainingSet::from_samples(samples);
    const auto model = surrogate::SurrogateModel::init(5, 4, 0);
    for (auto _ : state) {
        auto lg = surrogate::loss_and_gradient(model, data);
        benchmark::DoNotOptimize(lg.gradient.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * data.rows));
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMicrosecond);

static void BM_Diversity(benchmark::State& state)
{
    std::vector<metrics::Tokens> queries;
    for (int i = 0; i < state.range(0); ++i) {
        queries.push_back(metrics::tokenize("open the app number " + std::to_string(i % 17) + " and send a message to " +
                                            std::to_string(i)));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(metrics::diversity(queries));
    }
}
BENCHMARK(BM_Diversity)->Arg(50)->Arg(200);

BENCHMARK_MAIN();
