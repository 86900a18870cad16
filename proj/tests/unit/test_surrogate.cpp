#include "damo/error.hpp"
#include "damo/random.hpp"
#include "damo/surrogate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace damo;
using namespace damo::surrogate;
using mixspace::LatticePoint;

namespace {

// Straight-line re-computation of the affine + ReLU chain, independent of the
// blocked kernel.
std::vector<double> reference_forward(const SurrogateModel& model, const std::vector<double>& input)
{
    std::vector<double> a = input;
    const auto& layers = model.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        std::vector<double> z(layer.outputs);
        for (std::size_t j = 0; j < layer.outputs; ++j) {
            double acc = layer.bias[j];
            for (std::size_t i = 0; i < layer.inputs; ++i) {
                acc += a[i] * layer.weight(i, j);
            }
            z[j] = (l + 1 < layers.size()) ? std::max(acc, 0.0) : acc;
        }
        a = std::move(z);
    }
    return a;
}

std::vector<SamplePoint> random_samples(std::size_t m, std::size_t k, std::uint32_t b, std::size_t n,
                                        std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<SamplePoint> out;
    for (const auto& point : mixspace::sample_lattice(m, b, n, seed)) {
        std::vector<double> scores(k);
        for (auto& s : scores) {
            s = uniform_unit(rng);
        }
        const auto step = static_cast<std::uint32_t>(1 + uniform_index(rng, 100));
        out.push_back(SamplePoint::make(point, step, 100, scores));
    }
    return out;
}

// Scores affine in (p, t/T), inside [0, 1].
std::vector<SamplePoint> linear_samples(std::size_t n_mixtures, std::uint64_t seed, std::uint32_t b = 10)
{
    std::vector<SamplePoint> out;
    for (const auto& point : mixspace::sample_lattice(3, b, n_mixtures, seed)) {
        const auto p = mixspace::to_proportions(point);
        for (std::uint32_t t : {25u, 50u, 75u, 100u}) {
            const double tn = t / 100.0;
            std::vector<double> s{0.2 + 0.3 * p[0] + 0.1 * p[1] + 0.2 * tn, 0.7 - 0.4 * p[2] + 0.1 * tn};
            out.push_back(SamplePoint::make(point, t, 100, s, "linear", point.to_string()));
        }
    }
    return out;
}

} // namespace

TEST(SamplePoint, DerivesProportionsAndStep)
{
    auto s = SamplePoint::make(LatticePoint({1, 3}, 4), 250, 1000, {0.1, 0.9}, "m", "r");
    EXPECT_EQ(s.proportions[0], 0.25);
    EXPECT_NEAR(s.step_norm, 0.25, 1e-12);
    EXPECT_THROW(SamplePoint::make(LatticePoint({1, 3}, 4), 0, 1000, {0.1}), DomainError);
    EXPECT_THROW(SamplePoint::make(LatticePoint({1, 3}, 4), 1001, 1000, {0.1}), DomainError);
    EXPECT_THROW(SamplePoint::make(LatticePoint({1, 3}, 4), 10, 1000, {1.1}), DomainError);
}

TEST(Model, InitIsDeterministic)
{
    auto a = SurrogateModel::init(5, 4, 17);
    auto b = SurrogateModel::init(5, 4, 17);
    EXPECT_EQ(a.flatten(), b.flatten());
    EXPECT_NE(a.flatten(), SurrogateModel::init(5, 4, 18).flatten());
    for (const auto& layer : a.layers()) {
        for (double bias : layer.bias) {
            EXPECT_EQ(bias, 0.0);
        }
        const double limit = std::sqrt(6.0 / layer.inputs);
        for (double w : layer.weights) {
            EXPECT_LE(std::abs(w), limit);
        }
    }
}

TEST(Model, ParameterCountForPaperArchitecture)
{
    auto model = SurrogateModel::init(12, 10, 0);
    // (13 -> 100 -> 100 -> 10): weights 13*100 + 100*100 + 100*10, biases 100 + 100 + 10.
    const std::size_t expected = 13 * 100 + 100 * 100 + 100 * 10 + 100 + 100 + 10;
    EXPECT_EQ(expected, 12'510u);
    EXPECT_EQ(model.parameter_count(), expected);
    EXPECT_EQ(model.flatten().size(), expected);
    EXPECT_EQ(model.input_dims(), 13u);
    EXPECT_EQ(model.tasks(), 10u);
}

TEST(Model, ZeroModelOutputsBiases)
{
    auto model = SurrogateModel::zeros(3, 2);
    auto out = model.forward(mixspace::uniform_mixture(3), 0.5);
    EXPECT_EQ(out, (std::vector<double>{0.0, 0.0}));
    model.layers()[2].bias = {0.3, -0.2};
    out = model.forward(mixspace::uniform_mixture(3), 0.75);
    EXPECT_EQ(out, (std::vector<double>{0.3, -0.2}));
}

TEST(Model, HandSetPassThrough)
{
    DenseLayer l1{2, 1, {0.0, 1.0}, {0.0}};
    DenseLayer l2{1, 1, {1.0}, {0.0}};
    DenseLayer l3{1, 1, {1.0}, {0.0}};
    auto model = SurrogateModel::from_layers({l1, l2, l3});
    EXPECT_EQ(model.forward(mixspace::uniform_mixture(1), 0.5), std::vector<double>{0.5});
}

TEST(Model, ForwardMatchesReferenceChain)
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto model = SurrogateModel::init(6, 3, seed);
        model.layers()[0].bias[4] = 0.25;
        model.layers()[2].bias[1] = -0.1;
        for (const auto& point : mixspace::sample_lattice(6, 9, 20, seed)) {
            const auto p = mixspace::to_proportions(point);
            std::vector<double> input(p.values().begin(), p.values().end());
            input.push_back(0.4);
            const auto got = model.forward(p, 0.4);
            const auto want = reference_forward(model, input);
            ASSERT_EQ(got.size(), want.size());
            for (std::size_t j = 0; j < got.size(); ++j) {
                EXPECT_NEAR(got[j], want[j], 1e-12);
            }
        }
    }
}

TEST(Model, RowResultIndependentOfBatch)
{
    auto model = SurrogateModel::init(4, 3, 9);
    Rng rng(5);
    const std::size_t rows = 11;
    std::vector<double> inputs(rows * 5);
    for (auto& v : inputs) {
        v = uniform_unit(rng);
    }
    std::vector<double> batch(rows * 3);
    model.forward_batch(inputs, rows, batch);
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<double> single(3);
        model.forward_batch(std::span<const double>(inputs.data() + r * 5, 5), 1, single);
        for (std::size_t j = 0; j < 3; ++j) {
            EXPECT_EQ(single[j], batch[r * 3 + j]) << "row " << r;
        }
    }
}

TEST(Model, ForwardRejectsDimensionMismatch)
{
    auto model = SurrogateModel::init(4, 2, 0);
    EXPECT_THROW(model.forward(mixspace::uniform_mixture(3), 0.5), DomainError);
}

TEST(Gradient, MatchesCentralFiniteDifferences)
{
    const double h = 1e-5;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        auto model = SurrogateModel::init(3, 2, seed, 8, 6);
        auto flat = model.flatten();
        Rng rng(seed + 100);
        for (auto& v : flat) {
            v += 0.05 * uniform_real(rng, -1.0, 1.0); // move biases off zero
        }
        model.assign(flat);
        const auto data = TrainingSet::from_samples(random_samples(3, 2, 6, 12, seed));
        const auto analytic = loss_and_gradient(model, data);
        for (std::size_t i = 0; i < flat.size(); ++i) {
            auto plus = flat;
            auto minus = flat;
            plus[i] += h;
            minus[i] -= h;
            SurrogateModel mp = model;
            SurrogateModel mm = model;
            mp.assign(plus);
            mm.assign(minus);
            const double numeric = (mse_loss(mp, data) - mse_loss(mm, data)) / (2 * h);
            const double scale = std::max({std::abs(numeric), std::abs(analytic.gradient[i]), 1e-7});
            EXPECT_LT(std::abs(numeric - analytic.gradient[i]) / scale, 1e-4) << "parameter " << i;
        }
    }
}

TEST(Training, MemorizesRepeatedSample)
{
    auto one = SamplePoint::make(LatticePoint({2, 1, 1}, 4), 50, 100, {0.3, 0.8});
    std::vector<SamplePoint> samples(4, one);
    TrainConfig cfg = TrainConfig::fast();
    cfg.steps = 2000;
    auto result = fit_surrogate(samples, cfg);
    EXPECT_LT(result.final_loss, 1e-6);
    EXPECT_TRUE(result.model.trained);
}

TEST(Training, DeterministicPerSeed)
{
    auto samples = random_samples(4, 3, 6, 30, 1);
    TrainConfig cfg = TrainConfig::fast();
    cfg.steps = 200;
    cfg.seed = 4;
    auto a = fit_surrogate(samples, cfg).model;
    auto b = fit_surrogate(samples, cfg).model;
    EXPECT_EQ(a.flatten(), b.flatten());
    EXPECT_EQ(a.checksum(), b.checksum());
}

TEST(Training, IndependentOfHeapLayout)
{
    auto samples = random_samples(5, 4, 8, 40, 9);
    TrainConfig cfg = TrainConfig::fast();
    cfg.steps = 100;
    const auto reference = fit_surrogate(samples, cfg).model.checksum();
    std::vector<std::vector<double>> padding;
    for (std::size_t shift = 1; shift <= 8; ++shift) {
        padding.emplace_back(shift * 3, 1.0);
        auto copy = samples;
        EXPECT_EQ(fit_surrogate(copy, cfg).model.checksum(), reference) << "shift " << shift;
    }
}

TEST(Training, ReferenceConfigDoesNotIncreaseLoss)
{
    auto samples = random_samples(4, 3, 6, 40, 2);
    auto result = fit_surrogate(samples, TrainConfig::reference());
    EXPECT_LE(result.final_loss, result.initial_loss);
    EXPECT_TRUE(result.model.all_finite());
    EXPECT_EQ(result.model.config, TrainConfig::reference());
}

TEST(Training, RejectsInconsistentInputs)
{
    auto samples = random_samples(4, 3, 6, 10, 3);
    EXPECT_THROW(train(SurrogateModel::init(5, 3, 0), samples, TrainConfig::fast()), DomainError);
    EXPECT_THROW(train(SurrogateModel::init(4, 2, 0), samples, TrainConfig::fast()), DomainError);
    EXPECT_THROW(train(SurrogateModel::init(4, 3, 0), std::span(samples).first(1), TrainConfig::fast()), DomainError);
    samples[3] = SamplePoint::make(LatticePoint({1, 5}, 6), 10, 100, {0.1, 0.2, 0.3});
    EXPECT_THROW(fit_surrogate(samples, TrainConfig::fast()), DomainError);
    TrainConfig bad;
    bad.learning_rate = 0.0;
    EXPECT_THROW(bad.validate(), DomainError);
}

TEST(Training, NonFiniteLossReportsStep)
{
    auto samples = random_samples(3, 2, 6, 10, 4);
    TrainConfig cfg;
    cfg.learning_rate = 1e300;
    cfg.steps = 50;
    try {
        fit_surrogate(samples, cfg);
        FAIL() << "expected TrainingError";
    } catch (const TrainingError& e) {
        EXPECT_GT(e.step(), 0u);
        EXPECT_LT(e.step(), 50u);
    }
}

TEST(RSquared, Examples)
{
    std::vector<std::vector<double>> actual{{0.0}, {1.0}};
    EXPECT_EQ(r_squared(actual, actual), 1.0);
    EXPECT_EQ(r_squared(std::vector<std::vector<double>>{{0.5}, {0.5}}, actual), 0.0);
    EXPECT_DOUBLE_EQ(r_squared(std::vector<std::vector<double>>{{0.25}, {0.75}}, actual), 0.75);
}

TEST(RSquared, MultiOutputAndErrors)
{
    std::vector<std::vector<double>> actual{{0.1, 0.9}, {0.4, 0.2}, {0.8, 0.5}};
    EXPECT_EQ(r_squared(actual, actual), 1.0);
    std::vector<std::vector<double>> means{{13.0 / 30, 1.6 / 3}, {13.0 / 30, 1.6 / 3}, {13.0 / 30, 1.6 / 3}};
    EXPECT_NEAR(r_squared(means, actual), 0.0, 1e-12);
    std::vector<std::vector<double>> far{{5.0, -5.0}, {5.0, -5.0}, {5.0, -5.0}};
    EXPECT_LT(r_squared(far, actual), -10.0);

    std::vector<std::vector<double>> flat{{0.3}, {0.3}};
    EXPECT_THROW(r_squared(flat, flat), DomainError);
    EXPECT_THROW(r_squared(std::vector<std::vector<double>>{{0.1}}, std::vector<std::vector<double>>{{0.1}}),
                 DomainError);
}

TEST(CrossValidation, OneMixturePerFoldWithTenMixtures)
{
    auto samples = linear_samples(10, 1);
    auto folds = assign_folds(samples, 10, 3);
    std::vector<std::set<LatticePoint>> per_fold(10);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        per_fold[folds[i]].insert(samples[i].mixture);
    }
    for (const auto& f : per_fold) {
        EXPECT_EQ(f.size(), 1u);
    }
}

TEST(CrossValidation, GroupsCheckpointsOfAMixture)
{
    auto samples = linear_samples(40, 2);
    auto folds = assign_folds(samples, 10, 4);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = 0; j < samples.size(); ++j) {
            if (samples[i].mixture == samples[j].mixture) {
                EXPECT_EQ(folds[i], folds[j]);
            }
        }
    }
    EXPECT_EQ(folds, assign_folds(samples, 10, 4));
}

TEST(CrossValidation, RejectsTooFewMixtures)
{
    auto samples = linear_samples(5, 3);
    EXPECT_THROW(cross_validate(samples, 10, TrainConfig::fast(), 0), DomainError);
}

TEST(CrossValidation, RecoversAffineFunction)
{
    auto samples = linear_samples(100, 5, 20);
    TrainConfig cfg = TrainConfig::fast();
    cfg.learning_rate = 3e-3;
    cfg.steps = 3000;
    auto a = cross_validate(samples, 10, cfg, 11);
    EXPECT_GE(a.mean_r2, 0.99);
    auto b = cross_validate(samples, 10, cfg, 11);
    EXPECT_EQ(a.fold_r2, b.fold_r2);
    EXPECT_EQ(a.sample_fold, b.sample_fold);
}
