#pragma once

// MLP surrogate f(p, t) -> per-task scores: model, training, R^2 and grouped
// k-fold cross-validation.

#include "damo/mixspace.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace damo::surrogate {

using mixspace::LatticePoint;
using mixspace::MixtureProportion;

/// One observed checkpoint: mixture, training step, per-task scores.
struct SamplePoint {
    LatticePoint mixture;
    MixtureProportion proportions;
    std::uint32_t step = 0;
    std::uint32_t total_steps = 0;
    double step_norm = 0.0;
    std::vector<double> scores;
    std::string model_id;
    std::string run_id;

    /// Derives proportions and step_norm; throws DomainError on a step outside
    /// (0, T] or a score outside [0, 1].
    static SamplePoint make(LatticePoint mixture, std::uint32_t step, std::uint32_t total_steps,
                            std::vector<double> scores, std::string model_id = {}, std::string run_id = {});

    std::size_t mixture_dims() const noexcept { return mixture.dims(); }
    std::size_t tasks() const noexcept { return scores.size(); }
};

/// Full-batch Adam on mean squared error.
struct TrainConfig {
    double learning_rate = 1e-6;
    std::size_t steps = 1500;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;

    /// lr 1e-6, 1500 steps.
    static TrainConfig reference();
    /// lr 1e-3, 5000 steps; converges on unit-scaled data.
    static TrainConfig fast();

    void validate() const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Fully connected layer; weights stored input-major: weights[i * outputs + j].
struct DenseLayer {
    std::size_t inputs = 0;
    std::size_t outputs = 0;
    std::vector<double> weights;
    std::vector<double> bias;

    double weight(std::size_t i, std::size_t j) const { return weights[i * outputs + j]; }
    double& weight(std::size_t i, std::size_t j) { return weights[i * outputs + j]; }
};

/// (m+1) -> h1 -> h2 -> k, ReLU on hidden layers, linear output. The extra
/// input is the normalized step t/T.
class SurrogateModel {
public:
    static constexpr std::size_t kDefaultHidden = 100;

    SurrogateModel() = default;

    /// Fan-in scaled uniform weights, zero biases; deterministic per seed.
    static SurrogateModel init(std::size_t m, std::size_t k, std::uint64_t seed,
                               std::size_t hidden1 = kDefaultHidden, std::size_t hidden2 = kDefaultHidden);

    /// All weights and biases zero.
    static SurrogateModel zeros(std::size_t m, std::size_t k, std::size_t hidden1 = kDefaultHidden,
                                std::size_t hidden2 = kDefaultHidden);

    /// Builds a model from explicit layers; throws DomainError if shapes do not chain.
    static SurrogateModel from_layers(std::vector<DenseLayer> layers);

    std::size_t mixture_dims() const noexcept { return layers_.empty() ? 0 : layers_.front().inputs - 1; }
    std::size_t input_dims() const noexcept { return layers_.empty() ? 0 : layers_.front().inputs; }
    std::size_t tasks() const noexcept { return layers_.empty() ? 0 : layers_.back().outputs; }
    std::size_t parameter_count() const noexcept;

    const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
    std::vector<DenseLayer>& layers() noexcept { return layers_; }

    /// Raw (unclamped) prediction.
    std::vector<double> forward(const MixtureProportion& p, double step_norm) const;

    /// Raw predictions for `rows` inputs laid out row-major (rows x input_dims)
    /// into `out` (rows x tasks). Every row is computed by the same kernel,
    /// so a row's result does not depend on the batch it was evaluated in.
    void forward_batch(std::span<const double> inputs, std::size_t rows, std::span<double> out) const;

    /// Parameters in layer order: W1, b1, W2, b2, W3, b3.
    std::vector<double> flatten() const;
    void assign(std::span<const double> parameters);
    bool all_finite() const;

    /// 64-bit FNV-1a over dims and parameter bit patterns.
    std::uint64_t checksum() const;

    bool trained = false;
    std::uint64_t seed = 0;
    TrainConfig config;
    std::string base_model_id;

private:
    std::vector<DenseLayer> layers_;
};

/// Clamp each entry to [0, 1]. Applied at reporting and ranking boundaries only.
std::vector<double> clamp_scores(std::vector<double> scores);

/// Row-major design matrix and targets built from samples.
struct TrainingSet {
    std::size_t rows = 0;
    std::size_t input_dims = 0;
    std::size_t tasks = 0;
    std::vector<double> inputs;  // rows x input_dims: proportions then step_norm
    std::vector<double> targets; // rows x tasks

    static TrainingSet from_samples(std::span<const SamplePoint> samples);
};

struct LossAndGradient {
    double loss = 0.0;
    std::vector<double> gradient; // same order as SurrogateModel::flatten()
};

/// MSE over all rows and tasks, and its analytic gradient.
LossAndGradient loss_and_gradient(const SurrogateModel& model, const TrainingSet& data);

/// MSE only.
double mse_loss(const SurrogateModel& model, const TrainingSet& data);

struct TrainResult {
    SurrogateModel model;
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

/// Trains a freshly initialized model (seeded by cfg.seed) on samples.
TrainResult fit_surrogate(std::span<const SamplePoint> samples, const TrainConfig& cfg);

/// Continues training `model`. Throws DomainError on dimension mismatch or
/// fewer than 2 samples, TrainingError on a non-finite loss.
TrainResult train_detailed(SurrogateModel model, std::span<const SamplePoint> samples, const TrainConfig& cfg);

SurrogateModel train(SurrogateModel model, std::span<const SamplePoint> samples, const TrainConfig& cfg);

/// 1 - SS_res / SS_tot pooled over every entry, SS_tot taken about per-task means.
/// Throws DomainError on length mismatch, fewer than 2 rows, or zero total variance.
double r_squared(std::span<const std::vector<double>> predicted, std::span<const std::vector<double>> actual);

struct CrossValidationResult {
    std::vector<double> fold_r2;
    double mean_r2 = 0.0;
    std::vector<std::size_t> sample_fold; // fold index of every input sample
};

/// Fold of each sample. Distinct mixtures are shuffled with `seed` and dealt
/// round-robin, so all checkpoints of a mixture share a fold.
std::vector<std::size_t> assign_folds(std::span<const SamplePoint> samples, std::size_t folds, std::uint64_t seed);

/// Out-of-fold R^2 per fold. Folds train concurrently on the worker pool.
CrossValidationResult cross_validate(std::span<const SamplePoint> samples, std::size_t folds,
                                     const TrainConfig& cfg, std::uint64_t seed);

} // namespace damo::surrogate
