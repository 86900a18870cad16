#include "damo/surrogate.hpp"

#include "damo/error.hpp"
#include "damo/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

namespace damo::surrogate {

namespace {

constexpr std::size_t kBlock = 4;

DenseLayer make_layer(std::size_t inputs, std::size_t outputs)
{
    DenseLayer layer;
    layer.inputs = inputs;
    layer.outputs = outputs;
    layer.weights.assign(inputs * outputs, 0.0);
    layer.bias.assign(outputs, 0.0);
    return layer;
}

// out[r] = act(in[r] . W + bias) for exactly kBlock rows. Each row's
// accumulation runs over inputs in the same order with the same statements,
// so its result is independent of the other rows in the block.
template <bool Relu>
void dense_block(const DenseLayer& layer, const double* in, double* out)
{
    const std::size_t n_in = layer.inputs;
    const std::size_t n_out = layer.outputs;
    double* o0 = out;
    double* o1 = out + n_out;
    double* o2 = out + 2 * n_out;
    double* o3 = out + 3 * n_out;
    const double* bias = layer.bias.data();
    for (std::size_t j = 0; j < n_out; ++j) {
        o0[j] = bias[j];
        o1[j] = bias[j];
        o2[j] = bias[j];
        o3[j] = bias[j];
    }
    for (std::size_t i = 0; i < n_in; ++i) {
        const double* w = layer.weights.data() + i * n_out;
        const double x0 = in[i];
        const double x1 = in[n_in + i];
        const double x2 = in[2 * n_in + i];
        const double x3 = in[3 * n_in + i];
        for (std::size_t j = 0; j < n_out; ++j) {
            const double wj = w[j];
            o0[j] += x0 * wj;
            o1[j] += x1 * wj;
            o2[j] += x2 * wj;
            o3[j] += x3 * wj;
        }
    }
    if constexpr (Relu) {
        for (std::size_t j = 0; j < kBlock * n_out; ++j) {
            out[j] = out[j] > 0.0 ? out[j] : 0.0;
        }
    }
}

void fnv_mix(std::uint64_t& h, std::uint64_t word)
{
    for (int byte = 0; byte < 8; ++byte) {
        h ^= (word >> (8 * byte)) & 0xffULL;
        h *= 0x100000001b3ULL;
    }
}

} // namespace

SamplePoint SamplePoint::make(LatticePoint mixture, std::uint32_t step, std::uint32_t total_steps,
                              std::vector<double> scores, std::string model_id, std::string run_id)
{
    if (total_steps == 0 || step == 0 || step > total_steps) {
        throw DomainError("sample point: step " + std::to_string(step) + " outside (0, " +
                          std::to_string(total_steps) + "]");
    }
    if (scores.empty()) {
        throw DomainError("sample point: at least one task score is required");
    }
    for (double s : scores) {
        if (!(s >= 0.0 && s <= 1.0)) {
            throw DomainError("sample point: scores must lie in [0, 1]");
        }
    }
    SamplePoint sp;
    sp.proportions = mixspace::to_proportions(mixture);
    sp.mixture = std::move(mixture);
    sp.step = step;
    sp.total_steps = total_steps;
    sp.step_norm = static_cast<double>(step) / static_cast<double>(total_steps);
    sp.scores = std::move(scores);
    sp.model_id = std::move(model_id);
    sp.run_id = std::move(run_id);
    return sp;
}

TrainConfig TrainConfig::reference()
{
    return TrainConfig{};
}

TrainConfig TrainConfig::fast()
{
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.steps = 5000;
    return cfg;
}

void TrainConfig::validate() const
{
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw DomainError("train config: learning rate must be positive");
    }
    if (steps < 1) {
        throw DomainError("train config: steps must be >= 1");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw DomainError("train config: Adam betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) {
        throw DomainError("train config: epsilon must be positive");
    }
}

SurrogateModel SurrogateModel::zeros(std::size_t m, std::size_t k, std::size_t hidden1, std::size_t hidden2)
{
    if (m == 0 || k == 0 || hidden1 == 0 || hidden2 == 0) {
        throw DomainError("surrogate: all layer dimensions must be >= 1");
    }
    std::vector<DenseLayer> layers;
    layers.push_back(make_layer(m + 1, hidden1));
    layers.push_back(make_layer(hidden1, hidden2));
    layers.push_back(make_layer(hidden2, k));
    return from_layers(std::move(layers));
}

SurrogateModel SurrogateModel::init(std::size_t m, std::size_t k, std::uint64_t seed, std::size_t hidden1,
                                    std::size_t hidden2)
{
    SurrogateModel model = zeros(m, k, hidden1, hidden2);
    model.seed = seed;
    for (std::size_t l = 0; l < model.layers_.size(); ++l) {
        auto& layer = model.layers_[l];
        Rng rng(derive_seed(seed, 0x5eed0000ULL + l));
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.inputs));
        for (auto& w : layer.weights) {
            w = uniform_real(rng, -limit, limit);
        }
    }
    return model;
}

SurrogateModel SurrogateModel::from_layers(std::vector<DenseLayer> layers)
{
    if (layers.size() != 3) {
        throw DomainError("surrogate: expected exactly three dense layers");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        if (layer.inputs == 0 || layer.outputs == 0 || layer.weights.size() != layer.inputs * layer.outputs ||
            layer.bias.size() != layer.outputs) {
            throw DomainError("surrogate: layer " + std::to_string(l) + " has inconsistent shape");
        }
        if (l > 0 && layers[l - 1].outputs != layer.inputs) {
            throw DomainError("surrogate: layer " + std::to_string(l) + " input does not match previous output");
        }
    }
    if (layers.front().inputs < 2) {
        throw DomainError("surrogate: input layer needs at least one mixture entry plus the step");
    }
    SurrogateModel model;
    model.layers_ = std::move(layers);
    return model;
}

std::size_t SurrogateModel::parameter_count() const noexcept
{
    std::size_t n = 0;
    for (const auto& layer : layers_) {
        n += layer.weights.size() + layer.bias.size();
    }
    return n;
}

std::vector<double> SurrogateModel::forward(const MixtureProportion& p, double step_norm) const
{
    if (p.dims() != mixture_dims()) {
        throw DomainError("surrogate forward: mixture has " + std::to_string(p.dims()) + " entries, model expects " +
                          std::to_string(mixture_dims()));
    }
    std::vector<double> input(p.values().begin(), p.values().end());
    input.push_back(step_norm);
    std::vector<double> out(tasks());
    forward_batch(input, 1, out);
    return out;
}

void SurrogateModel::forward_batch(std::span<const double> inputs, std::size_t rows, std::span<double> out) const
{
    if (layers_.empty()) {
        throw DomainError("surrogate forward: model has no layers");
    }
    const std::size_t n_in = input_dims();
    const std::size_t k = tasks();
    if (inputs.size() != rows * n_in || out.size() != rows * k) {
        throw DomainError("surrogate forward: buffer sizes do not match rows x dims");
    }
    const auto& l1 = layers_[0];
    const auto& l2 = layers_[1];
    const auto& l3 = layers_[2];

    std::vector<double> x(kBlock * n_in);
    std::vector<double> h1(kBlock * l1.outputs);
    std::vector<double> h2(kBlock * l2.outputs);
    std::vector<double> y(kBlock * k);

    for (std::size_t start = 0; start < rows; start += kBlock) {
        const std::size_t filled = std::min(kBlock, rows - start);
        for (std::size_t r = 0; r < kBlock; ++r) {
            const std::size_t src = start + std::min(r, filled - 1);
            std::memcpy(x.data() + r * n_in, inputs.data() + src * n_in, n_in * sizeof(double));
        }
        dense_block<true>(l1, x.data(), h1.data());
        dense_block<true>(l2, h1.data(), h2.data());
        dense_block<false>(l3, h2.data(), y.data());
        std::memcpy(out.data() + start * k, y.data(), filled * k * sizeof(double));
    }
}

std::vector<double> SurrogateModel::flatten() const
{
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const auto& layer : layers_) {
        out.insert(out.end(), layer.weights.begin(), layer.weights.end());
        out.insert(out.end(), layer.bias.begin(), layer.bias.end());
    }
    return out;
}

void SurrogateModel::assign(std::span<const double> parameters)
{
    if (parameters.size() != parameter_count()) {
        throw DomainError("surrogate assign: expected " + std::to_string(parameter_count()) + " parameters, got " +
                          std::to_string(parameters.size()));
    }
    std::size_t offset = 0;
    for (auto& layer : layers_) {
        std::copy_n(parameters.begin() + offset, layer.weights.size(), layer.weights.begin());
        offset += layer.weights.size();
        std::copy_n(parameters.begin() + offset, layer.bias.size(), layer.bias.begin());
        offset += layer.bias.size();
    }
}

bool SurrogateModel::all_finite() const
{
    for (const auto& layer : layers_) {
        for (double w : layer.weights) {
            if (!std::isfinite(w)) {
                return false;
            }
        }
        for (double b : layer.bias) {
            if (!std::isfinite(b)) {
                return false;
            }
        }
    }
    return true;
}

std::uint64_t SurrogateModel::checksum() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& layer : layers_) {
        fnv_mix(h, layer.inputs);
        fnv_mix(h, layer.outputs);
        for (double w : layer.weights) {
            fnv_mix(h, std::bit_cast<std::uint64_t>(w));
        }
        for (double b : layer.bias) {
            fnv_mix(h, std::bit_cast<std::uint64_t>(b));
        }
    }
    return h;
}

std::vector<double> clamp_scores(std::vector<double> scores)
{
    for (auto& s : scores) {
        s = std::clamp(s, 0.0, 1.0);
    }
    return scores;
}

TrainingSet TrainingSet::from_samples(std::span<const SamplePoint> samples)
{
    if (samples.empty()) {
        throw DomainError("training set: no samples");
    }
    TrainingSet set;
    const std::size_t m = samples.front().mixture_dims();
    set.rows = samples.size();
    set.input_dims = m + 1;
    set.tasks = samples.front().tasks();
    set.inputs.reserve(set.rows * set.input_dims);
    set.targets.reserve(set.rows * set.tasks);
    for (std::size_t r = 0; r < samples.size(); ++r) {
        const auto& s = samples[r];
        if (s.mixture_dims() != m || s.proportions.dims() != m) {
            throw DomainError("training set: sample " + std::to_string(r) + " has " +
                              std::to_string(s.mixture_dims()) + " mixture entries, expected " + std::to_string(m));
        }
        if (s.tasks() != set.tasks) {
            throw DomainError("training set: sample " + std::to_string(r) + " has " + std::to_string(s.tasks()) +
                              " scores, expected " + std::to_string(set.tasks));
        }
        const auto p = s.proportions.values();
        set.inputs.insert(set.inputs.end(), p.begin(), p.end());
        set.inputs.push_back(s.step_norm);
        set.targets.insert(set.targets.end(), s.scores.begin(), s.scores.end());
    }
    return set;
}

double r_squared(std::span<const std::vector<double>> predicted, std::span<const std::vector<double>> actual)
{
    if (predicted.size() != actual.size()) {
        throw DomainError("r_squared: predicted and actual have different lengths");
    }
    if (actual.size() < 2) {
        throw DomainError("r_squared: at least two observations are required");
    }
    const std::size_t k = actual.front().size();
    std::vector<double> mean(k, 0.0);
    for (std::size_t r = 0; r < actual.size(); ++r) {
        if (actual[r].size() != k || predicted[r].size() != k) {
            throw DomainError("r_squared: row " + std::to_string(r) + " has inconsistent width");
        }
        for (std::size_t j = 0; j < k; ++j) {
            mean[j] += actual[r][j];
        }
    }
    for (auto& v : mean) {
        v /= static_cast<double>(actual.size());
    }
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t r = 0; r < actual.size(); ++r) {
        for (std::size_t j = 0; j < k; ++j) {
            const double e = actual[r][j] - predicted[r][j];
            const double d = actual[r][j] - mean[j];
            ss_res += e * e;
            ss_tot += d * d;
        }
    }
    if (!(ss_tot > 0.0)) {
        throw DomainError("r_squared: actual values have zero total variance");
    }
    return 1.0 - ss_res / ss_tot;
}

} // namespace damo::surrogate
