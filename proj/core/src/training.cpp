#include "damo/error.hpp"
#include "damo/surrogate.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace damo::surrogate {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::RowVectorXd>;
using ConstVectorMap = Eigen::Map<const Eigen::RowVectorXd>;

struct LayerShape {
    std::size_t inputs;
    std::size_t outputs;
    std::size_t weight_offset;
    std::size_t bias_offset;
};

std::vector<LayerShape> layer_shapes(const SurrogateModel& model)
{
    std::vector<LayerShape> shapes;
    std::size_t offset = 0;
    for (const auto& layer : model.layers()) {
        LayerShape s{layer.inputs, layer.outputs, offset, offset + layer.inputs * layer.outputs};
        offset = s.bias_offset + layer.outputs;
        shapes.push_back(s);
    }
    return shapes;
}

// Forward and backward pass over flat parameters. Returns the loss; fills
// `grad` when non-null. `theta` and `grad` must be Eigen-owned storage, like
// every other buffer here, so each map has the same packet alignment on every run.
class Backprop {
public:
    Backprop(const SurrogateModel& model, const TrainingSet& data)
        : shapes_(layer_shapes(model))
        , x_(ConstMatrixMap(data.inputs.data(), static_cast<Eigen::Index>(data.rows),
                            static_cast<Eigen::Index>(data.input_dims)))
        , y_(ConstMatrixMap(data.targets.data(), static_cast<Eigen::Index>(data.rows),
                            static_cast<Eigen::Index>(data.tasks)))
    {
        if (data.input_dims != model.input_dims()) {
            throw DomainError("training: samples have " + std::to_string(data.input_dims - 1) +
                              " mixture entries, model expects " + std::to_string(model.mixture_dims()));
        }
        if (data.tasks != model.tasks()) {
            throw DomainError("training: samples have " + std::to_string(data.tasks) + " tasks, model predicts " +
                              std::to_string(model.tasks()));
        }
    }

    double run(const double* theta, double* grad)
    {
        const auto& s1 = shapes_[0];
        const auto& s2 = shapes_[1];
        const auto& s3 = shapes_[2];
        auto w = [&](const LayerShape& s) {
            return ConstMatrixMap(theta + s.weight_offset, static_cast<Eigen::Index>(s.inputs),
                                  static_cast<Eigen::Index>(s.outputs));
        };
        auto b = [&](const LayerShape& s) {
            return ConstVectorMap(theta + s.bias_offset, static_cast<Eigen::Index>(s.outputs));
        };

        z1_.noalias() = x_ * w(s1);
        z1_.rowwise() += b(s1);
        a1_ = z1_.cwiseMax(0.0);
        z2_.noalias() = a1_ * w(s2);
        z2_.rowwise() += b(s2);
        a2_ = z2_.cwiseMax(0.0);
        out_.noalias() = a2_ * w(s3);
        out_.rowwise() += b(s3);

        diff_ = out_ - y_;
        const double count = static_cast<double>(diff_.size());
        const double loss = diff_.squaredNorm() / count;
        if (grad == nullptr) {
            return loss;
        }

        auto gw = [&](const LayerShape& s) {
            return MatrixMap(grad + s.weight_offset, static_cast<Eigen::Index>(s.inputs),
                             static_cast<Eigen::Index>(s.outputs));
        };
        auto gb = [&](const LayerShape& s) {
            return VectorMap(grad + s.bias_offset, static_cast<Eigen::Index>(s.outputs));
        };

        diff_ *= 2.0 / count;
        gw(s3).noalias() = a2_.transpose() * diff_;
        gb(s3) = diff_.colwise().sum();

        d2_.noalias() = diff_ * w(s3).transpose();
        d2_.array() *= (z2_.array() > 0.0).cast<double>();
        gw(s2).noalias() = a1_.transpose() * d2_;
        gb(s2) = d2_.colwise().sum();

        d1_.noalias() = d2_ * w(s2).transpose();
        d1_.array() *= (z1_.array() > 0.0).cast<double>();
        gw(s1).noalias() = x_.transpose() * d1_;
        gb(s1) = d1_.colwise().sum();
        return loss;
    }

private:
    std::vector<LayerShape> shapes_;
    RowMatrix x_;
    RowMatrix y_;
    RowMatrix z1_, a1_, z2_, a2_, out_, diff_, d1_, d2_;
};

Eigen::VectorXd aligned_parameters(const SurrogateModel& model)
{
    const std::vector<double> flat = model.flatten();
    return Eigen::Map<const Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

} // namespace

LossAndGradient loss_and_gradient(const SurrogateModel& model, const TrainingSet& data)
{
    const Eigen::VectorXd theta = aligned_parameters(model);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
    Backprop pass(model, data);
    LossAndGradient result;
    result.loss = pass.run(theta.data(), grad.data());
    result.gradient.assign(grad.begin(), grad.end());
    return result;
}

double mse_loss(const SurrogateModel& model, const TrainingSet& data)
{
    const Eigen::VectorXd theta = aligned_parameters(model);
    Backprop pass(model, data);
    return pass.run(theta.data(), nullptr);
}

TrainResult train_detailed(SurrogateModel model, std::span<const SamplePoint> samples, const TrainConfig& cfg)
{
    cfg.validate();
    if (samples.size() < 2) {
        throw DomainError("training: at least two samples are required");
    }
    const TrainingSet data = TrainingSet::from_samples(samples);
    Backprop pass(model, data);

    Eigen::VectorXd theta = aligned_parameters(model);
    const Eigen::Index n = theta.size();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd first = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd second = Eigen::VectorXd::Zero(n);

    TrainResult result;
    double beta1_power = 1.0;
    double beta2_power = 1.0;
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        const double loss = pass.run(theta.data(), grad.data());
        if (!std::isfinite(loss)) {
            throw TrainingError("training loss became non-finite", step);
        }
        if (step == 0) {
            result.initial_loss = loss;
        }
        beta1_power *= cfg.beta1;
        beta2_power *= cfg.beta2;
        first = cfg.beta1 * first + (1.0 - cfg.beta1) * grad;
        second = cfg.beta2 * second + (1.0 - cfg.beta2) * grad.cwiseAbs2();
        const double step_size = cfg.learning_rate / (1.0 - beta1_power);
        const double second_scale = 1.0 / (1.0 - beta2_power);
        theta.array() -= step_size * first.array() / ((second.array() * second_scale).sqrt() + cfg.epsilon);
    }
    result.final_loss = pass.run(theta.data(), nullptr);
    if (!std::isfinite(result.final_loss)) {
        throw TrainingError("training loss became non-finite", cfg.steps);
    }

    model.assign(std::span<const double>(theta.data(), static_cast<std::size_t>(n)));
    if (!model.all_finite()) {
        throw TrainingError("non-finite parameter after training", cfg.steps);
    }
    model.trained = true;
    model.config = cfg;
    if (!samples.front().model_id.empty()) {
        model.base_model_id = samples.front().model_id;
    }
    result.model = std::move(model);
    return result;
}

SurrogateModel train(SurrogateModel model, std::span<const SamplePoint> samples, const TrainConfig& cfg)
{
    return train_detailed(std::move(model), samples, cfg).model;
}

TrainResult fit_surrogate(std::span<const SamplePoint> samples, const TrainConfig& cfg)
{
    if (samples.empty()) {
        throw DomainError("training: at least two samples are required");
    }
    auto model = SurrogateModel::init(samples.front().mixture_dims(), samples.front().tasks(), cfg.seed);
    return train_detailed(std::move(model), samples, cfg);
}

} // namespace damo::surrogate
