#include "damo/error.hpp"
#include "damo/parallel.hpp"
#include "damo/random.hpp"
#include "damo/surrogate.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace damo::surrogate {

std::vector<std::size_t> assign_folds(std::span<const SamplePoint> samples, std::size_t folds, std::uint64_t seed)
{
    if (folds < 2) {
        throw DomainError("cross-validation: at least two folds are required");
    }
    // Distinct mixtures in lexicographic order, so the assignment does not
    // depend on sample order.
    std::map<std::vector<std::uint32_t>, std::size_t> group_of;
    for (const auto& s : samples) {
        group_of.emplace(s.mixture.counts(), 0);
    }
    if (group_of.size() < folds) {
        throw DomainError("cross-validation: " + std::to_string(group_of.size()) + " distinct mixtures for " +
                          std::to_string(folds) + " folds");
    }
    std::vector<std::size_t> order(group_of.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, 0xf01dULL));
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }
    std::vector<std::size_t> fold_of_group(order.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        fold_of_group[order[pos]] = pos % folds;
    }
    std::size_t g = 0;
    for (auto& [counts, index] : group_of) {
        index = g++;
    }
    std::vector<std::size_t> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        out.push_back(fold_of_group[group_of.at(s.mixture.counts())]);
    }
    return out;
}

CrossValidationResult cross_validate(std::span<const SamplePoint> samples, std::size_t folds,
                                     const TrainConfig& cfg, std::uint64_t seed)
{
    cfg.validate();
    if (!samples.empty()) {
        TrainingSet::from_samples(samples); // dimension consistency
    }
    CrossValidationResult result;
    result.sample_fold = assign_folds(samples, folds, seed);
    result.fold_r2.assign(folds, 0.0);

    parallel_for(folds, worker_count(), [&](std::size_t fold) {
        std::vector<SamplePoint> train_set;
        std::vector<const SamplePoint*> held_out;
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (result.sample_fold[i] == fold) {
                held_out.push_back(&samples[i]);
            } else {
                train_set.push_back(samples[i]);
            }
        }
        TrainConfig fold_cfg = cfg;
        fold_cfg.seed = derive_seed(cfg.seed, fold);
        const SurrogateModel model = fit_surrogate(train_set, fold_cfg).model;

        std::vector<std::vector<double>> predicted;
        std::vector<std::vector<double>> actual;
        for (const SamplePoint* s : held_out) {
            predicted.push_back(model.forward(s->proportions, s->step_norm));
            actual.push_back(s->scores);
        }
        result.fold_r2[fold] = r_squared(predicted, actual);
    });

    result.mean_r2 = std::accumulate(result.fold_r2.begin(), result.fold_r2.end(), 0.0) /
                     static_cast<double>(folds);
    return result;
}

} // namespace damo::surrogate
