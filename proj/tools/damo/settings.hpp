#pragma once

#include "damo/step_grid.hpp"
#include "damo/surrogate.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace CLI {
class App;
}

namespace damo::cli {

/// Effective run configuration: built-in defaults, then the --config file,
/// then command-line flags.
struct Settings {
    std::size_t m = 5;
    std::size_t k = 4;
    std::uint32_t b = 8;
    std::uint32_t total_steps = 1000;
    std::uint32_t tau = 250;
    std::vector<std::uint32_t> steps; // empty: {tau, 2 tau, ..., T}
    std::size_t mixtures = 250;
    std::uint64_t seed = 0;
    std::size_t folds = 10;
    std::size_t top_k = 50;
    std::string preset = "smooth";
    std::string mode = "diagonal";
    std::string kernel;
    std::string train_preset = "fast";
    std::optional<double> learning_rate;
    std::optional<std::size_t> train_steps;
    std::optional<std::uint32_t> fit_step;
    std::vector<double> scale;
    std::vector<double> offset;
    double noise = 0.0;
    std::vector<double> scores;
    std::vector<double> weights;
    std::optional<std::size_t> nodes;
    std::size_t edges = 0;
    std::uint64_t budget = 10'000'000;
    std::size_t shards = 0;
    bool timing = false;

    std::string oracle;
    std::string base_oracle;
    std::string plan;
    std::string samples;
    std::string model;
    std::string calibration;
    std::string catalog;
    std::string queries;
    std::string out;
    std::string report;
    std::string csv;

    std::string baseline_kind;

    /// Throws DomainError if tau does not divide T or a listed step is not a multiple of tau.
    StepGrid grid() const;
    surrogate::TrainConfig train_config() const;

    /// Non-path settings; paths are covered by input checksums instead.
    nlohmann::json to_json() const;
};

/// Registers every option on `app` bound to fields of `s`, plus the JSON --config reader.
void bind_options(CLI::App& app, Settings& s);

} // namespace damo::cli
