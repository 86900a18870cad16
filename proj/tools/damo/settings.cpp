#include "settings.hpp"

#include "damo/error.hpp"

#include <CLI11.hpp>

#include <istream>

namespace damo::cli {

namespace {

using nlohmann::json;

std::string scalar_text(const json& v, const std::string& key)
{
    if (v.is_string()) {
        return v.get<std::string>();
    }
    if (v.is_boolean()) {
        return v.get<bool>() ? "true" : "false";
    }
    if (v.is_number()) {
        return v.dump();
    }
    throw CLI::ConversionError("config key '" + key + "' must be a string, number, boolean or array of those");
}

// Flat JSON object: {"m": 5, "steps": [250, 500], "preset": "rugged"}.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App* app, bool, bool, std::string) const override
    {
        json j = json::object();
        for (const CLI::Option* opt : app->get_options()) {
            if (opt->get_lnames().empty() || opt->count() == 0 || opt->get_lnames().front() == "config") {
                continue;
            }
            const auto& results = opt->results();
            j[opt->get_lnames().front()] = results.size() == 1 ? json(results.front()) : json(results);
        }
        return j.dump(2) + '\n';
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override
    {
        json j;
        try {
            j = json::parse(input);
        } catch (const json::parse_error& e) {
            throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) {
            throw CLI::ConversionError("config file must hold a JSON object");
        }
        std::vector<CLI::ConfigItem> items;
        for (const auto& [key, value] : j.items()) {
            if (value.is_null()) {
                continue;
            }
            CLI::ConfigItem item;
            item.name = key;
            if (value.is_array()) {
                for (const auto& v : value) {
                    item.inputs.push_back(scalar_text(v, key));
                }
            } else {
                item.inputs.push_back(scalar_text(value, key));
            }
            items.push_back(std::move(item));
        }
        return items;
    }
};

} // namespace

StepGrid Settings::grid() const
{
    if (tau == 0 || total_steps == 0) {
        throw DomainError("config: tau and total-steps must be positive");
    }
    if (total_steps % tau != 0) {
        throw DomainError("config: tau = " + std::to_string(tau) + " does not divide total-steps = " +
                          std::to_string(total_steps));
    }
    if (steps.empty()) {
        return StepGrid::every(tau, total_steps);
    }
    StepGrid g(steps, total_steps);
    if (!g.aligned_to(tau)) {
        throw DomainError("config: every entry of steps must be a multiple of tau = " + std::to_string(tau));
    }
    return g;
}

surrogate::TrainConfig Settings::train_config() const
{
    surrogate::TrainConfig cfg;
    if (train_preset == "fast") {
        cfg = surrogate::TrainConfig::fast();
    } else if (train_preset == "reference") {
        cfg = surrogate::TrainConfig::reference();
    } else {
        throw DomainError("config: unknown train-preset '" + train_preset + "' (expected fast or reference)");
    }
    if (learning_rate) {
        cfg.learning_rate = *learning_rate;
    }
    if (train_steps) {
        cfg.steps = *train_steps;
    }
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

nlohmann::json Settings::to_json() const
{
    json j{{"m", m},
           {"k", k},
           {"b", b},
           {"total-steps", total_steps},
           {"tau", tau},
           {"steps", steps},
           {"mixtures", mixtures},
           {"seed", seed},
           {"folds", folds},
           {"top-k", top_k},
           {"preset", preset},
           {"mode", mode},
           {"kernel", kernel},
           {"train-preset", train_preset},
           {"noise", noise},
           {"budget", budget},
           {"shards", shards}};
    j["lr"] = learning_rate ? json(*learning_rate) : json(nullptr);
    j["train-steps"] = train_steps ? json(*train_steps) : json(nullptr);
    j["fit-step"] = fit_step ? json(*fit_step) : json(nullptr);
    if (!scale.empty() || !offset.empty()) {
        j["scale"] = scale;
        j["offset"] = offset;
    }
    return j;
}

void bind_options(CLI::App& app, Settings& s)
{
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON run configuration; flags override its values");
    app.allow_config_extras(CLI::config_extras_mode::error);

    app.add_option("--m", s.m, "Number of datasets")->capture_default_str()->group("Problem");
    app.add_option("--k", s.k, "Number of evaluation tasks")->capture_default_str()->group("Problem");
    app.add_option("--b", s.b, "Batch size (lattice resolution)")->capture_default_str()->group("Problem");
    app.add_option("--total-steps", s.total_steps, "Training steps T of one run")->capture_default_str()->group("Problem");
    app.add_option("--tau", s.tau, "Checkpoint interval; must divide T")->capture_default_str()->group("Problem");
    app.add_option("--steps", s.steps, "Explicit checkpoint steps (comma list, multiples of tau)")
        ->delimiter(',')
        ->group("Problem");
    app.add_option("--mixtures", s.mixtures, "Mixtures to sample for the experiment plan")
        ->capture_default_str()
        ->group("Problem");
    app.add_option("--seed", s.seed, "Seed for sampling, oracle generation and training")->capture_default_str();

    app.add_option("--folds", s.folds, "Cross-validation folds")->capture_default_str()->group("Surrogate");
    app.add_option("--train-preset", s.train_preset, "fast (lr 1e-3, 5000 steps) or reference (lr 1e-6, 1500 steps)")
        ->capture_default_str()
        ->group("Surrogate");
    app.add_option("--lr", s.learning_rate, "Override the learning rate")->group("Surrogate");
    app.add_option("--train-steps", s.train_steps, "Override the number of Adam steps")->group("Surrogate");
    app.add_option("--top-k", s.top_k, "Mixtures to keep from the sweep")->capture_default_str()->group("Surrogate");
    app.add_option("--shards", s.shards, "Lattice shards for sweeps (0: one per worker)")->group("Surrogate");

    app.add_option("--preset", s.preset, "Oracle preset: smooth or rugged")->capture_default_str()->group("Oracle");
    app.add_option("--kernel", s.kernel, "Use one interaction kind for every dataset/task pair")->group("Oracle");
    app.add_option("--base-oracle", s.base_oracle, "Derive an affine target from this oracle")->group("Oracle");
    app.add_option("--scale", s.scale, "Per-task target scales (comma list)")->delimiter(',')->group("Oracle");
    app.add_option("--offset", s.offset, "Per-task target offsets (comma list)")->delimiter(',')->group("Oracle");
    app.add_option("--noise", s.noise, "Target noise amplitude")->group("Oracle");
    app.add_option("--budget", s.budget, "Evaluation budget for brute force")->capture_default_str()->group("Oracle");

    app.add_option("--mode", s.mode, "Calibration mode: diagonal or full")->capture_default_str()->group("Calibration");
    app.add_option("--fit-step", s.fit_step, "Checkpoint the exponential law is fitted at (default: last)")
        ->group("Baselines");

    app.add_option("--scores", s.scores, "Per-task scores (comma list)")->delimiter(',')->group("Metrics");
    app.add_option("--weights", s.weights, "Per-task weights (comma list)")->delimiter(',')->group("Metrics");
    app.add_option("--nodes", s.nodes, "Plan graph node count")->group("Metrics");
    app.add_option("--edges", s.edges, "Plan graph edge count")->group("Metrics");

    app.add_option("--oracle", s.oracle, "Oracle file")->group("Inputs");
    app.add_option("--plan", s.plan, "Experiment plan file")->group("Inputs");
    app.add_option("--samples", s.samples, "Sample record file")->group("Inputs");
    app.add_option("--model", s.model, "Surrogate model file")->group("Inputs");
    app.add_option("--calibration", s.calibration, "Calibration map file")->group("Inputs");
    app.add_option("--catalog", s.catalog, "Dataset catalog (JSON)")->group("Inputs");
    app.add_option("--queries", s.queries, "Text file, one query per line")->group("Inputs");

    app.add_option("--out", s.out, "Primary output file")->group("Outputs");
    app.add_option("--report", s.report, "Report file for commands whose --out is an artifact")->group("Outputs");
    app.add_option("--csv", s.csv, "Also write plot-ready CSV points")->group("Outputs");
    app.add_flag("--timing", s.timing, "Record wall time in the report (breaks byte-identical reruns)")
        ->group("Outputs");
}

} // namespace damo::cli
