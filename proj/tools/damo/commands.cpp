#include "commands.hpp"

#include "damo/calibrate.hpp"
#include "damo/error.hpp"
#include "damo/lawfit.hpp"
#include "damo/metrics.hpp"
#include "damo/optimizer.hpp"
#include "damo/records.hpp"
#include "damo/simdyn.hpp"

#include <cstdio>
#include <optional>
#include <set>
#include <sstream>

namespace damo::cli {

namespace {

using nlohmann::json;

std::string require_path(const std::string& path, const char* flag, const char* command)
{
    if (path.empty()) {
        throw DomainError(std::string(command) + ": " + flag + " is required");
    }
    return path;
}

std::string load(const std::string& path, const char* flag, const char* command, const char* role, Report& report)
{
    std::string bytes = records::read_file(require_path(path, flag, command));
    report.input(role, bytes);
    return bytes;
}

template <class Reader>
auto parse(const std::string& bytes, Reader reader)
{
    std::istringstream in(bytes);
    return reader(in);
}

template <class Writer, class T>
void save(const std::string& path, Writer writer, const T& value)
{
    std::ostringstream out;
    writer(out, value);
    records::write_file_atomic(path, out.str());
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json proportions_json(const mixspace::MixtureProportion& p)
{
    return json(std::vector<double>(p.values().begin(), p.values().end()));
}

// Best true overall average of a mixture over the grid; ties to the earliest step.
std::pair<std::uint32_t, double> true_best(const simdyn::OracleSpec& spec, const mixspace::MixtureProportion& p,
                                           const StepGrid& grid)
{
    std::uint32_t step = grid[0];
    double best = simdyn::oracle_average(spec, p, grid[0], grid.total_steps());
    for (std::size_t g = 1; g < grid.size(); ++g) {
        const double v = simdyn::oracle_average(spec, p, grid[g], grid.total_steps());
        if (v > best) {
            best = v;
            step = grid[g];
        }
    }
    return {step, best};
}

// Folds g = f W + b into the output layer so the sweep ranks calibrated scores.
surrogate::SurrogateModel compose(surrogate::SurrogateModel model, const calibrate::CalibrationMap& map)
{
    if (map.k != model.tasks()) {
        throw DomainError("extrapolate: calibration map has k = " + std::to_string(map.k) + ", model has " +
                          std::to_string(model.tasks()) + " tasks");
    }
    auto& last = model.layers().back();
    const std::size_t k = map.k;
    std::vector<double> weights(last.inputs * k, 0.0);
    std::vector<double> bias(map.bias);
    for (std::size_t i = 0; i < last.inputs; ++i) {
        for (std::size_t l = 0; l < k; ++l) {
            const double w = last.weight(i, l);
            for (std::size_t j = 0; j < k; ++j) {
                weights[i * k + j] += w * map.weight(l, j);
            }
        }
    }
    for (std::size_t l = 0; l < k; ++l) {
        for (std::size_t j = 0; j < k; ++j) {
            bias[j] += last.bias[l] * map.weight(l, j);
        }
    }
    last.weights = std::move(weights);
    last.bias = std::move(bias);
    return model;
}

std::string csv_number(double v)
{
    return json(v).dump();
}

} // namespace

Report::Report(std::string command, const Settings& settings)
    : command_(std::move(command))
    , config_(settings.to_json())
{
}

void Report::input(const std::string& role, std::string_view bytes)
{
    inputs_[role] = records::checksum_string(bytes);
}

std::string Report::text() const
{
    json header{{"schema", kReportSchema}, {"version", records::kSchemaVersion}, {"command", command_}};
    json body{{"config", config_}, {"inputs", inputs_}, {"result", result_}};
    if (wall_seconds_ >= 0.0) {
        body["wall_seconds"] = wall_seconds_;
    }
    std::string text = header.dump() + '\n' + body.dump() + '\n';
    for (const auto& item : items_) {
        text += item.dump() + '\n';
    }
    return text;
}

bool writes_artifact(std::string_view command)
{
    return command == "oracle" || command == "design" || command == "simulate" || command == "fit" ||
           command == "calibrate";
}

void cmd_oracle(const Settings& s, Report& report)
{
    const std::string out = require_path(s.out, "--out", "oracle");
    simdyn::OracleSpec spec;
    if (!s.base_oracle.empty()) {
        const auto base = parse(load(s.base_oracle, "--base-oracle", "oracle", "base_oracle", report),
                                records::read_oracle);
        if (s.scale.size() != base.k || s.offset.size() != base.k) {
            throw DomainError("oracle: --scale and --offset need k = " + std::to_string(base.k) + " entries each");
        }
        spec = simdyn::make_affine_target(base, {s.scale, s.offset}, s.noise, s.seed);
    } else if (!s.kernel.empty()) {
        spec = simdyn::make_kernel_oracle(s.m, s.k, s.seed, simdyn::parse_interaction(s.kernel));
    } else {
        spec = simdyn::make_oracle(s.m, s.k, s.seed, simdyn::parse_preset(s.preset));
    }
    save(out, records::write_oracle, spec);
    report.result() = {{"id", spec.id},
                       {"m", spec.m},
                       {"k", spec.k},
                       {"cross_terms", spec.cross.size()},
                       {"noise", spec.noise},
                       {"affine_target", spec.target.has_value()}};
}

void cmd_design(const Settings& s, Report& report)
{
    const std::string out = require_path(s.out, "--out", "design");
    records::ExperimentPlan plan;
    plan.m = s.m;
    plan.b = s.b;
    plan.tau = s.tau;
    plan.grid = s.grid();
    plan.seed = s.seed;
    const auto points = mixspace::sample_lattice(s.m, s.b, s.mixtures, s.seed);
    for (std::size_t i = 0; i < points.size(); ++i) {
        char id[32];
        std::snprintf(id, sizeof id, "run-%05zu", i);
        plan.runs.push_back({id, points[i]});
    }
    save(out, records::write_plan, plan);
    report.result() = {{"runs", plan.runs.size()},
                       {"cells", plan.cell_count()},
                       {"lattice_size", mixspace::lattice_size_u64(s.m, s.b)},
                       {"steps", plan.grid.steps()}};
}

void cmd_simulate(const Settings& s, Report& report)
{
    const std::string out = require_path(s.out, "--out", "simulate");
    const auto plan = parse(load(s.plan, "--plan", "simulate", "plan", report), records::read_plan);
    const auto spec = parse(load(s.oracle, "--oracle", "simulate", "oracle", report), records::read_oracle);
    if (plan.m != spec.m) {
        throw DomainError("simulate: field 'm' differs: plan has m = " + std::to_string(plan.m) + ", oracle has m = " +
                          std::to_string(spec.m));
    }
    records::SampleFile file;
    file.header = {spec.m, spec.k, plan.b, plan.grid.total_steps(), spec.id};
    for (const auto& run : plan.runs) {
        const auto p = mixspace::to_proportions(run.mixture);
        for (auto t : plan.grid.steps()) {
            file.samples.push_back(surrogate::SamplePoint::make(run.mixture, t, plan.grid.total_steps(),
                                                                simdyn::oracle_eval(spec, p, t, plan.grid.total_steps()),
                                                                spec.id, run.run_id));
        }
    }
    save(out, records::write_samples, file);
    report.result() = {{"records", file.samples.size()}, {"model_id", spec.id}};
}

void cmd_fit(const Settings& s, Report& report)
{
    const std::string out = require_path(s.out, "--out", "fit");
    const auto file = parse(load(s.samples, "--samples", "fit", "samples", report), records::read_samples);
    const auto cfg = s.train_config();
    auto result = surrogate::fit_surrogate(file.samples, cfg);
    result.model.base_model_id = file.header.model_id;
    save(out, records::write_model, result.model);
    report.result() = {{"samples", file.samples.size()},
                       {"parameters", result.model.parameter_count()},
                       {"initial_loss", result.initial_loss},
                       {"final_loss", result.final_loss},
                       {"model_checksum", hex64(result.model.checksum())},
                       {"base_model_id", file.header.model_id}};
}

void cmd_cv(const Settings& s, Report& report)
{
    const auto file = parse(load(s.samples, "--samples", "cv", "samples", report), records::read_samples);
    const auto cv = surrogate::cross_validate(file.samples, s.folds, s.train_config(), s.seed);
    std::set<mixspace::LatticePoint> mixtures;
    for (const auto& sample : file.samples) {
        mixtures.insert(sample.mixture);
    }
    report.result() = {{"folds", s.folds},
                       {"samples", file.samples.size()},
                       {"mixtures", mixtures.size()},
                       {"fold_r2", cv.fold_r2},
                       {"mean_r2", cv.mean_r2}};
    if (!s.csv.empty()) {
        std::string csv = "fold,r2\n";
        for (std::size_t f = 0; f < cv.fold_r2.size(); ++f) {
            csv += std::to_string(f) + ',' + csv_number(cv.fold_r2[f]) + '\n';
        }
        records::write_file_atomic(s.csv, csv);
    }
}

void cmd_extrapolate(const Settings& s, Report& report)
{
    auto model = parse(load(s.model, "--model", "extrapolate", "model", report), records::read_model);
    if (!s.calibration.empty()) {
        const auto map = parse(load(s.calibration, "--calibration", "extrapolate", "calibration", report),
                               records::read_calibration);
        model = compose(std::move(model), map);
    }
    std::optional<simdyn::OracleSpec> oracle;
    if (!s.oracle.empty()) {
        oracle = parse(load(s.oracle, "--oracle", "extrapolate", "oracle", report), records::read_oracle);
        if (oracle->m != model.mixture_dims()) {
            throw DomainError("extrapolate: field 'm' differs between model and oracle");
        }
    }
    const StepGrid grid = s.grid();
    const auto ranking = optimizer::rank_lattice(model, s.b, grid, s.top_k, {.shards = s.shards, .workers = 0});
    report.result() = {{"lattice_size", ranking.lattice_size},
                       {"requested", ranking.requested},
                       {"returned", ranking.entries.size()},
                       {"truncated", ranking.truncated},
                       {"steps", grid.steps()}};
    std::string csv = "rank,counts,step,predicted_average";
    csv += oracle ? ",true_average\n" : "\n";
    for (const auto& e : ranking.entries) {
        const auto p = mixspace::to_proportions(e.mixture);
        json item{{"rank", e.rank},
                  {"counts", e.mixture.counts()},
                  {"proportions", proportions_json(p)},
                  {"step", e.best_step},
                  {"scores", e.scores},
                  {"average", e.average}};
        std::string row = std::to_string(e.rank) + ",\"" + e.mixture.to_string() + "\"," +
                          std::to_string(e.best_step) + ',' + csv_number(e.average);
        if (oracle) {
            const double truth = simdyn::oracle_average(*oracle, p, e.best_step, grid.total_steps());
            item["true_average"] = truth;
            row += ',' + csv_number(truth);
        }
        report.add_item(std::move(item));
        csv += row + '\n';
    }
    if (!s.csv.empty()) {
        records::write_file_atomic(s.csv, csv);
    }
}

void cmd_calibrate(const Settings& s, Report& report)
{
    const std::string out = require_path(s.out, "--out", "calibrate");
    const auto model = parse(load(s.model, "--model", "calibrate", "model", report), records::read_model);
    const auto file = parse(load(s.samples, "--samples", "calibrate", "samples", report), records::read_samples);
    if (file.header.m != model.mixture_dims() || file.header.k != model.tasks()) {
        throw DomainError("calibrate: fields 'm'/'k' of the samples do not match the model");
    }
    std::vector<std::vector<double>> predicted;
    std::vector<std::vector<double>> actual;
    for (const auto& sample : file.samples) {
        predicted.push_back(model.forward(sample.proportions, sample.step_norm));
        actual.push_back(sample.scores);
    }
    auto map = calibrate::fit_calibration(predicted, actual, calibrate::parse_mode(s.mode));
    map.base_model_id = model.base_model_id;
    map.target_model_id = file.header.model_id;
    save(out, records::write_calibration, map);

    const auto corr = calibrate::correlation_report(map, predicted, actual);
    report.result() = {{"mode", calibrate::to_string(map.mode)},
                       {"samples", map.samples},
                       {"residual", map.residual},
                       {"identity_residual",
                        calibrate::calibration_residual(calibrate::CalibrationMap::identity(map.k), predicted, actual)},
                       {"pearson_before", corr.pearson_before},
                       {"pearson_after", corr.pearson_after}};
    if (!s.csv.empty()) {
        std::string csv = "sample,predicted_before,predicted_after,actual\n";
        for (std::size_t i = 0; i < corr.scatter_before.size(); ++i) {
            csv += std::to_string(i) + ',' + csv_number(corr.scatter_before[i].first) + ',' +
                   csv_number(corr.scatter_after[i].first) + ',' + csv_number(corr.scatter_before[i].second) + '\n';
        }
        records::write_file_atomic(s.csv, csv);
    }
}

void cmd_baseline(const Settings& s, Report& report)
{
    std::optional<simdyn::OracleSpec> oracle;
    if (!s.oracle.empty()) {
        oracle = parse(load(s.oracle, "--oracle", "baseline", "oracle", report), records::read_oracle);
    }
    json result{{"kind", s.baseline_kind}};
    std::optional<mixspace::MixtureProportion> p;
    if (s.baseline_kind == "uniform") {
        p = mixspace::uniform_mixture(oracle ? oracle->m : s.m);
    } else if (s.baseline_kind == "natural") {
        const auto catalog =
            parse(load(s.catalog, "--catalog", "baseline natural", "catalog", report), records::read_catalog);
        p = mixspace::natural_mixture(catalog);
        result["catalog_total"] = catalog.total();
    } else if (s.baseline_kind == "dml") {
        const auto file =
            parse(load(s.samples, "--samples", "baseline dml", "samples", report), records::read_samples);
        lawfit::FitOptions options;
        options.seed = s.seed;
        options.step = s.fit_step;
        const auto laws = lawfit::fit_exp_laws(file.samples, options);
        const auto choice = lawfit::exp_law_best_mixture(laws, file.header.m, file.header.b);
        json fitted = json::array();
        for (const auto& law : laws) {
            fitted.push_back({{"task", law.task},
                              {"step", law.step},
                              {"intercept", law.intercept},
                              {"scale", law.scale},
                              {"slopes", law.slopes},
                              {"residual_mse", law.residual_mse},
                              {"converged", law.converged}});
        }
        result["laws"] = fitted;
        result["counts"] = choice.point.counts();
        result["predicted_average"] = choice.predicted_average;
        p = choice.proportions;
    } else {
        throw DomainError("baseline: unknown kind '" + s.baseline_kind + "' (expected uniform, natural or dml)");
    }
    if (oracle) {
        if (oracle->m != p->dims()) {
            throw DomainError("baseline: field 'm' differs between the mixture and the oracle");
        }
        const auto [step, truth] = true_best(*oracle, *p, s.grid());
        result["true_step"] = step;
        result["true_average"] = truth;
    }
    result["proportions"] = proportions_json(*p);
    report.result() = std::move(result);
}

void cmd_metrics(const Settings& s, Report& report)
{
    json result = json::object();
    if (!s.queries.empty()) {
        const std::string text = load(s.queries, "--queries", "metrics", "queries", report);
        std::vector<metrics::Tokens> queries;
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) {
            auto tokens = metrics::tokenize(line);
            if (!tokens.empty()) {
                queries.push_back(std::move(tokens));
            }
        }
        result["queries"] = queries.size();
        result["diversity"] = metrics::diversity(queries);
    }
    if (!s.scores.empty()) {
        result["overall_average"] = metrics::overall_average(s.scores);
        if (!s.weights.empty()) {
            result["weighted_average"] = metrics::weighted_average(s.scores, s.weights);
        }
    }
    if (s.nodes) {
        const metrics::PlanGraph graph{*s.nodes, s.edges, true};
        graph.validate();
        result["complexity"] = metrics::dag_complexity(graph);
    }
    if (result.empty()) {
        throw DomainError("metrics: give --queries, --scores or --nodes/--edges");
    }
    report.result() = std::move(result);
}

void cmd_brute_force(const Settings& s, Report& report)
{
    const auto spec = parse(load(s.oracle, "--oracle", "brute-force", "oracle", report), records::read_oracle);
    const StepGrid grid = s.grid();
    const auto best = simdyn::brute_force_best(spec, s.b, grid, s.budget, s.shards ? s.shards : 1);
    report.result() = {{"lattice_size", mixspace::lattice_size_u64(spec.m, s.b)},
                       {"evaluations", mixspace::lattice_size_u64(spec.m, s.b) * grid.size()},
                       {"counts", best.point.counts()},
                       {"proportions", proportions_json(mixspace::to_proportions(best.point))},
                       {"step", best.step},
                       {"average", best.average}};
}

} // namespace damo::cli
