#include "damo/records.hpp"

#include "damo/error.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace damo::records {

namespace {

using nlohmann::json;

json header(std::string_view schema)
{
    json h;
    h["schema"] = schema;
    h["version"] = kSchemaVersion;
    return h;
}

void write_line(std::ostream& out, const json& j)
{
    out << j.dump() << '\n';
}

json parse_line(const std::string& line, std::string_view context, std::size_t line_no)
{
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string(context) + ": line " + std::to_string(line_no) + " is not valid JSON (" +
                          e.what() + ")");
    }
}

template <typename T>
T field(const json& j, const char* name, std::string_view context)
{
    if (!j.is_object() || !j.contains(name)) {
        throw SchemaError(std::string(context) + ": missing field '" + name + "'");
    }
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(std::string(context) + ": field '" + name + "' has the wrong type");
    }
}

json read_header(std::istream& in, std::string_view schema)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw SchemaError(std::string(schema) + ": empty file, expected a schema header line");
    }
    json h = parse_line(line, schema, 1);
    if (!h.is_object() || !h.contains("schema") || !h.contains("version")) {
        throw SchemaError(std::string(schema) + ": first line is not a schema header");
    }
    const auto found = field<std::string>(h, "schema", schema);
    if (found != schema) {
        throw SchemaError("expected a '" + std::string(schema) + "' file, found '" + found + "'");
    }
    const auto version = field<int>(h, "version", schema);
    if (version != kSchemaVersion) {
        throw SchemaError(std::string(schema) + ": unsupported schema version " + std::to_string(version) +
                          " (this build reads version " + std::to_string(kSchemaVersion) +
                          "); regenerate the file with a matching damo release or convert it to version " +
                          std::to_string(kSchemaVersion));
    }
    return h;
}

// Non-empty lines after the header.
std::vector<std::pair<std::size_t, json>> read_body(std::istream& in, std::string_view schema)
{
    std::vector<std::pair<std::size_t, json>> lines;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        lines.emplace_back(line_no, parse_line(line, schema, line_no));
    }
    return lines;
}

std::string where(std::string_view schema, std::size_t line_no)
{
    return std::string(schema) + " line " + std::to_string(line_no);
}

json layer_json(const surrogate::DenseLayer& layer, std::size_t index)
{
    return json{{"layer", index},
                {"inputs", layer.inputs},
                {"outputs", layer.outputs},
                {"weights", layer.weights},
                {"bias", layer.bias}};
}

json train_config_json(const surrogate::TrainConfig& cfg)
{
    return json{{"learning_rate", cfg.learning_rate}, {"steps", cfg.steps}, {"beta1", cfg.beta1},
                {"beta2", cfg.beta2},                 {"epsilon", cfg.epsilon}, {"seed", cfg.seed}};
}

surrogate::TrainConfig train_config_from(const json& j, std::string_view ctx)
{
    surrogate::TrainConfig cfg;
    cfg.learning_rate = field<double>(j, "learning_rate", ctx);
    cfg.steps = field<std::size_t>(j, "steps", ctx);
    cfg.beta1 = field<double>(j, "beta1", ctx);
    cfg.beta2 = field<double>(j, "beta2", ctx);
    cfg.epsilon = field<double>(j, "epsilon", ctx);
    cfg.seed = field<std::uint64_t>(j, "seed", ctx);
    return cfg;
}

} // namespace

void write_samples(std::ostream& out, const SampleFile& file)
{
    json h = header(kSamplesSchema);
    h["m"] = file.header.m;
    h["k"] = file.header.k;
    h["b"] = file.header.b;
    h["T"] = file.header.total_steps;
    h["model_id"] = file.header.model_id;
    write_line(out, h);
    for (const auto& s : file.samples) {
        if (s.mixture_dims() != file.header.m || s.tasks() != file.header.k) {
            throw DomainError("write_samples: record " + s.run_id + " does not match header dimensions");
        }
        json r{{"run_id", s.run_id},
               {"model_id", s.model_id},
               {"counts", s.mixture.counts()},
               {"step", s.step},
               {"scores", s.scores}};
        write_line(out, r);
    }
}

SampleFile read_samples(std::istream& in)
{
    const json h = read_header(in, kSamplesSchema);
    SampleFile file;
    const std::string ctx(kSamplesSchema);
    file.header.m = field<std::size_t>(h, "m", ctx);
    file.header.k = field<std::size_t>(h, "k", ctx);
    file.header.b = field<std::uint32_t>(h, "b", ctx);
    file.header.total_steps = field<std::uint32_t>(h, "T", ctx);
    file.header.model_id = field<std::string>(h, "model_id", ctx);
    if (file.header.m == 0 || file.header.k == 0 || file.header.b == 0 || file.header.total_steps == 0) {
        throw SchemaError("damo.samples: header fields m, k, b and T must be positive");
    }
    for (const auto& [line_no, r] : read_body(in, kSamplesSchema)) {
        const std::string at = where(kSamplesSchema, line_no);
        auto counts = field<std::vector<std::uint32_t>>(r, "counts", at);
        auto scores = field<std::vector<double>>(r, "scores", at);
        if (counts.size() != file.header.m) {
            throw SchemaError(at + ": field 'counts' has " + std::to_string(counts.size()) +
                              " entries, header says m = " + std::to_string(file.header.m));
        }
        if (scores.size() != file.header.k) {
            throw SchemaError(at + ": field 'scores' has " + std::to_string(scores.size()) +
                              " entries, header says k = " + std::to_string(file.header.k));
        }
        try {
            mixspace::LatticePoint point(std::move(counts), file.header.b);
            file.samples.push_back(surrogate::SamplePoint::make(
                std::move(point), field<std::uint32_t>(r, "step", at), file.header.total_steps, std::move(scores),
                r.value("model_id", file.header.model_id), field<std::string>(r, "run_id", at)));
        } catch (const DomainError& e) {
            throw SchemaError(at + ": " + e.what());
        }
    }
    return file;
}

void write_plan(std::ostream& out, const ExperimentPlan& plan)
{
    json h = header(kPlanSchema);
    h["m"] = plan.m;
    h["b"] = plan.b;
    h["T"] = plan.grid.total_steps();
    h["tau"] = plan.tau;
    h["steps"] = plan.grid.steps();
    h["seed"] = plan.seed;
    h["runs"] = plan.runs.size();
    h["cells"] = plan.cell_count();
    write_line(out, h);
    for (const auto& run : plan.runs) {
        write_line(out, json{{"run_id", run.run_id}, {"counts", run.mixture.counts()}});
    }
}

ExperimentPlan read_plan(std::istream& in)
{
    const json h = read_header(in, kPlanSchema);
    const std::string ctx(kPlanSchema);
    ExperimentPlan plan;
    plan.m = field<std::size_t>(h, "m", ctx);
    plan.b = field<std::uint32_t>(h, "b", ctx);
    plan.tau = field<std::uint32_t>(h, "tau", ctx);
    plan.seed = field<std::uint64_t>(h, "seed", ctx);
    try {
        plan.grid = StepGrid(field<std::vector<std::uint32_t>>(h, "steps", ctx), field<std::uint32_t>(h, "T", ctx));
    } catch (const DomainError& e) {
        throw SchemaError(ctx + ": " + e.what());
    }
    for (const auto& [line_no, r] : read_body(in, kPlanSchema)) {
        const std::string at = where(kPlanSchema, line_no);
        auto counts = field<std::vector<std::uint32_t>>(r, "counts", at);
        if (counts.size() != plan.m) {
            throw SchemaError(at + ": field 'counts' has " + std::to_string(counts.size()) +
                              " entries, header says m = " + std::to_string(plan.m));
        }
        try {
            plan.runs.push_back({field<std::string>(r, "run_id", at), mixspace::LatticePoint(std::move(counts), plan.b)});
        } catch (const DomainError& e) {
            throw SchemaError(at + ": " + e.what());
        }
    }
    return plan;
}

void write_model(std::ostream& out, const surrogate::SurrogateModel& model)
{
    json h = header(kModelSchema);
    h["m"] = model.mixture_dims();
    h["k"] = model.tasks();
    std::vector<std::size_t> hidden;
    for (std::size_t l = 0; l + 1 < model.layers().size(); ++l) {
        hidden.push_back(model.layers()[l].outputs);
    }
    h["hidden"] = hidden;
    h["activation"] = "relu";
    h["seed"] = model.seed;
    h["trained"] = model.trained;
    h["base_model_id"] = model.base_model_id;
    h["train_config"] = train_config_json(model.config);
    h["parameters"] = model.parameter_count();
    write_line(out, h);
    for (std::size_t l = 0; l < model.layers().size(); ++l) {
        write_line(out, layer_json(model.layers()[l], l));
    }
}

surrogate::SurrogateModel read_model(std::istream& in)
{
    const json h = read_header(in, kModelSchema);
    const std::string ctx(kModelSchema);
    std::vector<surrogate::DenseLayer> layers;
    for (const auto& [line_no, r] : read_body(in, kModelSchema)) {
        const std::string at = where(kModelSchema, line_no);
        surrogate::DenseLayer layer;
        layer.inputs = field<std::size_t>(r, "inputs", at);
        layer.outputs = field<std::size_t>(r, "outputs", at);
        layer.weights = field<std::vector<double>>(r, "weights", at);
        layer.bias = field<std::vector<double>>(r, "bias", at);
        layers.push_back(std::move(layer));
    }
    surrogate::SurrogateModel model;
    try {
        model = surrogate::SurrogateModel::from_layers(std::move(layers));
    } catch (const DomainError& e) {
        throw SchemaError(ctx + ": " + e.what());
    }
    if (model.mixture_dims() != field<std::size_t>(h, "m", ctx) || model.tasks() != field<std::size_t>(h, "k", ctx)) {
        throw SchemaError(ctx + ": header dimensions m/k do not match the stored layers");
    }
    model.seed = field<std::uint64_t>(h, "seed", ctx);
    model.trained = field<bool>(h, "trained", ctx);
    model.base_model_id = h.value("base_model_id", std::string{});
    model.config = train_config_from(field<json>(h, "train_config", ctx), ctx + " train_config");
    return model;
}

void write_oracle(std::ostream& out, const simdyn::OracleSpec& spec)
{
    spec.validate();
    json h = header(kOracleSchema);
    h["id"] = spec.id;
    h["m"] = spec.m;
    h["k"] = spec.k;
    h["seed"] = spec.seed;
    h["noise"] = spec.noise;
    write_line(out, h);

    std::vector<std::string> kinds;
    for (auto kind : spec.kinds) {
        kinds.emplace_back(simdyn::to_string(kind));
    }
    json cross = json::array();
    for (const auto& c : spec.cross) {
        cross.push_back(json{{"first", c.first},
                             {"second", c.second},
                             {"task", c.task},
                             {"weight", c.weight},
                             {"frequency", c.frequency},
                             {"phase", c.phase}});
    }
    json body{{"base", spec.base},
              {"kinds", kinds},
              {"strength", spec.strength},
              {"timescale", spec.timescale},
              {"cross", cross}};
    if (spec.target) {
        body["target"] = json{{"scale", spec.target->scale}, {"offset", spec.target->offset}};
    }
    write_line(out, body);
}

simdyn::OracleSpec read_oracle(std::istream& in)
{
    const json h = read_header(in, kOracleSchema);
    const std::string ctx(kOracleSchema);
    simdyn::OracleSpec spec;
    spec.id = field<std::string>(h, "id", ctx);
    spec.m = field<std::size_t>(h, "m", ctx);
    spec.k = field<std::size_t>(h, "k", ctx);
    spec.seed = field<std::uint64_t>(h, "seed", ctx);
    spec.noise = field<double>(h, "noise", ctx);
    const auto body = read_body(in, kOracleSchema);
    if (body.size() != 1) {
        throw SchemaError(ctx + ": expected exactly one parameter record after the header");
    }
    const auto& [line_no, r] = body.front();
    const std::string at = where(kOracleSchema, line_no);
    spec.base = field<std::vector<double>>(r, "base", at);
    spec.strength = field<std::vector<double>>(r, "strength", at);
    spec.timescale = field<std::vector<double>>(r, "timescale", at);
    try {
        for (const auto& name : field<std::vector<std::string>>(r, "kinds", at)) {
            spec.kinds.push_back(simdyn::parse_interaction(name));
        }
        for (const auto& c : field<json>(r, "cross", at)) {
            simdyn::CrossTerm term;
            term.first = field<std::size_t>(c, "first", at);
            term.second = field<std::size_t>(c, "second", at);
            term.task = field<std::size_t>(c, "task", at);
            term.weight = field<double>(c, "weight", at);
            term.frequency = field<double>(c, "frequency", at);
            term.phase = field<double>(c, "phase", at);
            spec.cross.push_back(term);
        }
        if (r.contains("target")) {
            const json& t = r.at("target");
            spec.target = simdyn::AffineTarget{field<std::vector<double>>(t, "scale", at),
                                               field<std::vector<double>>(t, "offset", at)};
        }
        spec.validate();
    } catch (const DomainError& e) {
        throw SchemaError(at + ": " + e.what());
    }
    return spec;
}

void write_calibration(std::ostream& out, const calibrate::CalibrationMap& map)
{
    json h = header(kCalibrationSchema);
    h["mode"] = calibrate::to_string(map.mode);
    h["k"] = map.k;
    h["samples"] = map.samples;
    h["residual"] = map.residual;
    h["ridge"] = calibrate::kRidge;
    h["base_model_id"] = map.base_model_id;
    h["target_model_id"] = map.target_model_id;
    write_line(out, h);
    write_line(out, json{{"weights", map.weights}, {"bias", map.bias}});
}

calibrate::CalibrationMap read_calibration(std::istream& in)
{
    const json h = read_header(in, kCalibrationSchema);
    const std::string ctx(kCalibrationSchema);
    calibrate::CalibrationMap map;
    try {
        map.mode = calibrate::parse_mode(field<std::string>(h, "mode", ctx));
    } catch (const DomainError& e) {
        throw SchemaError(ctx + ": " + e.what());
    }
    map.k = field<std::size_t>(h, "k", ctx);
    map.samples = field<std::size_t>(h, "samples", ctx);
    map.residual = field<double>(h, "residual", ctx);
    map.base_model_id = h.value("base_model_id", std::string{});
    map.target_model_id = h.value("target_model_id", std::string{});
    const auto body = read_body(in, kCalibrationSchema);
    if (body.size() != 1) {
        throw SchemaError(ctx + ": expected exactly one parameter record after the header");
    }
    const auto& [line_no, r] = body.front();
    const std::string at = where(kCalibrationSchema, line_no);
    map.weights = field<std::vector<double>>(r, "weights", at);
    map.bias = field<std::vector<double>>(r, "bias", at);
    if (map.weights.size() != map.k * map.k || map.bias.size() != map.k) {
        throw SchemaError(at + ": weights must have k*k and bias k entries");
    }
    return map;
}

void write_catalog(std::ostream& out, const mixspace::DatasetCatalog& catalog)
{
    catalog.validate();
    write_line(out, header(kCatalogSchema));
    write_line(out, json{{"names", catalog.names}, {"sizes", catalog.sizes}});
}

mixspace::DatasetCatalog read_catalog(std::istream& in)
{
    const std::string ctx(kCatalogSchema);
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    json record;
    std::string first_line;
    std::istringstream lines(text);
    std::getline(lines, first_line);
    json first = parse_line(first_line, ctx, 1);
    if (first.is_object() && first.contains("schema")) {
        std::istringstream again(text);
        read_header(again, kCatalogSchema);
        const auto body = read_body(again, kCatalogSchema);
        if (body.size() != 1) {
            throw SchemaError(ctx + ": expected exactly one catalog record after the header");
        }
        record = body.front().second;
    } else {
        try {
            record = json::parse(text);
        } catch (const json::parse_error& e) {
            throw SchemaError(ctx + ": not valid JSON (" + e.what() + ")");
        }
    }
    mixspace::DatasetCatalog catalog;
    catalog.names = record.contains("names") ? field<std::vector<std::string>>(record, "names", ctx)
                                             : std::vector<std::string>{};
    catalog.sizes = field<std::vector<std::uint64_t>>(record, "sizes", ctx);
    try {
        catalog.validate();
    } catch (const DomainError& e) {
        throw SchemaError(ctx + ": " + e.what());
    }
    return catalog;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string checksum_string(std::string_view bytes)
{
    std::ostringstream out;
    out << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(bytes);
    return out.str();
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DomainError("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents)
{
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) {
            throw std::runtime_error("failed writing '" + tmp.string() + "'");
        }
    }
    std::filesystem::rename(tmp, path);
}

} // namespace damo::records
