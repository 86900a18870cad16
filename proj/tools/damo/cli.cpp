#include "cli.hpp"

#include "commands.hpp"
#include "settings.hpp"

#include "damo/error.hpp"
#include "damo/records.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <functional>
#include <map>
#include <ostream>

namespace damo::cli {

namespace {

using Command = std::function<void(const Settings&, Report&)>;

const std::map<std::string, std::pair<Command, std::string>>& commands()
{
    static const std::map<std::string, std::pair<Command, std::string>> table{
        {"oracle", {cmd_oracle, "Generate a synthetic training-dynamics oracle (or an affine target of one)"}},
        {"design", {cmd_design, "Sample lattice mixtures and the checkpoint grid into an experiment plan"}},
        {"simulate", {cmd_simulate, "Fill a plan's cells with oracle scores"}},
        {"fit", {cmd_fit, "Train the surrogate on sample records"}},
        {"cv", {cmd_cv, "Grouped k-fold cross-validation R^2 of the surrogate"}},
        {"extrapolate", {cmd_extrapolate, "Rank every lattice mixture with a trained surrogate"}},
        {"calibrate", {cmd_calibrate, "Fit an affine map from surrogate predictions to another model's scores"}},
        {"baseline", {cmd_baseline, "Uniform, natural or exponential-law (dml) mixture baselines"}},
        {"metrics", {cmd_metrics, "Overall average, plan complexity and query diversity"}},
        {"brute-force", {cmd_brute_force, "Exact optimum of an oracle over lattice x grid"}},
    };
    return table;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    Settings settings;
    CLI::App app{"Data mixture optimization: sample, fit, extrapolate and calibrate", "damo"};
    app.require_subcommand(1);
    bind_options(app, settings);

    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, entry] : commands()) {
        CLI::App* sub = app.add_subcommand(name, entry.second);
        sub->fallthrough();
        subs[name] = sub;
    }
    subs["baseline"]->add_option("kind", settings.baseline_kind, "uniform, natural or dml")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kExitOk;
        }
        err << "damo: " << e.what() << "\n" << "Run with --help for usage.\n";
        return kExitInvalid;
    }

    std::string name;
    for (const auto& [n, sub] : subs) {
        if (sub->parsed()) {
            name = n;
        }
    }

    try {
        Report report(name, settings);
        const auto start = std::chrono::steady_clock::now();
        commands().at(name).first(settings, report);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        if (settings.timing) {
            report.set_wall_seconds(elapsed.count());
        }
        const std::string& dest = writes_artifact(name) ? settings.report : settings.out;
        if (dest.empty()) {
            out << report.text();
        } else {
            records::write_file_atomic(dest, report.text());
        }
        return kExitOk;
    } catch (const DomainError& e) {
        err << "damo " << name << ": " << e.what() << "\n";
        return kExitInvalid;
    } catch (const SchemaError& e) {
        err << "damo " << name << ": " << e.what() << "\n";
        return kExitInvalid;
    } catch (const TrainingError& e) {
        err << "damo " << name << ": " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "damo " << name << ": " << e.what() << "\n";
        return kExitRuntime;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    std::vector<const char*> argv{"damo"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace damo::cli
