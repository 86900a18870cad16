#pragma once

#include "settings.hpp"

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace damo::cli {

/// Self-describing report: a damo.report header, then one line with the
/// effective config, input checksums and the result, then optional item lines.
class Report {
public:
    Report(std::string command, const Settings& settings);

    void input(const std::string& role, std::string_view bytes);
    nlohmann::json& result() { return result_; }
    void add_item(nlohmann::json item) { items_.push_back(std::move(item)); }
    void set_wall_seconds(double seconds) { wall_seconds_ = seconds; }

    std::string text() const;

private:
    std::string command_;
    nlohmann::json config_;
    nlohmann::json inputs_ = nlohmann::json::object();
    nlohmann::json result_ = nlohmann::json::object();
    std::vector<nlohmann::json> items_;
    double wall_seconds_ = -1.0;
};

inline constexpr std::string_view kReportSchema = "damo.report";

/// Commands that write an artifact to --out send their report to --report;
/// the others write the report itself to --out.
bool writes_artifact(std::string_view command);

void cmd_oracle(const Settings& s, Report& report);
void cmd_design(const Settings& s, Report& report);
void cmd_simulate(const Settings& s, Report& report);
void cmd_fit(const Settings& s, Report& report);
void cmd_cv(const Settings& s, Report& report);
void cmd_extrapolate(const Settings& s, Report& report);
void cmd_calibrate(const Settings& s, Report& report);
void cmd_baseline(const Settings& s, Report& report);
void cmd_metrics(const Settings& s, Report& report);
void cmd_brute_force(const Settings& s, Report& report);

} // namespace damo::cli
