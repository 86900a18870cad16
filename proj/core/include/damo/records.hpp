#pragma once

// Persisted record formats. Every file is line-delimited JSON whose first
// line is a header carrying "schema" and "version"; readers reject anything
// else. Lattice counts are the canonical mixture encoding; proportions are
// derived on read. Doubles are written in shortest round-trip form.

#include "damo/calibrate.hpp"
#include "damo/mixspace.hpp"
#include "damo/simdyn.hpp"
#include "damo/step_grid.hpp"
#include "damo/surrogate.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace damo::records {

inline constexpr int kSchemaVersion = 1;

inline constexpr std::string_view kSamplesSchema = "damo.samples";
inline constexpr std::string_view kPlanSchema = "damo.plan";
inline constexpr std::string_view kModelSchema = "damo.surrogate";
inline constexpr std::string_view kOracleSchema = "damo.oracle";
inline constexpr std::string_view kCalibrationSchema = "damo.calibration";
inline constexpr std::string_view kCatalogSchema = "damo.catalog";

struct SampleFileHeader {
    std::size_t m = 0;
    std::size_t k = 0;
    std::uint32_t b = 0;
    std::uint32_t total_steps = 0;
    std::string model_id;
};

struct SampleFile {
    SampleFileHeader header;
    std::vector<surrogate::SamplePoint> samples;
};

struct PlannedRun {
    std::string run_id;
    mixspace::LatticePoint mixture;
};

/// Mixtures to train and the checkpoints to evaluate each at.
struct ExperimentPlan {
    std::size_t m = 0;
    std::uint32_t b = 0;
    std::uint32_t tau = 0;
    StepGrid grid;
    std::uint64_t seed = 0;
    std::vector<PlannedRun> runs;

    std::size_t cell_count() const noexcept { return runs.size() * grid.size(); }
};

void write_samples(std::ostream& out, const SampleFile& file);
/// Throws SchemaError on a bad header or record, naming the offending field.
SampleFile read_samples(std::istream& in);

void write_plan(std::ostream& out, const ExperimentPlan& plan);
ExperimentPlan read_plan(std::istream& in);

void write_model(std::ostream& out, const surrogate::SurrogateModel& model);
surrogate::SurrogateModel read_model(std::istream& in);

void write_oracle(std::ostream& out, const simdyn::OracleSpec& spec);
simdyn::OracleSpec read_oracle(std::istream& in);

void write_calibration(std::ostream& out, const calibrate::CalibrationMap& map);
calibrate::CalibrationMap read_calibration(std::istream& in);

void write_catalog(std::ostream& out, const mixspace::DatasetCatalog& catalog);
/// Accepts a bare {"names": [...], "sizes": [...]} object or one with a catalog header.
mixspace::DatasetCatalog read_catalog(std::istream& in);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;
/// "fnv1a64:<16 hex digits>"
std::string checksum_string(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

} // namespace damo::records
