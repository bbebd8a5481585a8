#pragma once

#include "subopt/harness.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace subopt {

inline constexpr int kSchemaVersion = 1;

/// Malformed or inconsistent run configuration; the message names the line or field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class RunMode { Free2d, Restricted1d };

std::string_view to_string(RunMode mode);

struct ProblemSection {
  int n = 2;
  double r_min = 0.1;
  // Defaults to 5 lambda0 (free2d) or N (r_min + lambda0) / 2 (restricted1d).
  std::optional<double> confinement_radius;
  RunMode mode = RunMode::Free2d;
};

struct SweepSection {
  int n = 6;
  std::vector<double> r_min_grid;
  double confinement_radius = 5.0;
};

struct SyntheticScaling {
  ScalingModel model = ScalingModel::PowerLaw;
  double amplitude = 1.0;
  double exponent = -3.0;
};

struct ScalingSection {
  std::vector<int> n_list;
  double r_min = 0.3;
  std::set<ScalingFamily> families{ScalingFamily::Periodic, ScalingFamily::Modulated};
  std::optional<SyntheticScaling> synthetic;
};

struct Compare1dSection {
  int n = 14;
  std::vector<double> r_min_grid;
};

/// Parsed run configuration; each command reads the sections it needs.
struct RunConfig {
  int schema_version = kSchemaVersion;
  Polarization polarization = Polarization::SigmaZ;
  std::optional<EmitterConfiguration> configuration;
  std::optional<ProblemSection> problem;
  DeSettings settings;
  ScanOptions scan;
  std::optional<SweepSection> sweep;
  std::optional<ScalingSection> scaling;
  std::optional<Compare1dSection> compare1d;
  std::optional<OracleSpec> oracle;
  bool record_timing = false;
};

RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

/// "chain n=6 a=0.3", "triangle n=6 a=0.6", "rectangle rows=2 cols=3 a=1",
/// "modulated n=14 r_min=0.2 r_max=0.35".
EmitterConfiguration generate_configuration(const std::string& spec);

using ordered_json = nlohmann::ordered_json;

ordered_json positions_to_json(const EmitterConfiguration& cfg);
EmitterConfiguration positions_from_json(const nlohmann::json& j, const std::string& field = "positions");

ordered_json configuration_document(const EmitterConfiguration& cfg, Polarization pol);
/// Reads a configuration document; rejects a mismatched schema_version.
EmitterConfiguration parse_configuration_document(const std::string& text);

ordered_json record_to_json(const ExperimentRecord& r);
ExperimentRecord record_from_json(const nlohmann::json& j);
std::string record_csv_header();
std::string record_csv_row(const ExperimentRecord& r);

ordered_json run_to_json(const DeRun& run, const Problem& problem);

/// Human-readable mode table followed by the per-atom rows.
void write_mode_table(std::ostream& os, const std::vector<ModeRow>& rows, const EmitterConfiguration& cfg);
void write_mode_csv(std::ostream& os, const std::vector<ModeRow>& rows, const EmitterConfiguration& cfg);

/// Twelve significant digits.
std::string format_number(double value);

}  // namespace subopt
