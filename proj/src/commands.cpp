#include "subopt/commands.hpp"

#include "subopt/log.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace subopt {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
  if (!os) throw std::runtime_error("write failed for " + path.string());
  log::info("wrote ", path.string());
}

void write_json(const fs::path& path, const ordered_json& j) { write_file(path, j.dump(2) + "\n"); }

template <typename T>
const T& require_section(const std::optional<T>& section, const char* name) {
  if (!section) throw ConfigError(std::string("field /") + name + ": missing required section for this command");
  return *section;
}

HarnessOptions harness_options(const RunConfig& cfg) {
  HarnessOptions options;
  options.record_timing = cfg.record_timing;
  options.scan = cfg.scan;
  return options;
}

// Writes records.jsonl and records.csv; returns the share of records without an error.
double write_records(const fs::path& out, const std::vector<ExperimentRecord>& records) {
  std::ostringstream jsonl, csv;
  csv << record_csv_header() << '\n';
  std::size_t ok = 0;
  for (const ExperimentRecord& r : records) {
    jsonl << record_to_json(r).dump() << '\n';
    csv << record_csv_row(r) << '\n';
    if (r.ok()) ++ok;
  }
  write_file(out / "records.jsonl", jsonl.str());
  write_file(out / "records.csv", csv.str());
  return records.empty() ? 1.0 : static_cast<double>(ok) / static_cast<double>(records.size());
}

int stream_exit_code(double success_share) {
  if (success_share >= 0.9) return kExitOk;
  log::error("only ", success_share * 100.0, "% of points succeeded");
  return kExitPartial;
}

ordered_json fit_json(const ScalingFit& fit) {
  ordered_json j;
  j["model"] = std::string(to_string(fit.model));
  j["amplitude"] = fit.amplitude;
  j["exponent"] = fit.exponent;
  j["r_squared"] = fit.r_squared;
  return j;
}

void write_fits(const fs::path& out, const std::vector<std::pair<std::string, ScalingComparison>>& fits) {
  std::ostringstream table;
  table << "family          model         amplitude           exponent            r_squared       preferred\n";
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["fits"] = ordered_json::array();
  for (const auto& [family, cmp] : fits) {
    for (const ScalingFit* fit : {&cmp.power_law, &cmp.exponential}) {
      char line[256];
      std::snprintf(line, sizeof line, "%-15s %-13s %-19s %-19s %-15s %s\n", family.c_str(),
                    std::string(to_string(fit->model)).c_str(), format_number(fit->amplitude).c_str(),
                    format_number(fit->exponent).c_str(), format_number(fit->r_squared).c_str(),
                    fit->model == cmp.preferred().model ? "*" : "");
      table << line;
    }
    ordered_json entry;
    entry["family"] = family;
    entry["power_law"] = fit_json(cmp.power_law);
    entry["exponential"] = fit_json(cmp.exponential);
    entry["preferred"] = std::string(to_string(cmp.preferred().model));
    doc["fits"].push_back(std::move(entry));
  }
  write_file(out / "fits.txt", table.str());
  write_json(out / "fits.json", doc);
}

}  // namespace

Problem problem_from_config(const RunConfig& cfg) {
  const ProblemSection& p = require_section(cfg.problem, "problem");
  Problem problem;
  problem.n = p.n;
  problem.polarization = cfg.polarization;
  problem.layout = p.mode == RunMode::Free2d ? Layout::Planar : Layout::Collinear;
  problem.constraints.r_min = p.r_min;
  problem.constraints.confinement_radius =
      p.confinement_radius.value_or(p.mode == RunMode::Free2d ? 5.0 : collinear_confinement_radius(p.n, p.r_min));
  try {
    problem.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("field /problem: ") + e.what());
  }
  return problem;
}

int cmd_modes(const RunConfig& cfg, const fs::path& out) {
  const EmitterConfiguration& emitters = require_section(cfg.configuration, "configuration");
  fs::create_directories(out);
  const std::vector<ModeRow> rows =
      mode_report(collective_modes(build_hamiltonian(emitters, cfg.polarization)), emitters);

  std::ostringstream table, csv;
  write_mode_table(table, rows, emitters);
  write_mode_csv(csv, rows, emitters);
  write_file(out / "modes.txt", table.str());
  write_file(out / "modes.csv", csv.str());

  ordered_json doc = configuration_document(emitters, cfg.polarization);
  doc["modes"] = ordered_json::array();
  for (const ModeRow& row : rows) {
    ordered_json m;
    m["mode"] = row.mode;
    m["shift"] = row.shift;
    m["decay"] = row.decay;
    m["atoms"] = ordered_json::array();
    for (const AtomAmplitude& a : row.atoms) m["atoms"].push_back({{"probability", a.probability}, {"phase", a.phase}});
    doc["modes"].push_back(std::move(m));
  }
  write_json(out / "modes.json", doc);
  return kExitOk;
}

int cmd_optimize(const RunConfig& cfg, const fs::path& out) {
  const Problem problem = problem_from_config(cfg);
  fs::create_directories(out);
  DeRun run;
  try {
    run = run_de(problem, cfg.settings);
  } catch (const InfeasibleProblem& e) {
    log::error(e.what());
    ordered_json report;
    report["schema_version"] = kSchemaVersion;
    report["feasible"] = false;
    report["error"] = e.what();
    write_json(out / "run.json", report);
    return kExitInfeasible;
  }
  const EmitterConfiguration best = problem.decode(run.best_vector);
  write_json(out / "run.json", run_to_json(run, problem));
  write_json(out / "best_configuration.json", configuration_document(best, problem.polarization));
  if (problem.layout == Layout::Collinear) {
    std::ostringstream gaps;
    gaps << "interval,gap\n";
    for (Eigen::Index i = 0; i < run.best_vector.size(); ++i) gaps << i + 1 << ',' << format_number(run.best_vector(i)) << '\n';
    write_file(out / "gaps.csv", gaps.str());
  }
  log::info("best gamma ", run.best_gamma, " after ", run.objective_evaluations, " evaluations");
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const fs::path& out) {
  const SweepSection& sweep = require_section(cfg.sweep, "sweep");
  fs::create_directories(out);
  HarnessOptions options = harness_options(cfg);
  options.confinement_radius = sweep.confinement_radius;
  const auto records = rmin_sweep(sweep.n, cfg.polarization, sweep.r_min_grid, cfg.settings, options);
  return stream_exit_code(write_records(out, records));
}

int cmd_scaling(const RunConfig& cfg, const fs::path& out) {
  const ScalingSection& sc = require_section(cfg.scaling, "scaling");
  fs::create_directories(out);
  std::vector<std::pair<std::string, ScalingComparison>> fits;

  if (sc.synthetic) {
    // Test mode: fit planted data without running any optimizer.
    std::vector<double> ns, gammas;
    for (int n : sc.n_list) {
      const double x = n;
      ns.push_back(x);
      gammas.push_back(sc.synthetic->model == ScalingModel::PowerLaw
                           ? sc.synthetic->amplitude * std::pow(x, sc.synthetic->exponent)
                           : sc.synthetic->amplitude * std::exp(sc.synthetic->exponent * x));
    }
    fits.emplace_back("synthetic", compare_scaling(ns, gammas));
    write_fits(out, fits);
    return kExitOk;
  }

  const ScalingStudy study = scaling_study(sc.n_list, sc.r_min, cfg.polarization, sc.families, cfg.settings,
                                           harness_options(cfg));
  for (const auto& [family, cmp] : study.fits) fits.emplace_back(std::string(to_string(family)), cmp);
  write_fits(out, fits);
  return stream_exit_code(write_records(out, study.records));
}

int cmd_compare1d(const RunConfig& cfg, const fs::path& out) {
  const Compare1dSection& section = require_section(cfg.compare1d, "compare1d");
  fs::create_directories(out);
  const Compare1dResult result =
      compare_1d(section.n, section.r_min_grid, cfg.settings, cfg.polarization, harness_options(cfg));

  std::ostringstream csv;
  csv << "r_min,optimized,periodic_chain,sinusoidal_modulation\n";
  for (const Compare1dRow& row : result.rows) {
    csv << format_number(row.r_min) << ',' << format_number(row.optimized) << ',' << format_number(row.periodic) << ','
        << format_number(row.modulated) << '\n';
  }
  write_file(out / "compare1d.csv", csv.str());

  std::ostringstream gaps;
  gaps << "r_min,interval,gap\n";
  for (const Compare1dRow& row : result.rows)
    for (std::size_t i = 0; i < row.optimized_gaps.size(); ++i)
      gaps << format_number(row.r_min) << ',' << i + 1 << ',' << format_number(row.optimized_gaps[i]) << '\n';
  write_file(out / "compare1d_gaps.csv", gaps.str());

  return stream_exit_code(write_records(out, result.records));
}

int cmd_oracle(const RunConfig& cfg, const fs::path& out) {
  const OracleSpec& spec = require_section(cfg.oracle, "oracle");
  fs::create_directories(out);
  const OracleResult result = grid_oracle(spec);
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["n"] = spec.n;
  doc["r_min"] = spec.constraints.r_min;
  doc["confinement_radius"] = spec.constraints.confinement_radius;
  doc["polarization"] = std::string(to_string(spec.polarization));
  doc["length_step"] = spec.length_step;
  doc["angle_step"] = spec.angle_step;
  doc["points"] = result.points;
  doc["feasible"] = result.feasible;
  if (result.feasible) {
    doc["gamma"] = result.gamma;
    doc["configuration"] = positions_to_json(result.configuration);
  } else {
    doc["gamma"] = nullptr;
    doc["error"] = "infeasible: no grid point satisfies the constraints";
  }
  write_json(out / "oracle.json", doc);
  return result.feasible ? kExitOk : kExitInfeasible;
}

}  // namespace subopt
