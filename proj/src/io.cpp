#include "subopt/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace subopt {

namespace {

using json = nlohmann::json;

// Reads one JSON object, tracks the keys consumed and rejects everything else.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail("expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  template <typename T>
  T get(const std::string& key, const T& fallback) {
    if (!has(key)) {
      allowed_.insert(key);
      return fallback;
    }
    return required<T>(key);
  }

  template <typename T>
  T required(const std::string& key) {
    allowed_.insert(key);
    if (!has(key)) fail_field(key, "missing required field");
    try {
      return node_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail_field(key, std::string("wrong type (") + e.what() + ")");
    }
  }

  const json& raw(const std::string& key) {
    allowed_.insert(key);
    if (!has(key)) fail_field(key, "missing required field");
    return node_.at(key);
  }

  Section child(const std::string& key) {
    allowed_.insert(key);
    return Section(node_.at(key), path_ + "/" + key);
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!allowed_.contains(item.key())) fail_field(item.key(), "unknown key");
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("field " + (path_.empty() ? std::string("/") : path_) + ": " + what);
  }
  [[noreturn]] void fail_field(const std::string& key, const std::string& what) const {
    throw ConfigError("field " + path_ + "/" + key + ": " + what);
  }
  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> allowed_;
};

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < std::min(byte == 0 ? 0 : byte - 1, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return std::to_string(line) + ":" + std::to_string(column);
}

template <typename F>
auto guarded(const Section& s, const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    s.fail_field(key, e.what());
  }
}

std::vector<double> parse_grid(Section& parent, const std::string& key) {
  const json& node = parent.raw(key);
  if (node.is_array()) {
    std::vector<double> grid;
    try {
      grid = node.get<std::vector<double>>();
    } catch (const json::exception&) {
      parent.fail_field(key, "expected an array of numbers");
    }
    if (grid.empty()) parent.fail_field(key, "grid is empty");
    if (!std::is_sorted(grid.begin(), grid.end())) parent.fail_field(key, "grid must be sorted ascending");
    return grid;
  }
  Section range(node, parent.path() + "/" + key);
  const double start = range.required<double>("start");
  const double stop = range.required<double>("stop");
  const double step = range.required<double>("step");
  range.finish();
  if (!(step > 0.0) || stop < start) parent.fail_field(key, "range needs step > 0 and stop >= start");
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  for (long i = 0; i < count; ++i) {
    // Rounded to 1e-12 so that 0.1 + 3 * 0.05 prints as 0.25.
    grid.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return grid;
}

DeSettings parse_settings(Section s) {
  DeSettings d;
  d.population_size = s.get<int>("population_size", d.population_size);
  if (s.has("f_range")) {
    const auto range = s.required<std::vector<double>>("f_range");
    if (range.size() != 2) s.fail_field("f_range", "expected [low, high]");
    d.f_min = range[0];
    d.f_max = range[1];
  } else {
    s.get<int>("f_range", 0);
  }
  d.crossover_rate = s.get<double>("crossover_rate", d.crossover_rate);
  d.max_generations = s.get<int>("max_generations", d.max_generations);
  d.stop_rel_dispersion = s.get<double>("stop_rel_dispersion", d.stop_rel_dispersion);
  d.restarts = s.get<int>("restarts", d.restarts);
  d.seed = s.get<std::uint64_t>("seed", d.seed);
  d.crossover_base = guarded(s, "crossover_base", [&] {
    return parse_crossover_base(s.get<std::string>("crossover_base", std::string(to_string(d.crossover_base))));
  });
  s.finish();
  guarded(s, "", [&] {
    d.validate();
    return 0;
  });
  return d;
}

EmitterConfiguration parse_configuration_section(Section s) {
  const bool inline_positions = s.has("positions");
  const bool generated = s.has("generator");
  if (inline_positions == generated) s.fail("give exactly one of 'positions' or 'generator'");
  EmitterConfiguration cfg;
  if (inline_positions) {
    cfg = guarded(s, "positions", [&] { return positions_from_json(s.raw("positions")); });
  } else {
    const std::string spec = s.required<std::string>("generator");
    cfg = guarded(s, "generator", [&] { return generate_configuration(spec); });
  }
  s.finish();
  if (cfg.size() < 1) s.fail("configuration has no emitters");
  guarded(s, inline_positions ? "positions" : "generator", [&] {
    cfg.require_distinct();
    return 0;
  });
  return cfg;
}

ProblemSection parse_problem(Section s) {
  ProblemSection p;
  p.n = s.required<int>("n");
  p.r_min = s.required<double>("r_min");
  if (s.has("confinement_radius")) p.confinement_radius = s.required<double>("confinement_radius");
  const std::string mode = s.get<std::string>("mode", "free2d");
  if (mode == "free2d") {
    p.mode = RunMode::Free2d;
  } else if (mode == "restricted1d") {
    p.mode = RunMode::Restricted1d;
  } else {
    s.fail_field("mode", "expected 'free2d' or 'restricted1d'");
  }
  s.finish();
  if (p.n < 2) s.fail_field("n", "N must be >= 2");
  if (!(p.r_min > 0.0)) s.fail_field("r_min", "must be positive");
  return p;
}

ScalingModel parse_model(const Section& s, const std::string& key, const std::string& name) {
  if (name == "power_law") return ScalingModel::PowerLaw;
  if (name == "exponential") return ScalingModel::Exponential;
  s.fail_field(key, "expected 'power_law' or 'exponential'");
}

ScalingSection parse_scaling(Section s) {
  ScalingSection sc;
  sc.n_list = s.required<std::vector<int>>("n_list");
  if (sc.n_list.size() < 4) s.fail_field("n_list", "need at least 4 sizes");
  sc.r_min = s.get<double>("r_min", sc.r_min);
  if (s.has("families")) {
    sc.families.clear();
    for (const auto& name : s.required<std::vector<std::string>>("families")) {
      sc.families.insert(guarded(s, "families", [&] { return parse_scaling_family(name); }));
    }
  } else {
    s.get<int>("families", 0);
  }
  if (s.has("synthetic")) {
    Section syn = s.child("synthetic");
    SyntheticScaling planted;
    planted.model = parse_model(syn, "model", syn.required<std::string>("model"));
    planted.amplitude = syn.required<double>("amplitude");
    planted.exponent = syn.required<double>("exponent");
    syn.finish();
    sc.synthetic = planted;
  } else {
    s.get<int>("synthetic", 0);
  }
  s.finish();
  return sc;
}

OracleSpec parse_oracle(Section s, Polarization pol) {
  OracleSpec o;
  o.n = s.required<int>("n");
  if (o.n != 2 && o.n != 3) s.fail_field("n", "the grid oracle is limited to N = 2 or 3");
  o.constraints.r_min = s.required<double>("r_min");
  o.constraints.confinement_radius = s.get<double>("confinement_radius", 5.0);
  o.length_step = s.get<double>("length_step", o.length_step);
  o.angle_step = s.get<double>("angle_step", o.angle_step);
  if (s.has("length_max")) o.length_max = s.required<double>("length_max");
  s.finish();
  if (!(o.constraints.r_min > 0.0)) s.fail_field("r_min", "must be positive");
  if (!(o.length_step > 0.0)) s.fail_field("length_step", "must be positive");
  if (!(o.angle_step > 0.0)) s.fail_field("angle_step", "must be positive");
  o.polarization = pol;
  return o;
}

std::string json_number(double v) {
  return ordered_json(v).dump();
}

}  // namespace

std::string_view to_string(RunMode mode) { return mode == RunMode::Free2d ? "free2d" : "restricted1d"; }

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ":" + line_column(text, e.byte) + ": syntax error: " + e.what());
  }
  Section s(root, "");
  RunConfig cfg;
  cfg.schema_version = s.required<int>("schema_version");
  if (cfg.schema_version != kSchemaVersion) {
    s.fail_field("schema_version", "unsupported version " + std::to_string(cfg.schema_version) + " (expected " +
                                       std::to_string(kSchemaVersion) + ")");
  }
  const std::string pol = s.get<std::string>("polarization", "sigma_z");
  cfg.polarization = guarded(s, "polarization", [&] { return parse_polarization(pol); });

  if (s.has("configuration")) cfg.configuration = parse_configuration_section(s.child("configuration"));
  if (s.has("problem")) cfg.problem = parse_problem(s.child("problem"));
  if (s.has("settings")) {
    cfg.settings = parse_settings(s.child("settings"));
  }
  if (s.has("scan")) {
    Section scan = s.child("scan");
    cfg.scan.step = scan.get<double>("step", cfg.scan.step);
    cfg.scan.refine_tolerance = scan.get<double>("refine_tolerance", cfg.scan.refine_tolerance);
    cfg.scan.spacing_span = scan.get<double>("spacing_span", cfg.scan.spacing_span);
    scan.finish();
    if (!(cfg.scan.step > 0.0) || !(cfg.scan.refine_tolerance > 0.0) || !(cfg.scan.spacing_span >= 0.0)) {
      scan.fail("step and refine_tolerance must be positive, spacing_span non-negative");
    }
  }
  if (s.has("sweep")) {
    Section sw = s.child("sweep");
    SweepSection sweep;
    sweep.n = sw.required<int>("n");
    sweep.r_min_grid = parse_grid(sw, "r_min_grid");
    sweep.confinement_radius = sw.get<double>("confinement_radius", sweep.confinement_radius);
    sw.finish();
    if (sweep.n < 2) sw.fail_field("n", "N must be >= 2");
    cfg.sweep = sweep;
  }
  if (s.has("scaling")) cfg.scaling = parse_scaling(s.child("scaling"));
  if (s.has("compare1d")) {
    Section c = s.child("compare1d");
    Compare1dSection cmp;
    cmp.n = c.required<int>("n");
    cmp.r_min_grid = parse_grid(c, "r_min_grid");
    c.finish();
    if (cmp.n < 3) c.fail_field("n", "N must be >= 3");
    cfg.compare1d = cmp;
  }
  if (s.has("oracle")) cfg.oracle = parse_oracle(s.child("oracle"), cfg.polarization);
  if (s.has("output")) {
    Section out = s.child("output");
    cfg.record_timing = out.get<bool>("timing", false);
    out.finish();
  }
  s.finish();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open configuration file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), path.string());
}

EmitterConfiguration generate_configuration(const std::string& spec) {
  std::istringstream in(spec);
  std::string family;
  in >> family;
  std::map<std::string, double> values;
  for (std::string token; in >> token;) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("generator token '" + token + "' is not key=value");
    try {
      values[token.substr(0, eq)] = std::stod(token.substr(eq + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("generator value in '" + token + "' is not a number");
    }
  }
  std::set<std::string> used;
  auto take = [&](const std::string& key) {
    const auto it = values.find(key);
    if (it == values.end()) throw std::invalid_argument("generator '" + family + "' needs " + key + "=");
    used.insert(key);
    return it->second;
  };
  auto take_int = [&](const std::string& key) {
    const double v = take(key);
    if (v != std::floor(v)) throw std::invalid_argument("generator field " + key + " must be an integer");
    return static_cast<int>(v);
  };

  EmitterConfiguration cfg;
  if (family == "chain") {
    cfg = regular_chain(take_int("n"), take("a"));
  } else if (family == "triangle") {
    cfg = triangular_fragment(take_int("n"), take("a"));
  } else if (family == "rectangle") {
    cfg = rectangular_fragment(take_int("rows"), take_int("cols"), take("a"));
  } else if (family == "modulated") {
    cfg = modulated_chain({take_int("n"), take("r_min"), take("r_max")});
  } else {
    throw std::invalid_argument("unknown generator family '" + family + "'");
  }
  for (const auto& [key, value] : values) {
    if (!used.contains(key)) throw std::invalid_argument("generator '" + family + "' does not take " + key + "=");
  }
  return cfg;
}

ordered_json positions_to_json(const EmitterConfiguration& cfg) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < cfg.size(); ++i) arr.push_back({cfg.positions()(i, 0), cfg.positions()(i, 1)});
  return arr;
}

EmitterConfiguration positions_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array()) throw std::invalid_argument(field + " must be an array of [x, y] pairs");
  Positions p(static_cast<Eigen::Index>(j.size()), 2);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& row = j[i];
    if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number()) {
      throw std::invalid_argument(field + "[" + std::to_string(i) + "] must be [x, y]");
    }
    p(static_cast<Eigen::Index>(i), 0) = row[0].get<double>();
    p(static_cast<Eigen::Index>(i), 1) = row[1].get<double>();
  }
  return EmitterConfiguration(std::move(p));
}

ordered_json configuration_document(const EmitterConfiguration& cfg, Polarization pol) {
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["polarization"] = std::string(to_string(pol));
  doc["n"] = cfg.size();
  doc["positions"] = positions_to_json(cfg);
  return doc;
}

EmitterConfiguration parse_configuration_document(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("configuration document: " + line_column(text, e.byte) + ": syntax error");
  }
  Section s(doc, "");
  const int version = s.required<int>("schema_version");
  if (version != kSchemaVersion) s.fail_field("schema_version", "unsupported version " + std::to_string(version));
  s.get<std::string>("polarization", "sigma_z");
  s.get<int>("n", 0);
  EmitterConfiguration cfg = guarded(s, "positions", [&] { return positions_from_json(s.raw("positions")); });
  s.finish();
  return cfg;
}

ordered_json record_to_json(const ExperimentRecord& r) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = r.n;
  j["r_min"] = r.r_min;
  j["polarization"] = std::string(to_string(r.polarization));
  j["mode"] = r.mode;
  if (r.ok()) {
    j["best_gamma"] = r.best_gamma;
  } else {
    j["best_gamma"] = nullptr;
  }
  j["geometry_class"] = r.geometry_class ? ordered_json(std::string(to_string(*r.geometry_class))) : ordered_json(nullptr);
  j["configuration"] = positions_to_json(r.configuration);
  j["params"] = r.params;
  j["seeds"] = r.seeds;
  j["runtime_s"] = r.runtime_s;
  j["error"] = r.ok() ? ordered_json(nullptr) : ordered_json(r.error);
  return j;
}

ExperimentRecord record_from_json(const nlohmann::json& j) {
  Section s(j, "");
  const int version = s.required<int>("schema_version");
  if (version != kSchemaVersion) s.fail_field("schema_version", "unsupported version " + std::to_string(version));
  ExperimentRecord r;
  r.n = s.required<int>("n");
  r.r_min = s.required<double>("r_min");
  r.polarization = guarded(s, "polarization", [&] { return parse_polarization(s.required<std::string>("polarization")); });
  r.mode = s.required<std::string>("mode");
  const json& gamma = s.raw("best_gamma");
  r.best_gamma = gamma.is_null() ? std::nan("") : gamma.get<double>();
  const json& cls = s.raw("geometry_class");
  if (!cls.is_null()) {
    const std::string name = cls.get<std::string>();
    for (GeometryClass g : {GeometryClass::LinearRegular, GeometryClass::LinearStretched, GeometryClass::Triangular,
                            GeometryClass::Square, GeometryClass::Other}) {
      if (to_string(g) == name) r.geometry_class = g;
    }
    if (!r.geometry_class) s.fail_field("geometry_class", "unknown class '" + name + "'");
  }
  r.configuration = guarded(s, "configuration", [&] { return positions_from_json(s.raw("configuration"), "configuration"); });
  r.params = s.required<std::vector<double>>("params");
  r.seeds = s.required<std::vector<std::uint64_t>>("seeds");
  r.runtime_s = s.required<double>("runtime_s");
  const json& err = s.raw("error");
  if (!err.is_null()) r.error = err.get<std::string>();
  s.finish();
  return r;
}

std::string record_csv_header() { return "n,r_min,polarization,mode,best_gamma,geometry_class"; }

std::string record_csv_row(const ExperimentRecord& r) {
  std::ostringstream os;
  os << r.n << ',' << format_number(r.r_min) << ',' << to_string(r.polarization) << ',' << r.mode << ','
     << (r.ok() ? format_number(r.best_gamma) : std::string("nan")) << ','
     << (r.geometry_class ? std::string(to_string(*r.geometry_class)) : std::string());
  return os.str();
}

ordered_json run_to_json(const DeRun& run, const Problem& problem) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["n"] = problem.n;
  j["mode"] = problem.layout == Layout::Planar ? "free2d" : "restricted1d";
  j["polarization"] = std::string(to_string(problem.polarization));
  j["r_min"] = problem.constraints.r_min;
  j["confinement_radius"] = problem.constraints.confinement_radius;
  j["best_gamma"] = run.best_gamma;
  j["best_vector"] = std::vector<double>(run.best_vector.data(), run.best_vector.data() + run.best_vector.size());
  j["generations_used"] = run.generations_used;
  j["objective_evaluations"] = run.objective_evaluations;
  j["seed_used"] = run.seed_used;
  j["seeds"] = run.seeds;
  ordered_json trace = ordered_json::array();
  for (const TracePoint& t : run.convergence_trace) trace.push_back({t.generation, t.best_gamma, t.dispersion});
  j["convergence_trace"] = std::move(trace);
  return j;
}

void write_mode_table(std::ostream& os, const std::vector<ModeRow>& rows, const EmitterConfiguration& cfg) {
  os << "# " << rows.size() << " collective modes, sorted by decay (units of Gamma0)\n";
  os << std::left << std::setw(6) << "mode" << std::setw(22) << "shift" << "decay\n";
  for (const ModeRow& row : rows) {
    os << std::left << std::setw(6) << row.mode << std::setw(22) << format_number(row.shift) << format_number(row.decay)
       << '\n';
  }
  os << "\n# per-atom amplitudes\n";
  os << std::left << std::setw(6) << "mode" << std::setw(6) << "atom" << std::setw(20) << "x" << std::setw(20) << "y"
     << std::setw(20) << "|psi|^2" << "arg(psi)\n";
  for (const ModeRow& row : rows) {
    for (std::size_t i = 0; i < row.atoms.size(); ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      os << std::left << std::setw(6) << row.mode << std::setw(6) << i << std::setw(20)
         << format_number(cfg.positions()(idx, 0)) << std::setw(20) << format_number(cfg.positions()(idx, 1))
         << std::setw(20) << format_number(row.atoms[i].probability) << format_number(row.atoms[i].phase) << '\n';
    }
  }
}

void write_mode_csv(std::ostream& os, const std::vector<ModeRow>& rows, const EmitterConfiguration& cfg) {
  os << "mode,shift,decay,atom,x,y,probability,phase\n";
  for (const ModeRow& row : rows) {
    for (std::size_t i = 0; i < row.atoms.size(); ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      os << row.mode << ',' << format_number(row.shift) << ',' << format_number(row.decay) << ',' << i << ','
         << json_number(cfg.positions()(idx, 0)) << ',' << json_number(cfg.positions()(idx, 1)) << ','
         << format_number(row.atoms[i].probability) << ',' << format_number(row.atoms[i].phase) << '\n';
    }
  }
}

}  // namespace subopt
