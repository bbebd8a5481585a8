#include "subopt/harness.hpp"

#include "subopt/log.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace subopt {

namespace {

constexpr double kDegree = std::numbers::pi / 180.0;

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

struct PrincipalFrame {
  Eigen::Vector2d centroid;
  Eigen::Vector2d axis;
  Eigen::Vector2d normal;
};

PrincipalFrame principal_frame(const EmitterConfiguration& cfg) {
  const Positions& p = cfg.positions();
  PrincipalFrame frame;
  frame.centroid = p.colwise().mean().transpose();
  const Positions centered = p.rowwise() - frame.centroid.transpose();
  const Eigen::Matrix2d scatter = centered.transpose() * centered;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(scatter);
  frame.axis = solver.eigenvectors().col(1);
  frame.normal = solver.eigenvectors().col(0);
  return frame;
}

bool near_any(double angle, std::initializer_list<double> targets, double window) {
  return std::any_of(targets.begin(), targets.end(), [&](double t) { return std::abs(angle - t) <= window; });
}

std::optional<GeometryClass> classify_if_possible(const EmitterConfiguration& cfg, const ClassifierOptions& options) {
  if (cfg.size() < 3) return std::nullopt;
  return classify_geometry(cfg, options);
}

// Descending traversal lets each point start from the optimum of a tighter constraint, which
// stays feasible when r_min is relaxed.
std::vector<std::size_t> descending_order(const std::vector<double>& grid) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("r_min grid must be sorted ascending");
  std::vector<std::size_t> order(grid.size());
  std::iota(order.rbegin(), order.rend(), std::size_t{0});
  return order;
}

ExperimentRecord failed_record(int n, double r_min, Polarization pol, std::string mode, const std::exception& e) {
  ExperimentRecord r;
  r.n = n;
  r.r_min = r_min;
  r.polarization = pol;
  r.mode = std::move(mode);
  r.best_gamma = std::numeric_limits<double>::quiet_NaN();
  r.error = e.what();
  log::warn(r.mode, " n=", n, " r_min=", r_min, " failed: ", r.error);
  return r;
}

ExperimentRecord baseline_record(Family family, int n, const Constraints& c, Polarization pol, Layout layout,
                                 const HarnessOptions& options) {
  const std::string mode = "baseline:" + std::string(to_string(family));
  try {
    Stopwatch clock(options.record_timing);
    BaselineResult b = baseline_sweep(family, n, c, pol, layout, options.scan);
    ExperimentRecord r;
    r.n = n;
    r.r_min = c.r_min;
    r.polarization = pol;
    r.mode = mode;
    r.best_gamma = b.best_gamma;
    r.configuration = std::move(b.configuration);
    r.geometry_class = classify_if_possible(r.configuration, options.classifier);
    r.params = std::move(b.params);
    r.runtime_s = clock.seconds();
    return r;
  } catch (const std::exception& e) {
    return failed_record(n, c.r_min, pol, mode, e);
  }
}

double log_r_squared(const std::vector<double>& x, const std::vector<double>& y, double& slope, double& intercept) {
  const auto count = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / count;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  slope = sxy / sxx;
  intercept = my - slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (intercept + slope * x[i]);
    ss_res += r * r;
  }
  return syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
}

}  // namespace

std::string_view to_string(GeometryClass g) {
  switch (g) {
    case GeometryClass::LinearRegular: return "linear_regular";
    case GeometryClass::LinearStretched: return "linear_stretched";
    case GeometryClass::Triangular: return "triangular";
    case GeometryClass::Square: return "square";
    case GeometryClass::Other: return "other";
  }
  return "other";
}

std::vector<double> projected_gaps(const EmitterConfiguration& cfg) {
  const PrincipalFrame frame = principal_frame(cfg);
  std::vector<double> along(static_cast<std::size_t>(cfg.size()));
  for (Eigen::Index i = 0; i < cfg.size(); ++i)
    along[static_cast<std::size_t>(i)] = (cfg.position(i) - frame.centroid).dot(frame.axis);
  std::sort(along.begin(), along.end());
  std::vector<double> gaps;
  for (std::size_t i = 1; i < along.size(); ++i) gaps.push_back(along[i] - along[i - 1]);
  return gaps;
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> nearest_neighbour_bonds(const EmitterConfiguration& cfg,
                                                                           double bond_ratio) {
  const double cutoff = bond_ratio * cfg.min_distance();
  std::vector<std::pair<Eigen::Index, Eigen::Index>> bonds;
  for (Eigen::Index i = 0; i < cfg.size(); ++i)
    for (Eigen::Index j = i + 1; j < cfg.size(); ++j)
      if (cfg.distance(i, j) <= cutoff) bonds.emplace_back(i, j);
  return bonds;
}

GeometryClass classify_geometry(const EmitterConfiguration& cfg, double tol) {
  ClassifierOptions options;
  options.line_tolerance = tol;
  return classify_geometry(cfg, options);
}

GeometryClass classify_geometry(const EmitterConfiguration& cfg, const ClassifierOptions& options) {
  if (cfg.size() < 3) throw std::invalid_argument("classify_geometry: need at least three emitters");
  const PrincipalFrame frame = principal_frame(cfg);

  double deviation = 0.0;
  for (Eigen::Index i = 0; i < cfg.size(); ++i)
    deviation = std::max(deviation, std::abs((cfg.position(i) - frame.centroid).dot(frame.normal)));
  if (deviation < options.line_tolerance) {
    const std::vector<double> gaps = projected_gaps(cfg);
    const double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / static_cast<double>(gaps.size());
    double var = 0.0;
    for (double g : gaps) var += (g - mean) * (g - mean);
    const double cv = std::sqrt(var / static_cast<double>(gaps.size())) / mean;
    return cv < options.gap_cv ? GeometryClass::LinearRegular : GeometryClass::LinearStretched;
  }

  const auto bonds = nearest_neighbour_bonds(cfg, options.bond_ratio);
  std::vector<std::vector<Eigen::Vector2d>> spokes(static_cast<std::size_t>(cfg.size()));
  for (const auto& [i, j] : bonds) {
    spokes[static_cast<std::size_t>(i)].push_back(cfg.position(j) - cfg.position(i));
    spokes[static_cast<std::size_t>(j)].push_back(cfg.position(i) - cfg.position(j));
  }
  std::vector<double> angles;
  for (const auto& s : spokes) {
    for (std::size_t a = 0; a < s.size(); ++a)
      for (std::size_t b = a + 1; b < s.size(); ++b) {
        const double c = std::clamp(s[a].dot(s[b]) / (s[a].norm() * s[b].norm()), -1.0, 1.0);
        angles.push_back(std::acos(c) / kDegree);
      }
  }
  if (angles.empty()) return GeometryClass::Other;

  const double w = options.angle_window_deg;
  const bool triangular = std::all_of(angles.begin(), angles.end(), [&](double a) { return near_any(a, {60, 120, 180}, w); }) &&
                          std::any_of(angles.begin(), angles.end(), [&](double a) { return near_any(a, {60}, w); });
  if (triangular) return GeometryClass::Triangular;
  const bool square = std::all_of(angles.begin(), angles.end(), [&](double a) { return near_any(a, {90, 180}, w); }) &&
                      std::any_of(angles.begin(), angles.end(), [&](double a) { return near_any(a, {90}, w); });
  if (square) return GeometryClass::Square;
  return GeometryClass::Other;
}

std::string_view to_string(ScalingModel m) { return m == ScalingModel::PowerLaw ? "power_law" : "exponential"; }

ScalingFit fit_scaling(const std::vector<double>& ns, const std::vector<double>& gammas, ScalingModel model) {
  if (ns.size() != gammas.size()) throw std::invalid_argument("fit_scaling: size mismatch");
  if (ns.size() < 4) throw std::invalid_argument("fit_scaling: need at least 4 points");
  std::vector<double> x(ns.size()), y(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(gammas[i] > 0.0) || !(ns[i] > 0.0)) throw std::invalid_argument("fit_scaling: values must be positive");
    x[i] = model == ScalingModel::PowerLaw ? std::log(ns[i]) : ns[i];
    y[i] = std::log(gammas[i]);
  }
  ScalingFit fit;
  fit.model = model;
  double intercept = 0.0;
  fit.r_squared = log_r_squared(x, y, fit.exponent, intercept);
  fit.amplitude = std::exp(intercept);
  return fit;
}

ScalingComparison compare_scaling(const std::vector<double>& ns, const std::vector<double>& gammas) {
  return {fit_scaling(ns, gammas, ScalingModel::PowerLaw), fit_scaling(ns, gammas, ScalingModel::Exponential)};
}

std::vector<ExperimentRecord> rmin_sweep(int n, Polarization pol, const std::vector<double>& r_min_grid,
                                         const DeSettings& settings, const HarnessOptions& options) {
  const auto order = descending_order(r_min_grid);
  std::vector<std::vector<ExperimentRecord>> per_point(r_min_grid.size());
  std::vector<ParameterVector> warm;

  for (std::size_t idx : order) {
    const double r_min = r_min_grid[idx];
    const Constraints c{r_min, options.confinement_radius};
    auto& out = per_point[idx];
    log::info("sweep n=", n, " r_min=", r_min);
    try {
      Stopwatch clock(options.record_timing);
      const Problem problem{n, c, pol, Layout::Planar};
      DeRun run = run_de(problem, settings, options.warm_start ? warm : std::vector<ParameterVector>{});
      ExperimentRecord r;
      r.n = n;
      r.r_min = r_min;
      r.polarization = pol;
      r.mode = "free2d";
      r.best_gamma = run.best_gamma;
      r.configuration = decode(run.best_vector);
      r.geometry_class = classify_if_possible(r.configuration, options.classifier);
      r.seeds = run.seeds;
      r.params.assign(run.best_vector.data(), run.best_vector.data() + run.best_vector.size());
      r.runtime_s = clock.seconds();
      out.push_back(std::move(r));
      warm = {run.best_vector};
    } catch (const std::exception& e) {
      out.push_back(failed_record(n, r_min, pol, "free2d", e));
    }
    for (Family family : {Family::Chain, Family::Triangle, Family::Rectangle}) {
      out.push_back(baseline_record(family, n, c, pol, Layout::Planar, options));
    }
  }

  std::vector<ExperimentRecord> records;
  for (auto& point : per_point)
    for (auto& r : point) records.push_back(std::move(r));
  return records;
}

std::string_view to_string(ScalingFamily f) {
  switch (f) {
    case ScalingFamily::Periodic: return "periodic";
    case ScalingFamily::Modulated: return "modulated";
    case ScalingFamily::Restricted1d: return "restricted1d";
  }
  return "unknown";
}

ScalingFamily parse_scaling_family(std::string_view name) {
  if (name == "periodic" || name == "chain") return ScalingFamily::Periodic;
  if (name == "modulated") return ScalingFamily::Modulated;
  if (name == "restricted1d") return ScalingFamily::Restricted1d;
  throw std::invalid_argument("unknown scaling family '" + std::string(name) + "'");
}

ExperimentRecord restricted_1d_run(int n, double r_min, Polarization pol, const DeSettings& settings,
                                   const HarnessOptions& options, const std::vector<ParameterVector>& warm_start) {
  try {
    Stopwatch clock(options.record_timing);
    const Problem problem{n, {r_min, collinear_confinement_radius(n, r_min)}, pol, Layout::Collinear};
    DeRun run = run_de(problem, settings, warm_start);
    ExperimentRecord r;
    r.n = n;
    r.r_min = r_min;
    r.polarization = pol;
    r.mode = "restricted1d";
    r.best_gamma = run.best_gamma;
    r.configuration = decode_1d(run.best_vector);
    r.geometry_class = classify_if_possible(r.configuration, options.classifier);
    r.seeds = run.seeds;
    r.params.assign(run.best_vector.data(), run.best_vector.data() + run.best_vector.size());
    r.runtime_s = clock.seconds();
    return r;
  } catch (const std::exception& e) {
    return failed_record(n, r_min, pol, "restricted1d", e);
  }
}

ScalingStudy scaling_study(const std::vector<int>& n_list, double r_min, Polarization pol,
                           const std::set<ScalingFamily>& families, const DeSettings& settings,
                           const HarnessOptions& options) {
  if (n_list.size() < 4) throw std::invalid_argument("scaling_study: need at least 4 sizes");
  ScalingStudy study;
  for (ScalingFamily family : families) {
    std::vector<double> ns, gammas;
    for (int n : n_list) {
      log::info("scaling ", to_string(family), " n=", n, " r_min=", r_min);
      const Constraints c{r_min, collinear_confinement_radius(n, r_min)};
      ExperimentRecord r;
      switch (family) {
        case ScalingFamily::Periodic: r = baseline_record(Family::Chain, n, c, pol, Layout::Collinear, options); break;
        case ScalingFamily::Modulated: r = baseline_record(Family::Modulated, n, c, pol, Layout::Collinear, options); break;
        case ScalingFamily::Restricted1d: r = restricted_1d_run(n, r_min, pol, settings, options); break;
      }
      if (r.ok() && r.best_gamma > 0.0) {
        ns.push_back(n);
        gammas.push_back(r.best_gamma);
      }
      study.records.push_back(std::move(r));
    }
    if (ns.size() >= 4) {
      study.fits[family] = compare_scaling(ns, gammas);
    } else {
      log::warn("scaling ", to_string(family), ": fewer than 4 successful sizes, no fit");
    }
  }
  return study;
}

Compare1dResult compare_1d(int n, const std::vector<double>& r_min_grid, const DeSettings& settings, Polarization pol,
                           const HarnessOptions& options) {
  if (n < 3) throw std::invalid_argument("compare_1d: n must be >= 3");
  const auto order = descending_order(r_min_grid);
  Compare1dResult result;
  result.rows.resize(r_min_grid.size());
  std::vector<std::array<ExperimentRecord, 3>> per_point(r_min_grid.size());
  std::vector<ParameterVector> warm;

  for (std::size_t idx : order) {
    const double r_min = r_min_grid[idx];
    log::info("compare1d n=", n, " r_min=", r_min);
    const Constraints c{r_min, collinear_confinement_radius(n, r_min)};
    ExperimentRecord de = restricted_1d_run(n, r_min, pol, settings, options, options.warm_start ? warm : std::vector<ParameterVector>{});
    if (de.ok()) warm = {Eigen::Map<const Eigen::VectorXd>(de.params.data(), static_cast<Eigen::Index>(de.params.size()))};
    ExperimentRecord periodic = baseline_record(Family::Chain, n, c, pol, Layout::Collinear, options);
    ExperimentRecord modulated = baseline_record(Family::Modulated, n, c, pol, Layout::Collinear, options);

    Compare1dRow& row = result.rows[idx];
    row.r_min = r_min;
    row.optimized = de.best_gamma;
    row.periodic = periodic.best_gamma;
    row.modulated = modulated.best_gamma;
    if (de.ok()) row.optimized_gaps = de.params;
    per_point[idx] = {std::move(de), std::move(periodic), std::move(modulated)};
  }
  for (auto& point : per_point)
    for (auto& r : point) result.records.push_back(std::move(r));
  return result;
}

std::array<double, 3> three_emitter_decays(Complex g12, Complex g13, Complex g23) {
  // H = -i/2 + B with B zero-diagonal symmetric: mu^3 + p mu + q = 0.
  const Complex p = -(g12 * g12 + g13 * g13 + g23 * g23);
  const Complex q = -2.0 * g12 * g13 * g23;
  const Complex disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
  Complex u3 = -q / 2.0 + disc;
  if (std::abs(u3) < std::abs(-q / 2.0 - disc)) u3 = -q / 2.0 - disc;
  const Complex u = std::pow(u3, 1.0 / 3.0);
  const Complex omega = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);

  std::array<double, 3> decays{};
  Complex rot(1.0, 0.0);
  for (int k = 0; k < 3; ++k, rot *= omega) {
    Complex mu = std::abs(u) > 0.0 ? u * rot - p / (3.0 * u * rot) : Complex(0.0, 0.0);
    for (int it = 0; it < 2; ++it) {
      const Complex d = 3.0 * mu * mu + p;
      if (std::abs(d) == 0.0) break;
      mu -= (mu * mu * mu + p * mu + q) / d;
    }
    decays[static_cast<std::size_t>(k)] = 1.0 - 2.0 * mu.imag();
  }
  return decays;
}

OracleResult grid_oracle(const OracleSpec& spec) {
  if (spec.n != 2 && spec.n != 3) throw std::invalid_argument("grid oracle supports N = 2 or 3 only");
  if (!(spec.length_step > 0.0) || !(spec.angle_step > 0.0)) throw std::invalid_argument("grid oracle: steps must be positive");
  const double r_min = spec.constraints.r_min;
  const double upper = spec.length_max.value_or(spec.constraints.confinement_radius);
  const auto steps = [&](double lo, double hi, double step) {
    return hi < lo ? 0L : static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  };
  const long n_len = steps(r_min, upper, spec.length_step);

  OracleResult result;
  result.gamma = std::numeric_limits<double>::infinity();
  if (n_len == 0) return result;

  std::vector<Complex> coupling(static_cast<std::size_t>(n_len));
  for (long i = 0; i < n_len; ++i) {
    const double r = r_min + static_cast<double>(i) * spec.length_step;
    coupling[static_cast<std::size_t>(i)] = green_coupling(kWavenumber * r, spec.polarization);
  }

  if (spec.n == 2) {
    for (long i = 0; i < n_len; ++i) {
      const double gamma = 1.0 - 2.0 * std::abs(coupling[static_cast<std::size_t>(i)].imag());
      ++result.points;
      if (gamma < result.gamma) {
        const double r = r_min + static_cast<double>(i) * spec.length_step;
        result.gamma = gamma;
        result.configuration = EmitterConfiguration{{0.0, 0.0}, {r, 0.0}};
        result.feasible = true;
      }
    }
    return result;
  }

  const long n_ang = static_cast<long>(std::ceil(2.0 * std::numbers::pi / spec.angle_step - 1e-9));
  std::vector<double> cosines(static_cast<std::size_t>(n_ang)), sines(static_cast<std::size_t>(n_ang));
  for (long k = 0; k < n_ang; ++k) {
    cosines[static_cast<std::size_t>(k)] = std::cos(static_cast<double>(k) * spec.angle_step);
    sines[static_cast<std::size_t>(k)] = std::sin(static_cast<double>(k) * spec.angle_step);
  }
  for (long i = 0; i < n_len; ++i) {
    const double r2 = r_min + static_cast<double>(i) * spec.length_step;
    for (long j = 0; j < n_len; ++j) {
      const double rho = r_min + static_cast<double>(j) * spec.length_step;
      for (long k = 0; k < n_ang; ++k) {
        const double dx = rho * cosines[static_cast<std::size_t>(k)] - r2;
        const double dy = rho * sines[static_cast<std::size_t>(k)];
        const double d23 = std::sqrt(dx * dx + dy * dy);
        if (d23 < r_min) continue;
        ++result.points;
        const auto decays = three_emitter_decays(coupling[static_cast<std::size_t>(i)],
                                                 coupling[static_cast<std::size_t>(j)],
                                                 green_coupling(kWavenumber * d23, spec.polarization));
        const double gamma = *std::min_element(decays.begin(), decays.end());
        if (gamma < result.gamma) {
          result.gamma = gamma;
          result.configuration = EmitterConfiguration{
              {0.0, 0.0}, {r2, 0.0}, {rho * cosines[static_cast<std::size_t>(k)], rho * sines[static_cast<std::size_t>(k)]}};
          result.feasible = true;
        }
      }
    }
  }
  return result;
}

}  // namespace subopt
