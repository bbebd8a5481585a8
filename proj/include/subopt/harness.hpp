#pragma once

#include "subopt/de.hpp"
#include "subopt/zoo.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace subopt {

enum class GeometryClass { LinearRegular, LinearStretched, Triangular, Square, Other };

std::string_view to_string(GeometryClass g);

struct ClassifierOptions {
  // Maximum transverse deviation from the best-fit line, units of lambda0.
  double line_tolerance = 0.05;
  double gap_cv = 1e-2;
  double angle_window_deg = 5.0;
  // Bonds are pairs closer than this multiple of the nearest-neighbour distance.
  double bond_ratio = 1.2;
};

GeometryClass classify_geometry(const EmitterConfiguration& cfg, double tol = 0.05);
GeometryClass classify_geometry(const EmitterConfiguration& cfg, const ClassifierOptions& options);

/// Gaps between consecutive atoms after projecting onto the principal axis.
std::vector<double> projected_gaps(const EmitterConfiguration& cfg);

/// Nearest-neighbour bonds under the classifier's bond rule.
std::vector<std::pair<Eigen::Index, Eigen::Index>> nearest_neighbour_bonds(const EmitterConfiguration& cfg,
                                                                           double bond_ratio = 1.2);

struct ExperimentRecord {
  int n = 0;
  double r_min = 0.0;
  Polarization polarization = Polarization::SigmaZ;
  // "free2d", "restricted1d" or "baseline:<family>"
  std::string mode;
  double best_gamma = 0.0;
  EmitterConfiguration configuration;
  std::optional<GeometryClass> geometry_class;
  std::vector<std::uint64_t> seeds;
  double runtime_s = 0.0;
  // Family parameters for baselines, gap vector for restricted1d runs.
  std::vector<double> params;
  std::string error;

  bool ok() const { return error.empty(); }
};

enum class ScalingModel { PowerLaw, Exponential };

std::string_view to_string(ScalingModel m);

/// gamma = amplitude * N^exponent (power law) or amplitude * exp(exponent * N) (exponential);
/// r_squared is computed on log(gamma).
struct ScalingFit {
  ScalingModel model = ScalingModel::PowerLaw;
  double amplitude = 0.0;
  double exponent = 0.0;
  double r_squared = 0.0;
};

struct ScalingComparison {
  ScalingFit power_law;
  ScalingFit exponential;
  const ScalingFit& preferred() const {
    return exponential.r_squared > power_law.r_squared ? exponential : power_law;
  }
};

ScalingFit fit_scaling(const std::vector<double>& ns, const std::vector<double>& gammas, ScalingModel model);
ScalingComparison compare_scaling(const std::vector<double>& ns, const std::vector<double>& gammas);

struct HarnessOptions {
  double confinement_radius = 5.0;
  // Measure wall-clock time per record; off keeps output byte-stable.
  bool record_timing = false;
  bool warm_start = true;
  ScanOptions scan;
  ClassifierOptions classifier;
};

/// One free-2D DE run per grid point plus chain, triangle and rectangle baselines.
std::vector<ExperimentRecord> rmin_sweep(int n, Polarization pol, const std::vector<double>& r_min_grid,
                                         const DeSettings& settings, const HarnessOptions& options = {});

enum class ScalingFamily { Periodic, Modulated, Restricted1d };

std::string_view to_string(ScalingFamily f);
ScalingFamily parse_scaling_family(std::string_view name);

struct ScalingStudy {
  std::vector<ExperimentRecord> records;
  std::map<ScalingFamily, ScalingComparison> fits;
};

ScalingStudy scaling_study(const std::vector<int>& n_list, double r_min, Polarization pol,
                           const std::set<ScalingFamily>& families, const DeSettings& settings,
                           const HarnessOptions& options = {});

struct Compare1dRow {
  double r_min = 0.0;
  double optimized = 0.0;
  double periodic = 0.0;
  double modulated = 0.0;
  std::vector<double> optimized_gaps;
};

struct Compare1dResult {
  std::vector<Compare1dRow> rows;
  std::vector<ExperimentRecord> records;
};

/// Restricted-1D DE against periodic and modulated chains with confinement N (r_min + lambda0) / 2.
Compare1dResult compare_1d(int n, const std::vector<double>& r_min_grid, const DeSettings& settings,
                           Polarization pol = Polarization::SigmaZ, const HarnessOptions& options = {});

/// Restricted-1D DE at a single r_min.
ExperimentRecord restricted_1d_run(int n, double r_min, Polarization pol, const DeSettings& settings,
                                   const HarnessOptions& options = {},
                                   const std::vector<ParameterVector>& warm_start = {});

struct OracleSpec {
  int n = 3;
  Constraints constraints;
  Polarization polarization = Polarization::SigmaZ;
  double length_step = 0.01;
  double angle_step = 0.01;
  // Upper end of the scanned separations; defaults to the confinement radius.
  std::optional<double> length_max;
};

struct OracleResult {
  bool feasible = false;
  double gamma = 0.0;
  EmitterConfiguration configuration;
  long points = 0;
};

/// Exhaustive grid minimum of gamma_min for N = 2 or 3, using closed-form pair and cubic spectra.
OracleResult grid_oracle(const OracleSpec& spec);

/// Decay rates of three emitters from the closed-form cubic characteristic polynomial.
std::array<double, 3> three_emitter_decays(Complex g12, Complex g13, Complex g23);

}  // namespace subopt
