#pragma once

#include "subopt/constraints.hpp"
#include "subopt/physics.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace subopt {

/// Atoms at (i a, 0), i = 0..n-1.
EmitterConfiguration regular_chain(int n, double a);

/// Triangular-lattice fragment of spacing a, filled row by row (rows of k, k-1, ... sites,
/// k the smallest with k(k+1)/2 >= n), centred on its centroid.
EmitterConfiguration triangular_fragment(int n, double a);

/// rows x cols square-lattice fragment, centred on its centroid.
EmitterConfiguration rectangular_fragment(int rows, int cols, double a);

struct ModulatedChainParams {
  int n = 3;
  double r_min = 0.2;
  double r_max = 0.4;
};

/// Gaps r_max - (r_max - r_min) sin^2(pi (i-1) / (n-2)), i = 1..n-1.
std::vector<double> modulated_gaps(const ModulatedChainParams& p);
EmitterConfiguration modulated_chain(const ModulatedChainParams& p);

/// Collinear atoms on the x-axis starting at the origin.
EmitterConfiguration decode_1d(const std::vector<double>& gaps);
EmitterConfiguration decode_1d(const Eigen::Ref<const Eigen::VectorXd>& gaps);

enum class Family { Chain, Triangle, Rectangle, Modulated };

std::string_view to_string(Family family);
Family parse_family(std::string_view name);

struct BaselineResult {
  Family family = Family::Chain;
  // chain/triangle: {a}; rectangle: {rows, cols, a}; modulated: {r_max}
  std::vector<double> params;
  double best_gamma = 0.0;
  EmitterConfiguration configuration;
};

struct ScanOptions {
  double step = 1e-3;
  double refine_tolerance = 1e-6;
  // Lattice constants are scanned over [r_min, r_min + spacing_span].
  double spacing_span = 1.0;
};

/// Minimizes gamma_min over a family's free parameters with every spacing >= r_min and the
/// structure realizable inside the confinement region of the given layout.
BaselineResult baseline_sweep(Family family, int n, const Constraints& c, Polarization pol,
                              Layout layout = Layout::Planar, const ScanOptions& options = {});

/// Grid scan over [lo, hi] followed by golden-section refinement around the best grid point.
/// Infeasible points report nullopt.
struct ScalarMinimum {
  double argument = 0.0;
  double value = 0.0;
};
std::optional<ScalarMinimum> scan_minimize(const std::function<std::optional<double>(double)>& f, double lo,
                                           double hi, double step, double tolerance);

}  // namespace subopt
