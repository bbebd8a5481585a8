#pragma once

#include "subopt/physics.hpp"

namespace subopt {

/// Lengths in units of lambda0.
struct Constraints {
  double r_min = 0.1;
  double confinement_radius = 5.0;

  void validate() const;
};

/// How a search space places emitters: free in the plane, or on a line.
enum class Layout { Planar, Collinear };

std::string_view to_string(Layout layout);

/// Sum over pairs of max(0, r_min - d_ij).
double spacing_violation(const EmitterConfiguration& cfg, double r_min);

/// Sum over emitters of max(0, |R_i - center| - radius).
double confinement_violation(const EmitterConfiguration& cfg, const Eigen::Vector2d& center, double radius);

/// Confinement radius used for collinear searches, N (r_min + lambda0) / 2.
inline double collinear_confinement_radius(int n, double r_min) { return n * (r_min + 1.0) / 2.0; }

}  // namespace subopt
