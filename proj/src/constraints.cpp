#include "subopt/constraints.hpp"

#include <algorithm>

namespace subopt {

void Constraints::validate() const {
  if (!(r_min > 0.0)) throw std::invalid_argument("constraints: r_min must be positive");
  if (!(confinement_radius > 0.0)) throw std::invalid_argument("constraints: confinement radius must be positive");
}

std::string_view to_string(Layout layout) {
  return layout == Layout::Planar ? "planar" : "collinear";
}

double spacing_violation(const EmitterConfiguration& cfg, double r_min) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < cfg.size(); ++i)
    for (Eigen::Index j = i + 1; j < cfg.size(); ++j) total += std::max(0.0, r_min - cfg.distance(i, j));
  return total;
}

double confinement_violation(const EmitterConfiguration& cfg, const Eigen::Vector2d& center, double radius) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < cfg.size(); ++i) total += std::max(0.0, (cfg.position(i) - center).norm() - radius);
  return total;
}

}  // namespace subopt
