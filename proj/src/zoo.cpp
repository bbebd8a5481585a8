#include "subopt/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace subopt {

namespace {

void center_on_centroid(Positions& p) {
  const Eigen::RowVector2d centroid = p.colwise().mean();
  p.rowwise() -= centroid;
}

bool realizable(const EmitterConfiguration& cfg, const Constraints& c, Layout layout) {
  constexpr double slack = 1e-12;
  if (cfg.size() > 1 && cfg.min_distance() < c.r_min - slack) return false;
  if (layout == Layout::Collinear) {
    const double lo = cfg.positions().col(0).minCoeff();
    const double hi = cfg.positions().col(0).maxCoeff();
    return hi - lo <= 2.0 * c.confinement_radius + slack;
  }
  // Any emitter may play the role of the pinned first atom.
  for (Eigen::Index k = 0; k < cfg.size(); ++k)
    if (confinement_violation(cfg, cfg.position(k), c.confinement_radius + slack) == 0.0) return true;
  return false;
}

}  // namespace

EmitterConfiguration regular_chain(int n, double a) {
  if (n < 1) throw std::invalid_argument("regular_chain: n must be >= 1");
  if (!(a > 0.0)) throw std::invalid_argument("regular_chain: spacing must be positive");
  Positions p = Positions::Zero(n, 2);
  for (int i = 0; i < n; ++i) p(i, 0) = i * a;
  return EmitterConfiguration(std::move(p));
}

EmitterConfiguration triangular_fragment(int n, double a) {
  if (n < 3) throw std::invalid_argument("triangular_fragment: n must be >= 3");
  if (!(a > 0.0)) throw std::invalid_argument("triangular_fragment: spacing must be positive");
  int k = 1;
  while (k * (k + 1) / 2 < n) ++k;
  Positions p(n, 2);
  const double row_height = a * std::sqrt(3.0) / 2.0;
  int placed = 0;
  for (int row = 0; row < k && placed < n; ++row) {
    for (int col = 0; col < k - row && placed < n; ++col, ++placed) {
      p(placed, 0) = (col + 0.5 * row) * a;
      p(placed, 1) = row * row_height;
    }
  }
  center_on_centroid(p);
  return EmitterConfiguration(std::move(p));
}

EmitterConfiguration rectangular_fragment(int rows, int cols, double a) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("rectangular_fragment: rows and cols must be >= 1");
  if (!(a > 0.0)) throw std::invalid_argument("rectangular_fragment: spacing must be positive");
  Positions p(rows * cols, 2);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      p(i * cols + j, 0) = j * a;
      p(i * cols + j, 1) = i * a;
    }
  center_on_centroid(p);
  return EmitterConfiguration(std::move(p));
}

std::vector<double> modulated_gaps(const ModulatedChainParams& p) {
  if (p.n < 3) throw std::invalid_argument("modulated_chain: n must be >= 3");
  if (!(p.r_min > 0.0)) throw std::invalid_argument("modulated_chain: r_min must be positive");
  if (p.r_max < p.r_min) throw std::invalid_argument("modulated_chain: r_max below r_min");
  std::vector<double> gaps(static_cast<std::size_t>(p.n - 1));
  for (int i = 1; i <= p.n - 1; ++i) {
    const double s = std::sin(std::numbers::pi * (i - 1) / (p.n - 2));
    gaps[static_cast<std::size_t>(i - 1)] = p.r_max - (p.r_max - p.r_min) * s * s;
  }
  return gaps;
}

EmitterConfiguration modulated_chain(const ModulatedChainParams& p) { return decode_1d(modulated_gaps(p)); }

EmitterConfiguration decode_1d(const std::vector<double>& gaps) {
  return decode_1d(Eigen::Map<const Eigen::VectorXd>(gaps.data(), static_cast<Eigen::Index>(gaps.size())));
}

EmitterConfiguration decode_1d(const Eigen::Ref<const Eigen::VectorXd>& gaps) {
  Positions p = Positions::Zero(gaps.size() + 1, 2);
  for (Eigen::Index i = 0; i < gaps.size(); ++i) p(i + 1, 0) = p(i, 0) + gaps(i);
  return EmitterConfiguration(std::move(p));
}

std::string_view to_string(Family family) {
  switch (family) {
    case Family::Chain: return "chain";
    case Family::Triangle: return "triangle";
    case Family::Rectangle: return "rectangle";
    case Family::Modulated: return "modulated";
  }
  return "unknown";
}

Family parse_family(std::string_view name) {
  if (name == "chain" || name == "periodic") return Family::Chain;
  if (name == "triangle") return Family::Triangle;
  if (name == "rectangle") return Family::Rectangle;
  if (name == "modulated") return Family::Modulated;
  throw std::invalid_argument("unknown structure family '" + std::string(name) + "'");
}

std::optional<ScalarMinimum> scan_minimize(const std::function<std::optional<double>(double)>& f, double lo,
                                           double hi, double step, double tolerance) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto eval = [&](double x) { return f(x).value_or(inf); };

  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(count) + 1);
  for (long i = 0; i < count; ++i) xs.push_back(lo + static_cast<double>(i) * step);
  if (xs.back() < hi - 1e-12) xs.push_back(hi);

  std::size_t best = 0;
  double best_value = inf;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = eval(xs[i]);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best_value == inf) return std::nullopt;

  ScalarMinimum result{xs[best], best_value};
  double a = xs[best == 0 ? 0 : best - 1];
  double b = xs[std::min(best + 1, xs.size() - 1)];
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - ratio * (b - a);
  double x2 = a + ratio * (b - a);
  double f1 = eval(x1);
  double f2 = eval(x2);
  while (b - a > tolerance) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = eval(x2);
    }
  }
  for (auto [x, v] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
    if (v < result.value) result = {x, v};
  }
  return result;
}

BaselineResult baseline_sweep(Family family, int n, const Constraints& c, Polarization pol, Layout layout,
                              const ScanOptions& options) {
  c.validate();
  const double lo = c.r_min;
  const double hi = c.r_min + options.spacing_span;

  auto gamma_of = [&](const EmitterConfiguration& cfg) -> std::optional<double> {
    if (!realizable(cfg, c, layout)) return std::nullopt;
    return min_decay(cfg, pol).gamma_min;
  };

  BaselineResult best;
  best.family = family;
  best.best_gamma = std::numeric_limits<double>::infinity();

  auto consider = [&](std::vector<double> params, const std::optional<ScalarMinimum>& m,
                      const std::function<EmitterConfiguration(double)>& make) {
    if (!m || !(m->value < best.best_gamma)) return;
    params.push_back(m->argument);
    best.params = std::move(params);
    best.best_gamma = m->value;
    best.configuration = make(m->argument);
  };

  switch (family) {
    case Family::Chain: {
      if (n < 2) throw std::invalid_argument("baseline_sweep: chain needs n >= 2");
      auto make = [n](double a) { return regular_chain(n, a); };
      consider({}, scan_minimize([&](double a) { return gamma_of(make(a)); }, lo, hi, options.step,
                                 options.refine_tolerance),
               make);
      break;
    }
    case Family::Triangle: {
      if (n < 3) throw std::invalid_argument("baseline_sweep: triangle needs n >= 3");
      auto make = [n](double a) { return triangular_fragment(n, a); };
      consider({}, scan_minimize([&](double a) { return gamma_of(make(a)); }, lo, hi, options.step,
                                 options.refine_tolerance),
               make);
      break;
    }
    case Family::Rectangle: {
      if (n < 2) throw std::invalid_argument("baseline_sweep: rectangle needs n >= 2");
      for (int rows = 1; rows * rows <= n; ++rows) {
        if (n % rows != 0) continue;
        const int cols = n / rows;
        auto make = [rows, cols](double a) { return rectangular_fragment(rows, cols, a); };
        consider({static_cast<double>(rows), static_cast<double>(cols)},
                 scan_minimize([&](double a) { return gamma_of(make(a)); }, lo, hi, options.step,
                               options.refine_tolerance),
                 make);
      }
      break;
    }
    case Family::Modulated: {
      if (n < 3) throw std::invalid_argument("baseline_sweep: modulated chain needs n >= 3");
      auto make = [&](double r_max) { return modulated_chain({n, c.r_min, r_max}); };
      consider({}, scan_minimize([&](double r) { return gamma_of(make(r)); }, lo, std::max(lo, 1.0),
                                 options.step, options.refine_tolerance),
               make);
      break;
    }
  }
  if (best.params.empty()) {
    throw std::runtime_error("baseline_sweep: no feasible " + std::string(to_string(family)) +
                             " parameter for n = " + std::to_string(n));
  }
  return best;
}

}  // namespace subopt
