#include "subopt/physics.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <sstream>

namespace subopt {

namespace {

std::string coincident_message(std::size_t first, std::size_t second, double distance) {
  std::ostringstream os;
  os << "coincident emitters " << first << " and " << second << " (distance " << distance << ")";
  return os.str();
}

std::string hash_message(std::uint64_t hash) {
  std::ostringstream os;
  os << "complex eigensolver did not converge (matrix hash 0x" << std::hex << hash << ")";
  return os.str();
}

double wrap_phase(double phase) {
  // (-pi, pi]
  phase = std::remainder(phase, 2.0 * std::numbers::pi);
  if (phase <= -std::numbers::pi) phase += 2.0 * std::numbers::pi;
  return phase;
}

}  // namespace

std::string_view to_string(Polarization pol) {
  switch (pol) {
    case Polarization::SigmaZ: return "sigma_z";
    case Polarization::SigmaPlus: return "sigma_plus";
    case Polarization::SigmaMinus: return "sigma_minus";
  }
  return "unknown";
}

Polarization parse_polarization(std::string_view name) {
  if (name == "sigma_z" || name == "z") return Polarization::SigmaZ;
  if (name == "sigma_plus" || name == "+") return Polarization::SigmaPlus;
  if (name == "sigma_minus" || name == "-") return Polarization::SigmaMinus;
  throw std::invalid_argument("unknown polarization '" + std::string(name) +
                              "' (expected sigma_z, sigma_plus or sigma_minus)");
}

CoincidentEmitters::CoincidentEmitters(std::size_t first_, std::size_t second_, double distance)
    : std::domain_error(coincident_message(first_, second_, distance)),
      first(first_),
      second(second_) {}

EigensolverFailure::EigensolverFailure(std::uint64_t hash)
    : std::runtime_error(hash_message(hash)), matrix_hash(hash) {}

EmitterConfiguration::EmitterConfiguration(std::initializer_list<std::pair<double, double>> points)
    : positions_(static_cast<Eigen::Index>(points.size()), 2) {
  Eigen::Index i = 0;
  for (const auto& [x, y] : points) {
    positions_(i, 0) = x;
    positions_(i, 1) = y;
    ++i;
  }
}

double EmitterConfiguration::min_distance() const {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < size(); ++i)
    for (Eigen::Index j = i + 1; j < size(); ++j) best = std::min(best, distance(i, j));
  return best;
}

void EmitterConfiguration::require_distinct() const {
  for (Eigen::Index i = 0; i < size(); ++i)
    for (Eigen::Index j = i + 1; j < size(); ++j) {
      const double d = distance(i, j);
      if (!(d >= kMinSeparation)) {
        throw CoincidentEmitters(static_cast<std::size_t>(i), static_cast<std::size_t>(j), d);
      }
    }
}

EffectiveHamiltonian build_hamiltonian(const EmitterConfiguration& cfg, Polarization pol) {
  if (cfg.size() < 1) throw std::invalid_argument("build_hamiltonian: empty configuration");
  cfg.require_distinct();
  const Eigen::Index n = cfg.size();
  EffectiveHamiltonian h{Eigen::MatrixXcd(n, n), pol};
  for (Eigen::Index i = 0; i < n; ++i) {
    h.matrix(i, i) = Complex(0.0, -0.5);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Complex g = green_coupling(kWavenumber * cfg.distance(i, j), pol);
      h.matrix(i, j) = g;
      h.matrix(j, i) = g;
    }
  }
  return h;
}

double CollectiveModeSet::total_decay() const {
  return std::accumulate(modes.begin(), modes.end(), 0.0,
                         [](double acc, const CollectiveMode& m) { return acc + m.decay; });
}

CollectiveModeSet collective_modes(const EffectiveHamiltonian& hamiltonian) {
  const Eigen::MatrixXcd& h = hamiltonian.matrix;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(h, true);
  if (solver.info() != Eigen::Success) throw EigensolverFailure(matrix_hash(h));

  const Eigen::Index n = h.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto& values = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double da = -2.0 * values(a).imag();
    const double db = -2.0 * values(b).imag();
    if (da != db) return da < db;
    return values(a).real() < values(b).real();
  });

  CollectiveModeSet set;
  set.modes.reserve(order.size());
  for (Eigen::Index k : order) {
    CollectiveMode mode;
    mode.shift = values(k).real();
    mode.decay = -2.0 * values(k).imag();
    mode.wavefunction = solver.eigenvectors().col(k).normalized();
    set.modes.push_back(std::move(mode));
  }
  return set;
}

MinDecay min_decay(const EmitterConfiguration& cfg, Polarization pol) {
  const EffectiveHamiltonian h = build_hamiltonian(cfg, pol);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(h.matrix, false);
  if (solver.info() != Eigen::Success) throw EigensolverFailure(matrix_hash(h.matrix));
  const auto& values = solver.eigenvalues();
  MinDecay best{-2.0 * values(0).imag(), 0};
  for (Eigen::Index k = 1; k < values.size(); ++k) {
    const double decay = -2.0 * values(k).imag();
    if (decay < best.gamma_min ||
        (decay == best.gamma_min && values(k).real() < values(best.mode_index).real())) {
      best = {decay, k};
    }
  }
  return best;
}

std::vector<AtomAmplitude> atom_amplitudes(const Eigen::VectorXcd& wavefunction) {
  const Eigen::Index n = wavefunction.size();
  std::vector<AtomAmplitude> atoms(static_cast<std::size_t>(n));
  if (n == 0) return atoms;

  const double largest = wavefunction.cwiseAbs().maxCoeff();
  Eigen::Index anchor = 0;
  while (std::abs(wavefunction(anchor)) < largest - 1e-12) ++anchor;
  const Complex gauge = std::conj(wavefunction(anchor)) / std::abs(wavefunction(anchor));

  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex psi = wavefunction(i) * gauge;
    atoms[static_cast<std::size_t>(i)] = {std::norm(psi), i == anchor ? 0.0 : wrap_phase(std::arg(psi))};
  }
  return atoms;
}

std::vector<ModeRow> mode_report(const CollectiveModeSet& modes, const EmitterConfiguration& cfg) {
  std::vector<ModeRow> rows;
  rows.reserve(modes.modes.size());
  for (std::size_t k = 0; k < modes.modes.size(); ++k) {
    const CollectiveMode& mode = modes.modes[k];
    if (mode.wavefunction.size() != cfg.size()) {
      throw std::invalid_argument("mode_report: mode set and configuration disagree on emitter count");
    }
    rows.push_back({static_cast<Eigen::Index>(k), mode.shift, mode.decay, atom_amplitudes(mode.wavefunction)});
  }
  if (modes.modes.empty() && cfg.size() != 0) {
    throw std::invalid_argument("mode_report: mode set and configuration disagree on emitter count");
  }
  return rows;
}

double max_phase_spread(const std::vector<AtomAmplitude>& atoms) {
  double spread = 0.0;
  for (std::size_t i = 0; i < atoms.size(); ++i)
    for (std::size_t j = i + 1; j < atoms.size(); ++j)
      spread = std::max(spread, std::abs(wrap_phase(atoms[i].phase - atoms[j].phase)));
  return spread;
}

std::uint64_t matrix_hash(const Eigen::MatrixXcd& matrix) {
  std::uint64_t hash = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(matrix.data());
  const std::size_t count = static_cast<std::size_t>(matrix.size()) * sizeof(Complex);
  for (std::size_t i = 0; i < count; ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ULL;
  }
  return hash;
}

}  // namespace subopt
