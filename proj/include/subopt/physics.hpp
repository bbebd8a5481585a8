#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace subopt {

using Complex = std::complex<double>;

// Natural units: lambda0 = 1, Gamma0 = 1, omega0 subtracted from the diagonal.
inline constexpr double kWavenumber = 2.0 * std::numbers::pi;

// Separations below this are treated as coincident emitters.
inline constexpr double kMinSeparation = 1e-9;

enum class Polarization { SigmaZ, SigmaPlus, SigmaMinus };

std::string_view to_string(Polarization pol);
Polarization parse_polarization(std::string_view name);

/// Raised when two emitters sit closer than kMinSeparation.
class CoincidentEmitters : public std::domain_error {
 public:
  CoincidentEmitters(std::size_t first, std::size_t second, double distance);
  std::size_t first;
  std::size_t second;
};

class EigensolverFailure : public std::runtime_error {
 public:
  explicit EigensolverFailure(std::uint64_t matrix_hash);
  std::uint64_t matrix_hash;
};

/// Emitter positions in the z = 0 plane, one row per emitter, in units of lambda0.
using Positions = Eigen::Matrix<double, Eigen::Dynamic, 2>;

class EmitterConfiguration {
 public:
  EmitterConfiguration() = default;
  explicit EmitterConfiguration(Positions positions) : positions_(std::move(positions)) {}
  EmitterConfiguration(std::initializer_list<std::pair<double, double>> points);

  Eigen::Index size() const { return positions_.rows(); }
  const Positions& positions() const { return positions_; }
  Eigen::Vector2d position(Eigen::Index i) const { return positions_.row(i).transpose(); }
  double distance(Eigen::Index i, Eigen::Index j) const {
    return (positions_.row(i) - positions_.row(j)).norm();
  }

  /// Smallest pairwise distance; +inf for fewer than two emitters.
  double min_distance() const;

  /// Throws CoincidentEmitters for the first pair closer than kMinSeparation.
  void require_distinct() const;

 private:
  Positions positions_;
};

/// Scalar dipole-dipole coupling for an in-plane pair at dimensionless separation x = k0 r.
/// Templated so that the same closed form can be evaluated in extended precision.
template <typename Scalar>
std::complex<Scalar> green_coupling(Scalar x, Polarization pol) {
  if (!(x > Scalar(0))) {
    throw std::domain_error("green_coupling: separation must be positive (coincident emitters)");
  }
  using C = std::complex<Scalar>;
  const Scalar inv = Scalar(1) / x;
  const Scalar inv2 = inv * inv;
  const Scalar inv3 = inv2 * inv;
  // Dipole perpendicular to the separation.
  C coupling(inv - inv3, inv2);
  if (pol != Polarization::SigmaZ) {
    // Circular in-plane dipole: average of transverse and longitudinal parts.
    const C longitudinal(inv - Scalar(3) * inv3, Scalar(3) * inv2);
    coupling -= longitudinal / Scalar(2);
  }
  return Scalar(-0.75) * std::polar(Scalar(1), x) * coupling;
}

struct EffectiveHamiltonian {
  Eigen::MatrixXcd matrix;
  Polarization polarization = Polarization::SigmaZ;
};

EffectiveHamiltonian build_hamiltonian(const EmitterConfiguration& cfg, Polarization pol);

struct CollectiveMode {
  double shift = 0.0;  // units of Gamma0
  double decay = 0.0;  // units of Gamma0
  Eigen::VectorXcd wavefunction;
};

/// Modes sorted ascending by decay, ties by shift, then by solver order.
struct CollectiveModeSet {
  std::vector<CollectiveMode> modes;
  double total_decay() const;
};

CollectiveModeSet collective_modes(const EffectiveHamiltonian& hamiltonian);

struct MinDecay {
  double gamma_min = 0.0;
  // Index among the eigenvalues in solver order.
  Eigen::Index mode_index = 0;
};

/// The optimization objective; eigenvalues only.
MinDecay min_decay(const EmitterConfiguration& cfg, Polarization pol);

struct AtomAmplitude {
  double probability = 0.0;  // |psi_i|^2
  double phase = 0.0;        // Arg psi_i in (-pi, pi]
};

struct ModeRow {
  Eigen::Index mode = 0;
  double shift = 0.0;
  double decay = 0.0;
  std::vector<AtomAmplitude> atoms;
};

/// Per-atom weights and phases, global phase fixed so the largest component is real positive.
std::vector<ModeRow> mode_report(const CollectiveModeSet& modes, const EmitterConfiguration& cfg);
std::vector<AtomAmplitude> atom_amplitudes(const Eigen::VectorXcd& wavefunction);

/// Largest |Arg psi_i - Arg psi_j| over pairs, wrapped to [0, pi].
double max_phase_spread(const std::vector<AtomAmplitude>& atoms);

/// FNV-1a over the raw matrix bytes; stable across runs for reproduction reports.
std::uint64_t matrix_hash(const Eigen::MatrixXcd& matrix);

}  // namespace subopt
