#pragma once

#include "subopt/constraints.hpp"
#include "subopt/physics.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace subopt {

/// Planar layout: [r_2, rho_3, phi_3, ..., rho_N, phi_N] with atom 1 at the origin and atom 2
/// at (r_2, 0); length 2N - 3. Collinear layout: the N - 1 gaps along the x-axis.
using ParameterVector = Eigen::VectorXd;

inline Eigen::Index planar_dimension(int n) { return 2 * n - 3; }
int planar_emitter_count(Eigen::Index dimension);

EmitterConfiguration decode(const ParameterVector& v);

/// Translates atom 1 to the origin and rotates atom 2 onto the positive x-axis.
ParameterVector encode(const EmitterConfiguration& cfg);

struct Feasibility {
  bool feasible = true;
  double violation = 0.0;
};

/// Spacing violation plus distance of each atom beyond the confinement radius from atom 1.
Feasibility feasibility(const ParameterVector& v, const Constraints& c);

/// min_decay of the decoded configuration when feasible, N + 10 * violation otherwise.
double objective(const ParameterVector& v, const Constraints& c, Polarization pol);

struct Problem {
  int n = 2;
  Constraints constraints;
  Polarization polarization = Polarization::SigmaZ;
  Layout layout = Layout::Planar;

  Eigen::Index dimension() const;
  EmitterConfiguration decode(const ParameterVector& v) const;
  Feasibility feasibility(const ParameterVector& v) const;
  double objective(const ParameterVector& v) const;
  void validate() const;
};

enum class CrossoverBase { Candidate, Best };

std::string_view to_string(CrossoverBase base);
CrossoverBase parse_crossover_base(std::string_view name);

struct DeSettings {
  // 0 selects max(4 * dimension, 60).
  int population_size = 0;
  double f_min = 0.5;
  double f_max = 1.0;
  double crossover_rate = 0.7;
  int max_generations = 3000;
  double stop_rel_dispersion = 1e-5;
  int restarts = 8;
  std::uint64_t seed = 0;
  CrossoverBase crossover_base = CrossoverBase::Candidate;
  // Worker threads for independent restarts; results do not depend on it.
  int jobs = 1;

  int resolved_population(Eigen::Index dimension) const;
  void validate() const;
};

using Rng = std::mt19937_64;

struct Population {
  std::vector<ParameterVector> members;
  std::vector<double> scores;
  std::size_t best = 0;

  std::size_t size() const { return members.size(); }
  /// Population standard deviation of the scores.
  double dispersion() const;
  double mean_score() const;
};

/// Objective evaluations performed by one generation step.
struct GenerationStats {
  long evaluations = 0;
};

/// One DE/best/1/bin generation with immediate best update; population size is preserved.
Population de_generation(const Population& pop, const Problem& problem, const DeSettings& settings, Rng& rng,
                         GenerationStats* stats = nullptr);

/// Wraps angles into [0, 2 pi) and clamps radial components or gaps into the search box.
void repair(ParameterVector& v, const Problem& problem);

struct TracePoint {
  int generation = 0;
  double best_gamma = 0.0;
  double dispersion = 0.0;
};

struct DeRun {
  ParameterVector best_vector;
  double best_gamma = 0.0;
  int generations_used = 0;
  // Summed over all restarts.
  long objective_evaluations = 0;
  std::vector<TracePoint> convergence_trace;
  std::uint64_t seed_used = 0;
  std::vector<std::uint64_t> seeds;
};

class InfeasibleProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Random population inside the search box, each member resampled up to 1000 times until feasible.
/// Feasible warm-start vectors replace the leading members.
Population initial_population(const Problem& problem, const DeSettings& settings, Rng& rng,
                              const std::vector<ParameterVector>& warm_start = {});

/// A single seeded search; returns the trace of that restart.
DeRun run_de_single(const Problem& problem, const DeSettings& settings, std::uint64_t seed,
                    const std::vector<ParameterVector>& warm_start = {});

/// Best feasible result over settings.restarts searches seeded seed, seed + 1, ...
/// The warm start enters the first restart only.
DeRun run_de(const Problem& problem, const DeSettings& settings, const std::vector<ParameterVector>& warm_start = {});

}  // namespace subopt
