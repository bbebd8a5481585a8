#include "subopt/de.hpp"

#include "subopt/log.hpp"
#include "subopt/zoo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <thread>

namespace subopt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPenaltyWeight = 10.0;
constexpr int kFeasibleResampleLimit = 1000;

bool is_angle_component(const Problem& problem, Eigen::Index k) {
  // Planar layout: phi_i sits at even positions from 2 on.
  return problem.layout == Layout::Planar && k >= 2 && k % 2 == 0;
}

double component_upper(const Problem& problem) {
  return problem.layout == Layout::Planar ? problem.constraints.confinement_radius
                                          : 2.0 * problem.constraints.confinement_radius;
}

// Upper edge of the sampling box for lengths.
double sampling_upper(const Problem& problem) {
  if (problem.layout == Layout::Planar) return problem.constraints.confinement_radius;
  return 2.0 * problem.constraints.confinement_radius / (problem.n - 1);
}

ParameterVector random_vector(const Problem& problem, Rng& rng) {
  const Eigen::Index dim = problem.dimension();
  std::uniform_real_distribution<double> length(problem.constraints.r_min,
                                                std::max(problem.constraints.r_min, sampling_upper(problem)));
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  ParameterVector v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) v(k) = is_angle_component(problem, k) ? angle(rng) : length(rng);
  return v;
}

std::size_t draw_other(std::uniform_int_distribution<std::size_t>& pick, Rng& rng,
                       std::initializer_list<std::size_t> excluded) {
  for (;;) {
    const std::size_t idx = pick(rng);
    if (std::find(excluded.begin(), excluded.end(), idx) == excluded.end()) return idx;
  }
}

}  // namespace

int planar_emitter_count(Eigen::Index dimension) {
  if (dimension < 1 || dimension % 2 == 0) {
    throw std::invalid_argument("parameter vector length must be 2N - 3 for some N >= 2");
  }
  return static_cast<int>((dimension + 3) / 2);
}

EmitterConfiguration decode(const ParameterVector& v) {
  const int n = planar_emitter_count(v.size());
  Positions p = Positions::Zero(n, 2);
  p(1, 0) = v(0);
  for (int i = 2; i < n; ++i) {
    const double rho = v(2 * i - 3);
    const double phi = v(2 * i - 2);
    p(i, 0) = rho * std::cos(phi);
    p(i, 1) = rho * std::sin(phi);
  }
  return EmitterConfiguration(std::move(p));
}

ParameterVector encode(const EmitterConfiguration& cfg) {
  const Eigen::Index n = cfg.size();
  if (n < 2) throw std::invalid_argument("encode: need at least two emitters");
  const Eigen::Vector2d origin = cfg.position(0);
  const Eigen::Vector2d axis = cfg.position(1) - origin;
  const double r2 = axis.norm();
  if (!(r2 >= kMinSeparation)) throw CoincidentEmitters(0, 1, r2);
  const double theta = std::atan2(axis.y(), axis.x());
  const Eigen::Rotation2Dd unrotate(-theta);

  ParameterVector v(planar_dimension(static_cast<int>(n)));
  v(0) = r2;
  for (Eigen::Index i = 2; i < n; ++i) {
    const Eigen::Vector2d q = unrotate * (cfg.position(i) - origin);
    double phi = std::atan2(q.y(), q.x());
    if (phi < 0.0) phi += kTwoPi;
    if (phi >= kTwoPi) phi -= kTwoPi;
    v(2 * i - 3) = q.norm();
    v(2 * i - 2) = phi;
  }
  return v;
}

Feasibility feasibility(const ParameterVector& v, const Constraints& c) {
  const EmitterConfiguration cfg = decode(v);
  const double violation =
      spacing_violation(cfg, c.r_min) + confinement_violation(cfg, Eigen::Vector2d::Zero(), c.confinement_radius);
  return {violation == 0.0, violation};
}

double objective(const ParameterVector& v, const Constraints& c, Polarization pol) {
  const Feasibility f = feasibility(v, c);
  if (!f.feasible) return planar_emitter_count(v.size()) + kPenaltyWeight * f.violation;
  return min_decay(decode(v), pol).gamma_min;
}

Eigen::Index Problem::dimension() const {
  return layout == Layout::Planar ? planar_dimension(n) : static_cast<Eigen::Index>(n - 1);
}

EmitterConfiguration Problem::decode(const ParameterVector& v) const {
  return layout == Layout::Planar ? subopt::decode(v) : decode_1d(v);
}

Feasibility Problem::feasibility(const ParameterVector& v) const {
  if (layout == Layout::Planar) return subopt::feasibility(v, constraints);
  const EmitterConfiguration cfg = decode_1d(v);
  const Eigen::Vector2d center(0.5 * cfg.positions()(cfg.size() - 1, 0), 0.0);
  const double violation = spacing_violation(cfg, constraints.r_min) +
                           confinement_violation(cfg, center, constraints.confinement_radius);
  return {violation == 0.0, violation};
}

double Problem::objective(const ParameterVector& v) const {
  const Feasibility f = feasibility(v);
  if (!f.feasible) return n + kPenaltyWeight * f.violation;
  return min_decay(decode(v), polarization).gamma_min;
}

void Problem::validate() const {
  if (n < 2) throw std::invalid_argument("problem: N must be >= 2");
  constraints.validate();
}

std::string_view to_string(CrossoverBase base) { return base == CrossoverBase::Candidate ? "candidate" : "best"; }

CrossoverBase parse_crossover_base(std::string_view name) {
  if (name == "candidate") return CrossoverBase::Candidate;
  if (name == "best") return CrossoverBase::Best;
  throw std::invalid_argument("crossover_base must be 'candidate' or 'best'");
}

int DeSettings::resolved_population(Eigen::Index dimension) const {
  if (population_size > 0) return population_size;
  return std::max(static_cast<int>(4 * dimension), 60);
}

void DeSettings::validate() const {
  if (population_size != 0 && population_size < 4) throw std::invalid_argument("settings: population_size must be >= 4");
  if (!(f_min > 0.0) || f_max < f_min) throw std::invalid_argument("settings: f_range must satisfy 0 < f_min <= f_max");
  if (!(crossover_rate > 0.0 && crossover_rate <= 1.0)) throw std::invalid_argument("settings: crossover_rate must lie in (0, 1]");
  if (max_generations < 1) throw std::invalid_argument("settings: max_generations must be >= 1");
  if (!(stop_rel_dispersion >= 0.0)) throw std::invalid_argument("settings: stop_rel_dispersion must be >= 0");
  if (restarts < 1) throw std::invalid_argument("settings: restarts must be >= 1");
  if (jobs < 1) throw std::invalid_argument("settings: jobs must be >= 1");
}

double Population::mean_score() const {
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

double Population::dispersion() const {
  const double mean = mean_score();
  double acc = 0.0;
  for (double s : scores) acc += (s - mean) * (s - mean);
  return std::sqrt(acc / static_cast<double>(scores.size()));
}

void repair(ParameterVector& v, const Problem& problem) {
  const double upper = component_upper(problem);
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (is_angle_component(problem, k)) {
      double phi = std::fmod(v(k), kTwoPi);
      if (phi < 0.0) phi += kTwoPi;
      if (phi >= kTwoPi) phi = 0.0;
      v(k) = phi;
    } else {
      v(k) = std::clamp(v(k), 0.0, upper);
    }
  }
}

Population de_generation(const Population& pop, const Problem& problem, const DeSettings& settings, Rng& rng,
                         GenerationStats* stats) {
  const std::size_t size = pop.size();
  if (size < 4) throw std::invalid_argument("de_generation: population must hold at least 4 vectors");
  const Eigen::Index dim = pop.members.front().size();

  std::uniform_real_distribution<double> f_dist(settings.f_min, settings.f_max);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, size - 1);
  std::uniform_int_distribution<Eigen::Index> forced(0, dim - 1);

  const double weight = f_dist(rng);
  Population next = pop;
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t j = draw_other(pick, rng, {i, next.best});
    const std::size_t k = draw_other(pick, rng, {i, next.best, j});
    const ParameterVector mutant = next.members[next.best] + weight * (pop.members[j] - pop.members[k]);

    const ParameterVector& base =
        settings.crossover_base == CrossoverBase::Candidate ? next.members[i] : next.members[next.best];
    ParameterVector trial = base;
    const Eigen::Index always = forced(rng);
    for (Eigen::Index c = 0; c < dim; ++c) {
      if (unit(rng) < settings.crossover_rate || c == always) trial(c) = mutant(c);
    }
    repair(trial, problem);

    const double score = problem.objective(trial);
    if (stats) ++stats->evaluations;
    if (score <= next.scores[i]) {
      next.members[i] = std::move(trial);
      next.scores[i] = score;
      if (score < next.scores[next.best]) next.best = i;
    }
  }
  return next;
}

Population initial_population(const Problem& problem, const DeSettings& settings, Rng& rng,
                              const std::vector<ParameterVector>& warm_start) {
  const Eigen::Index dim = problem.dimension();
  const auto size = static_cast<std::size_t>(settings.resolved_population(dim));
  Population pop;
  pop.members.reserve(size);
  for (const ParameterVector& v : warm_start) {
    if (pop.members.size() == size) break;
    if (v.size() != dim) throw std::invalid_argument("warm start vector has the wrong length");
    ParameterVector candidate = v;
    repair(candidate, problem);
    if (problem.feasibility(candidate).feasible) pop.members.push_back(std::move(candidate));
  }
  while (pop.members.size() < size) {
    ParameterVector v = random_vector(problem, rng);
    for (int attempt = 1; attempt < kFeasibleResampleLimit && !problem.feasibility(v).feasible; ++attempt) {
      v = random_vector(problem, rng);
    }
    pop.members.push_back(std::move(v));
  }
  pop.scores.reserve(size);
  for (const ParameterVector& v : pop.members) pop.scores.push_back(problem.objective(v));
  pop.best = static_cast<std::size_t>(std::min_element(pop.scores.begin(), pop.scores.end()) - pop.scores.begin());
  return pop;
}

DeRun run_de_single(const Problem& problem, const DeSettings& settings, std::uint64_t seed,
                    const std::vector<ParameterVector>& warm_start) {
  problem.validate();
  settings.validate();
  Rng rng(seed);
  Population pop = initial_population(problem, settings, rng, warm_start);

  DeRun run;
  run.seed_used = seed;
  run.seeds = {seed};
  run.objective_evaluations = static_cast<long>(pop.size());
  run.convergence_trace.push_back({0, pop.scores[pop.best], pop.dispersion()});

  GenerationStats stats;
  int generation = 0;
  while (generation < settings.max_generations) {
    ++generation;
    pop = de_generation(pop, problem, settings, rng, &stats);
    const double dispersion = pop.dispersion();
    run.convergence_trace.push_back({generation, pop.scores[pop.best], dispersion});
    if (dispersion <= settings.stop_rel_dispersion * pop.mean_score()) break;
  }
  run.objective_evaluations += stats.evaluations;
  run.generations_used = generation;
  run.best_vector = pop.members[pop.best];
  run.best_gamma = pop.scores[pop.best];
  log::debug("restart seed ", seed, ": gamma ", run.best_gamma, " after ", generation, " generations");
  return run;
}

DeRun run_de(const Problem& problem, const DeSettings& settings, const std::vector<ParameterVector>& warm_start) {
  problem.validate();
  settings.validate();
  const auto restarts = static_cast<std::size_t>(settings.restarts);
  std::vector<DeRun> runs(restarts);
  std::vector<std::exception_ptr> errors(restarts);

  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (std::size_t r = cursor++; r < restarts; r = cursor++) {
      try {
        // Only the first restart is seeded, so the rest explore freely.
        runs[r] = run_de_single(problem, settings, settings.seed + r,
                                r == 0 ? warm_start : std::vector<ParameterVector>{});
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  const auto workers = std::min<std::size_t>(restarts, static_cast<std::size_t>(settings.jobs));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::optional<std::size_t> winner;
  long evaluations = 0;
  std::vector<std::uint64_t> seeds;
  for (std::size_t r = 0; r < restarts; ++r) {
    evaluations += runs[r].objective_evaluations;
    seeds.push_back(runs[r].seed_used);
    if (!problem.feasibility(runs[r].best_vector).feasible) continue;
    if (!winner || runs[r].best_gamma < runs[*winner].best_gamma) winner = r;
  }
  if (!winner) {
    throw InfeasibleProblem("infeasible problem: no restart found a configuration with spacing >= r_min inside the "
                            "confinement radius");
  }
  DeRun best = std::move(runs[*winner]);
  best.objective_evaluations = evaluations;
  best.seeds = std::move(seeds);
  return best;
}

}  // namespace subopt
