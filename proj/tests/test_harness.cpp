#include "subopt/harness.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace subopt;
using subopt::testing::pair_decay_shift;

namespace {

DeSettings quick_settings() {
  DeSettings s;
  s.restarts = 1;
  s.max_generations = 60;
  return s;
}

}  // namespace

TEST_CASE("classify_geometry") {
  CHECK(classify_geometry(regular_chain(6, 0.3)) == GeometryClass::LinearRegular);
  CHECK(classify_geometry(triangular_fragment(6, 0.6)) == GeometryClass::Triangular);
  CHECK(classify_geometry(rectangular_fragment(2, 3, 1.0)) == GeometryClass::Square);
  CHECK(classify_geometry(modulated_chain({14, 0.2, 0.35})) == GeometryClass::LinearStretched);
  CHECK(classify_geometry(EmitterConfiguration{{0.0, 0.0}, {0.5, 0.1}, {0.2, 0.9}, {1.3, 0.4}}) ==
        GeometryClass::Other);

  SUBCASE("small transverse noise keeps a chain linear") {
    Positions p = regular_chain(6, 0.3).positions();
    p(2, 1) = 0.01;
    CHECK(classify_geometry(EmitterConfiguration(p)) != GeometryClass::Other);
    p(2, 1) = 0.2;
    CHECK(classify_geometry(EmitterConfiguration(p)) == GeometryClass::Other);
  }
  SUBCASE("rotated chain") {
    Positions p = regular_chain(5, 0.4).positions();
    p.col(1) = p.col(0) * 0.5;
    p.col(0) *= std::sqrt(0.75);
    CHECK(classify_geometry(EmitterConfiguration(p)) == GeometryClass::LinearRegular);
  }
  SUBCASE("projected gaps of a chain") {
    for (double g : projected_gaps(regular_chain(5, 0.4))) CHECK(g == doctest::Approx(0.4));
  }
  SUBCASE("bonds of a square") {
    CHECK(nearest_neighbour_bonds(rectangular_fragment(2, 2, 1.0)).size() == 4);
  }
  CHECK(to_string(GeometryClass::LinearStretched) == "linear_stretched");
}

TEST_CASE("scaling fits recover planted models") {
  std::vector<double> ns, power, expo;
  for (int n = 10; n <= 26; n += 2) {
    ns.push_back(n);
    power.push_back(7.0 * std::pow(n, -3.0));
    expo.push_back(std::exp(-0.5 * n));
  }
  const ScalingComparison p = compare_scaling(ns, power);
  CHECK(p.preferred().model == ScalingModel::PowerLaw);
  CHECK(p.power_law.exponent == doctest::Approx(-3.0).epsilon(1e-3));
  CHECK(p.power_law.amplitude == doctest::Approx(7.0).epsilon(1e-9));
  CHECK(p.power_law.r_squared > 0.999);

  const ScalingComparison e = compare_scaling(ns, expo);
  CHECK(e.preferred().model == ScalingModel::Exponential);
  CHECK(std::abs(e.exponential.exponent + 0.5) < 0.01);

  CHECK_THROWS(fit_scaling({1.0}, {1.0}, ScalingModel::PowerLaw));
  CHECK_THROWS(fit_scaling({1.0, 2.0}, {1.0, -1.0}, ScalingModel::Exponential));
}

TEST_CASE("rmin_sweep emits optimizer and baseline records") {
  const auto records = rmin_sweep(6, Polarization::SigmaZ, {0.3, 0.6, 1.0}, quick_settings());
  REQUIRE(records.size() == 12);
  const auto optimized = std::count_if(records.begin(), records.end(), [](const auto& r) { return r.mode == "free2d"; });
  CHECK(optimized == 3);
  for (const auto& r : records) {
    CHECK(r.ok());
    CHECK(r.n == 6);
    CHECK(r.geometry_class.has_value());
    CHECK(r.configuration.size() == 6);
    CHECK(r.runtime_s == 0.0);
    CHECK(r.configuration.min_distance() >= r.r_min - 1e-9);
  }
  // Records come out in grid order.
  CHECK(records.front().r_min == 0.3);
  CHECK(records.back().r_min == 1.0);
}

TEST_CASE("restricted_1d_run and compare_1d") {
  const auto record = restricted_1d_run(8, 0.3, Polarization::SigmaZ, quick_settings());
  REQUIRE(record.ok());
  CHECK(record.mode == "restricted1d");
  CHECK(record.params.size() == 7);
  for (double g : record.params) CHECK(g >= 0.3 - 1e-12);

  const auto cmp = compare_1d(8, {0.3, 0.4}, quick_settings());
  REQUIRE(cmp.rows.size() == 2);
  CHECK(cmp.records.size() == 6);
  CHECK(cmp.rows[0].r_min == 0.3);
  for (const auto& row : cmp.rows) {
    CHECK(row.optimized > 0.0);
    CHECK(row.periodic >= row.modulated - 1e-12);
    CHECK(row.optimized_gaps.size() == 7);
  }
}

TEST_CASE("scaling_study") {
  CHECK_THROWS(scaling_study({10, 12, 14}, 0.3, Polarization::SigmaZ, {ScalingFamily::Periodic}, quick_settings()));
  const auto study =
      scaling_study({6, 8, 10, 12}, 0.3, Polarization::SigmaZ, {ScalingFamily::Periodic}, quick_settings());
  CHECK(study.records.size() == 4);
  REQUIRE(study.fits.contains(ScalingFamily::Periodic));
  CHECK(study.fits.at(ScalingFamily::Periodic).power_law.exponent < -2.0);
  CHECK(parse_scaling_family("restricted1d") == ScalingFamily::Restricted1d);
}

TEST_CASE("three_emitter_decays matches the eigensolver") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cfg = subopt::testing::random_configuration(rng, 3, 1.0, 0.05);
    const auto pol = trial % 2 ? Polarization::SigmaPlus : Polarization::SigmaZ;
    const auto h = build_hamiltonian(cfg, pol).matrix;
    auto closed = three_emitter_decays(h(0, 1), h(0, 2), h(1, 2));
    std::sort(closed.begin(), closed.end());
    const auto modes = collective_modes(build_hamiltonian(cfg, pol));
    for (int k = 0; k < 3; ++k) CHECK(std::abs(closed[k] - modes.modes[k].decay) < 1e-9);
  }
}

TEST_CASE("grid_oracle") {
  SUBCASE("pair on a fine grid") {
    OracleSpec spec;
    spec.n = 2;
    spec.constraints = {0.1, 5.0};
    spec.length_step = 0.001;
    spec.length_max = 3.0;
    const auto r = grid_oracle(spec);
    REQUIRE(r.feasible);
    double best = 10.0;
    for (int k = 0; 0.1 + k * 0.001 <= 3.0 + 1e-12; ++k) best = std::min(best, 1.0 - pair_decay_shift(0.1 + k * 0.001));
    CHECK(r.gamma == doctest::Approx(best).epsilon(1e-12));
  }
  SUBCASE("three atoms on a coarse grid are bounded by the DE optimum") {
    OracleSpec spec;
    spec.n = 3;
    spec.constraints = {0.5, 5.0};
    spec.length_step = 0.05;
    spec.angle_step = 0.05;
    spec.length_max = 2.0;
    const auto r = grid_oracle(spec);
    REQUIRE(r.feasible);
    CHECK(r.configuration.min_distance() >= 0.5 - 1e-12);
    CHECK(r.gamma == doctest::Approx(min_decay(r.configuration, Polarization::SigmaZ).gamma_min).epsilon(1e-9));
    DeSettings s;
    s.restarts = 2;
    const auto run = run_de(Problem{3, {0.5, 5.0}, Polarization::SigmaZ, Layout::Planar}, s);
    CHECK(run.best_gamma <= r.gamma + 1e-4);
  }
  SUBCASE("empty grid is infeasible") {
    OracleSpec spec;
    spec.n = 3;
    spec.constraints = {6.0, 5.0};
    CHECK_FALSE(grid_oracle(spec).feasible);
  }
  SUBCASE("more than three emitters is refused") {
    OracleSpec spec;
    spec.n = 4;
    CHECK_THROWS(grid_oracle(spec));
  }
}
