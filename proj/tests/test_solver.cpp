#include <doctest.h>

#include <cmath>

#include "hjsafe/levelset.hpp"
#include "hjsafe/solver.hpp"
#include "oracles.hpp"

using namespace hjsafe;

namespace {

// drift-only test model: xdot_i = speed_i, no inputs
class ConstantAdvection final : public DynamicsModel {
 public:
  explicit ConstantAdvection(std::vector<double> speed) : speed_(std::move(speed)) {}
  std::size_t state_dim() const override { return speed_.size(); }
  std::size_t control_dim() const override { return 0; }
  std::size_t disturbance_dim() const override { return 0; }
  std::string name() const override { return "advection"; }
  std::vector<Interval> control_bounds() const override { return {}; }
  void affine(std::span<const double>, AffineFlow& out) const override {
    out.reset(speed_.size(), 0, 0);
    for (std::size_t i = 0; i < speed_.size(); ++i) out.drift[i] = speed_[i];
  }

 private:
  std::vector<double> speed_;
};

// Altitude band constraint 0.35 <= p <= 2.8; velocity unconstrained, the
// stopping curves close the safe set inside the grid.
struct QuadSetup {
  Grid grid;
  ScalarField constraint;
  Quad2DVert model;
  IntervalField dbounds;

  explicit QuadSetup(std::size_t n, double dbar = 0.3)
      : grid({{0.0, 3.2, n}, {-5.0, 5.0, n}}),
        constraint(signed_distance_band(grid, 0, 0.35, 2.8)),
        model(),
        dbounds(IntervalField::constant(grid, std::vector<Interval>{{-dbar, dbar}})) {}
};

}  // namespace

TEST_CASE("cfl_dt formula") {
  SUBCASE("1d") {
    // alpha = 10.1 everywhere, dx = 0.05
    ConstantAdvection m({10.1});
    Grid g({{0.0, 1.0, 21}});
    auto db = IntervalField::constant(g, std::vector<Interval>{});
    const double dt = cfl_dt(g, m, db, 0.8);
    CHECK(dt == doctest::Approx(0.8 / (10.1 / 0.05)).epsilon(1e-12));
  }
  SUBCASE("2d sum rule") {
    ConstantAdvection m({2.0, 10.1});
    Grid g({{0.0, 1.0, 21}, {0.0, 1.4, 21}});  // dx = 0.05, 0.07
    auto db = IntervalField::constant(g, std::vector<Interval>{});
    const double dt = cfl_dt(g, m, db, 0.8);
    CHECK(dt == doctest::Approx(0.8 / (2.0 / 0.05 + 10.1 / 0.07)).epsilon(1e-12));
  }
  SUBCASE("doubling resolution halves dt") {
    ConstantAdvection m({1.0});
    auto db21 = IntervalField::constant(Grid({{0.0, 1.0, 21}}), std::vector<Interval>{});
    auto db41 = IntervalField::constant(Grid({{0.0, 1.0, 41}}), std::vector<Interval>{});
    const double dt1 = cfl_dt(Grid({{0.0, 1.0, 21}}), m, db21, 0.8);
    const double dt2 = cfl_dt(Grid({{0.0, 1.0, 41}}), m, db41, 0.8);
    CHECK(dt2 == doctest::Approx(dt1 / 2).epsilon(1e-12));
  }
  SUBCASE("zero flow is degenerate") {
    ConstantAdvection m({0.0});
    Grid g({{0.0, 1.0, 11}});
    auto db = IntervalField::constant(g, std::vector<Interval>{});
    CHECK_THROWS(cfl_dt(g, m, db, 0.8));
  }
}

TEST_CASE("vi_step") {
  ConstantAdvection m({1.0});
  Grid g({{0.0, 1.0, 11}});
  auto db = IntervalField::constant(g, std::vector<Interval>{});
  const double dt = cfl_dt(g, m, db, 0.8);

  SUBCASE("pure advection of a linear profile: V grows by dt * H uniformly") {
    auto v = oracles::sample_field(g, [](const std::vector<double>& x) { return x[0]; });
    ScalarField c(g, -100.0);  // clamp never active
    SolveConfig lf;
    lf.scheme = SolveConfig::Scheme::kLaxFriedrichs;
    auto next = vi_step(v, c, m, db, dt, lf);
    // linear profile: no dissipation, exact transport everywhere
    for (std::size_t i = 0; i < g.size(); ++i)
      CHECK(next[i] == doctest::Approx(v[i] + dt * 1.0).epsilon(1e-12));
    // the default Godunov flux agrees away from the grid edge
    auto next_g = vi_step(v, c, m, db, dt);
    for (std::size_t i = 1; i + 1 < g.size(); ++i)
      CHECK(next_g[i] == doctest::Approx(v[i] + dt * 1.0).epsilon(1e-12));
  }
  SUBCASE("clamp dominates when H <= 0") {
    // V = c = -x: H = grad V . f = -1 < 0, so the step would sink below c
    auto c = oracles::sample_field(g, [](const std::vector<double>& x) { return -x[0]; });
    auto next = vi_step(c, c, m, db, dt);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(next[i] == c[i]);
  }
  SUBCASE("CFL violation throws") {
    auto v = oracles::sample_field(g, [](const std::vector<double>& x) { return x[0]; });
    ScalarField c(g, -100.0);
    CHECK_THROWS(vi_step(v, c, m, db, 10.0 * dt));
  }
}

TEST_CASE("cold solve matches the analytic stopping-distance set") {
  QuadSetup s(81);
  SolveConfig cfg;
  cfg.threads = 1;
  auto res = solve(s.constraint, s.constraint, s.model, s.dbounds, cfg);
  REQUIRE(res.converged);
  CHECK(res.nodes_per_sweep == 81 * 81);

  oracles::StoppingDistanceSet oracle;  // brake = 9.8 - 0.3
  oracle.brake = 9.8 - 0.3;

  const double cell = std::hypot(s.grid.spacing(0), s.grid.spacing(1));
  std::size_t agree = 0, total = 0;
  std::vector<std::size_t> idx(2);
  for (std::size_t lin = 0; lin < s.grid.size(); ++lin) {
    s.grid.unravel(lin, idx);
    const double p = s.grid.coord(0, idx[0]);
    const double v = s.grid.coord(1, idx[1]);
    if (std::abs(oracle.margin(p, v)) < 1.5 * cell) continue;  // skip the boundary band
    ++total;
    if ((res.value[lin] <= 0.0) == oracle.safe(p, v)) ++agree;
  }
  CHECK(total > 3000);
  CHECK(agree == total);
}

TEST_CASE("solver invariants on the quad model") {
  QuadSetup s(61);
  SolveConfig cfg;
  cfg.threads = 1;

  SUBCASE("V* >= c exactly and subzero(V*) within the constraint set") {
    auto res = solve(s.constraint, s.constraint, s.model, s.dbounds, cfg);
    REQUIRE(res.converged);
    for (std::size_t i = 0; i < res.value.size(); ++i) {
      CHECK(res.value[i] >= s.constraint[i]);
      if (res.value[i] <= 0.0) CHECK(s.constraint[i] <= 0.0);
    }
  }

  SUBCASE("cold evolution is pointwise non-decreasing") {
    const double dt = cfl_dt(s.grid, s.model, s.dbounds, cfg.cfl_factor);
    ScalarField v = s.constraint;
    for (int k = 0; k < 60; ++k) {
      auto next = vi_step(v, s.constraint, s.model, s.dbounds, dt);
      for (std::size_t i = 0; i < v.size(); ++i) CHECK(next[i] >= v[i] - 1e-12);
      v = std::move(next);
    }
  }

  SUBCASE("godunov and lax-friedrichs cross-check on safe-set signs") {
    auto godunov = solve(s.constraint, s.constraint, s.model, s.dbounds, cfg);
    SolveConfig lf_per_node = cfg;
    lf_per_node.scheme = SolveConfig::Scheme::kLaxFriedrichs;
    SolveConfig lf_global = lf_per_node;
    lf_global.dissipation = SolveConfig::Dissipation::kGlobal;
    auto lf1 = solve(s.constraint, s.constraint, s.model, s.dbounds, lf_per_node);
    auto lf2 = solve(s.constraint, s.constraint, s.model, s.dbounds, lf_global);
    for (const auto* other : {&lf1, &lf2}) {
      std::size_t mismatches = 0;
      for (std::size_t i = 0; i < godunov.value.size(); ++i)
        if ((godunov.value[i] <= 0) != (other->value[i] <= 0)) {
          ++mismatches;
          CHECK(oracles::near_zero_crossing(godunov.value, i, 2));
        }
      CHECK(mismatches < godunov.value.size() / 50);
    }
  }
}

TEST_CASE("warm restart at the fixed point converges immediately") {
  QuadSetup s(61);
  SolveConfig cfg;
  cfg.threads = 1;
  auto cold = solve(s.constraint, s.constraint, s.model, s.dbounds, cfg);
  REQUIRE(cold.converged);

  auto warm = solve(cold.value, s.constraint, s.model, s.dbounds, cfg);
  CHECK(warm.converged);
  CHECK(warm.iterations <= 5);
  for (std::size_t i = 0; i < warm.value.size(); ++i)
    CHECK(std::abs(warm.value[i] - cold.value[i]) <= cfg.tolerance * cold.dt * 5);
}

TEST_CASE("larger disturbance shrinks the safe set and raises the value") {
  QuadSetup s(61, 0.3);
  QuadSetup sbig(61, 1.0);
  SolveConfig cfg;
  cfg.threads = 1;
  auto small = solve(s.constraint, s.constraint, s.model, s.dbounds, cfg);
  auto big = solve(sbig.constraint, sbig.constraint, sbig.model, sbig.dbounds, cfg);
  REQUIRE(small.converged);
  REQUIRE(big.converged);

  for (std::size_t i = 0; i < small.value.size(); ++i) {
    CHECK(big.value[i] >= small.value[i] - 1e-9);
    if (big.value[i] <= 0.0) CHECK(small.value[i] <= 0.0);  // subset, no dilation needed
  }
}

TEST_CASE("warm update after a disturbance change is conservative and fast") {
  QuadSetup s03(61, 0.3);
  QuadSetup s04(61, 0.4);
  SolveConfig cfg;
  cfg.threads = 1;

  auto base = solve(s03.constraint, s03.constraint, s03.model, s03.dbounds, cfg);
  auto cold = solve(s04.constraint, s04.constraint, s04.model, s04.dbounds, cfg);
  auto warm = solve(base.value, s04.constraint, s04.model, s04.dbounds, cfg);
  REQUIRE(base.converged);
  REQUIRE(cold.converged);
  REQUIRE(warm.converged);

  CHECK(warm.iterations < cold.iterations);
  CHECK(oracles::subzero_subset_dilated(warm.value, cold.value, 1));
  CHECK(oracles::max_diff_away_from_boundary(warm.value, cold.value) <=
        10 * cfg.tolerance * cold.dt);
}

TEST_CASE("sign agreement with the discretized game oracle") {
  QuadSetup s(21);
  SolveConfig cfg;
  cfg.threads = 1;
  auto res = solve(s.constraint, s.constraint, s.model, s.dbounds, cfg);
  REQUIRE(res.converged);

  auto game = oracles::discretized_game_value(
      s.constraint, s.model, std::vector<Interval>{{-0.3, 0.3}}, 3.0, 0.01, 5);

  std::size_t agree = 0;
  for (std::size_t i = 0; i < res.value.size(); ++i) {
    if ((res.value[i] <= 0) == (game[i] <= 0)) {
      ++agree;
    } else {
      CHECK(oracles::near_zero_crossing(game, i));
    }
  }
  CHECK(double(agree) >= 0.97 * double(res.value.size()));
}

TEST_CASE("coarse-to-fine refinement") {
  QuadSetup fine(81);
  SolveConfig cfg;
  cfg.threads = 1;
  Grid coarse({{0.0, 3.2, 41}, {-5.0, 5.0, 41}});

  auto cold = solve(fine.constraint, fine.constraint, fine.model, fine.dbounds, cfg);
  auto ctf = solve_coarse_to_fine(fine.constraint, fine.model, fine.dbounds, coarse, cfg);
  REQUIRE(cold.converged);
  REQUIRE(ctf.coarse.converged);
  REQUIRE(ctf.fine.converged);

  // the refinement stage never costs more than a cold solve; the acceptance
  // suite judges the 0.5x speedup clause at its own resolutions
  CHECK(ctf.fine.iterations <= cold.iterations);
  CHECK(oracles::max_diff_away_from_boundary(ctf.fine.value, cold.value) <=
        10 * cfg.tolerance * cold.dt);

  // deep-interior states classified correctly by the coarse stage alone
  auto coarse_on_fine = resample(ctf.coarse.value, fine.grid);
  for (std::size_t i = 0; i < cold.value.size(); ++i) {
    if (oracles::near_zero_crossing(cold.value, i)) continue;
    if (std::abs(cold.value[i]) < 0.15) continue;  // coarse-cell-scale margin
    CHECK((coarse_on_fine[i] <= 0) == (cold.value[i] <= 0));
  }
}

TEST_CASE("solver determinism across thread counts") {
  QuadSetup s(41);
  SolveConfig c1;
  c1.threads = 1;
  SolveConfig c4;
  c4.threads = 4;
  auto r1 = solve(s.constraint, s.constraint, s.model, s.dbounds, c1);
  auto r4 = solve(s.constraint, s.constraint, s.model, s.dbounds, c4);
  REQUIRE(r1.converged);
  REQUIRE(r4.converged);
  CHECK(r1.iterations == r4.iterations);
  for (std::size_t i = 0; i < r1.value.size(); ++i) CHECK(r1.value[i] == r4.value[i]);
}
