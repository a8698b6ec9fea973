#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "hjsafe/levelset.hpp"
#include "hjsafe/safety.hpp"
#include "hjsafe/solver.hpp"

using namespace hjsafe;

namespace {

struct Fixture {
  std::shared_ptr<const Quad2DVert> model = std::make_shared<Quad2DVert>();
  Grid grid{{{0.0, 3.2, 81}, {-5.0, 5.0, 81}}};
  ScalarField constraint = signed_distance_band(grid, 0, 0.35, 2.8);
  IntervalField dbounds =
      IntervalField::constant(grid, std::vector<Interval>{{-0.3, 0.3}});
  SolveResult solved;

  Fixture() {
    SolveConfig cfg;
    cfg.threads = 1;
    solved = solve(constraint, constraint, *model, dbounds, cfg);
    REQUIRE(solved.converged);
  }

  SafetyFilter make_filter() const { return {model, solved, dbounds}; }
};

const Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_CASE("deep-interior states pass the performance control through") {
  auto filter = fixture().make_filter();
  const std::vector<double> x{1.5, 0.0};
  REQUIRE(filter.value_at(x) < -1.0);
  auto d = filter.filter(x, std::vector<double>{0.73});
  CHECK_FALSE(d.override_active);
  CHECK(d.control[0] == 0.73);
}

TEST_CASE("near the boundary the override engages with full thrust") {
  auto filter = fixture().make_filter();
  // walk toward the floor at fixed descent speed until the filter trips
  bool tripped = false;
  for (double p = 0.9; p > 0.4; p -= 0.005) {
    const std::vector<double> x{p, -1.5};
    auto d = filter.filter(x, std::vector<double>{0.5});
    if (d.override_active) {
      tripped = true;
      CHECK(d.value > -0.2);       // onset sits just inside the boundary band
      CHECK(d.control[0] == 1.0);  // full thrust away from the floor
      break;
    }
  }
  CHECK(tripped);
}

TEST_CASE("near the ceiling ascending the override cuts thrust") {
  auto filter = fixture().make_filter();
  const std::vector<double> x{2.65, 1.5};
  auto d = filter.optimal_control(x);
  CHECK(d.control[0] == 0.0);
}

TEST_CASE("out-of-domain queries override fail-safe") {
  auto filter = fixture().make_filter();
  auto d = filter.filter(std::vector<double>{3.5, 0.0}, std::vector<double>{0.5});
  CHECK(d.override_active);
  CHECK(d.out_of_domain);
}

TEST_CASE("flat regions flag a degenerate costate") {
  // hand-built flat value function
  Grid g({{0.0, 1.0, 5}, {0.0, 1.0, 5}});
  SolveResult flat;
  flat.value = ScalarField(g, -1.0);
  flat.converged = true;
  flat.dt = 1e-3;
  auto db = IntervalField::constant(g, std::vector<Interval>{{-0.1, 0.1}});
  SafetyFilter filter(std::make_shared<Quad2DVert>(), flat, db);
  auto d = filter.optimal_control(std::vector<double>{0.5, 0.5});
  CHECK(d.degenerate);
  CHECK(d.control[0] == 0.0);  // tie rule takes the lower bound
}

TEST_CASE("contraction schedule") {
  auto filter = fixture().make_filter();
  CHECK(filter.lambda() == 0.0);

  SUBCASE("no violations leave lambda unchanged") {
    CHECK(filter.contract({}) == 0.0);
  }

  SUBCASE("single violation at V = -0.12 selects 0.16875") {
    // pick a state whose interpolated value is close to -0.12 by construction:
    // use the schedule arithmetic oracle on the actual interpolated value
    const std::vector<double> x{0.62, -1.0};
    const double v = filter.value_at(x);
    REQUIRE(v < 0.0);
    std::vector<Violation> viol{{x, -0.05}};
    const double lambda = filter.contract(viol);
    // direct enumeration of the schedule
    double expect = 0.05;
    while (expect <= -v) expect *= 1.5;
    CHECK(lambda == doctest::Approx(expect));
    CHECK(filter.lambda() == doctest::Approx(expect));
  }

  SUBCASE("schedule arithmetic matches the worked example") {
    double lambda = 0.05;
    while (lambda <= 0.12) lambda *= 1.5;
    CHECK(lambda == doctest::Approx(0.16875));
  }

  SUBCASE("contract is monotone in the violation set") {
    const std::vector<double> shallow{0.55, -1.2};  // V barely negative
    const std::vector<double> deep{1.5, 0.0};       // V very negative
    std::vector<Violation> one{{shallow, -0.1}};
    std::vector<Violation> both{{shallow, -0.1}, {deep, -0.1}};
    auto fa = fixture().make_filter();
    auto fb = fixture().make_filter();
    CHECK(fb.contract(both) >= fa.contract(one));
  }

  SUBCASE("violations deeper than the cap raise the emergency flag") {
    const std::vector<double> deep{1.5, 0.0};  // deepest interior
    std::vector<Violation> viol{{deep, -0.1}};
    auto f = fixture().make_filter();
    f.contract(viol);
    CHECK(f.emergency());
  }
}

TEST_CASE("adopt replaces the value function and resets lambda") {
  auto filter = fixture().make_filter();
  const std::vector<double> near_floor{0.55, -1.2};
  std::vector<Violation> viol{{near_floor, -0.1}};
  filter.contract(viol);
  REQUIRE(filter.lambda() > 0.0);

  SUBCASE("adopting an identical solve resets the contraction only") {
    const double before = filter.value_at(near_floor);
    filter.adopt(fixture().solved, fixture().dbounds);
    CHECK(filter.lambda() == 0.0);
    CHECK(filter.value_at(near_floor) == before);
  }

  SUBCASE("non-converged input is rejected") {
    SolveResult bad = fixture().solved;
    bad.converged = false;
    CHECK_THROWS(filter.adopt(bad, fixture().dbounds));
  }
}

TEST_CASE("filter is least-restrictive on sampled states") {
  auto filter = fixture().make_filter();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> up(0.0, 3.2), uv(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const std::vector<double> x{up(rng), uv(rng)};
    auto d = filter.filter(x, std::vector<double>{0.5});
    if (!d.override_active) CHECK(d.value <= -d.band);
  }
}

TEST_CASE("empirical forward invariance under adversarial wind") {
  const auto& f = fixture();
  auto filter = f.make_filter();
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> up(0.4, 2.75), uv(-4.0, 4.0);

  const double dt = 1e-3;
  int starts = 0;
  while (starts < 100) {
    std::vector<double> x{up(rng), uv(rng)};
    auto probe = filter.filter(x, std::vector<double>{0.5});
    if (probe.override_active || probe.value > -probe.band) continue;  // need interior
    ++starts;

    std::vector<double> xdot(2), u(1), dist(1);
    for (int step = 0; step < 30000; ++step) {
      auto dec = filter.filter(x, std::vector<double>{0.5});
      u[0] = dec.control[0];
      // adversarial disturbance from the extremal-input rule at x
      dist[0] = filter.optimal_control(x).worst_disturbance[0];
      f.model->flow(x, u, dist, xdot);
      for (std::size_t k = 0; k < 2; ++k) x[k] += dt * xdot[k];
      REQUIRE(x[0] >= 0.35);
      REQUIRE(x[0] <= 2.8);
    }
  }
}
