#include <doctest.h>

#include <cmath>
#include <random>

#include "hjsafe/dynamics.hpp"

using namespace hjsafe;

namespace {

// brute-force min over u / max over d of <p, f(x,u,d)> on a uniform input
// lattice; independent of the sign-rule path
double minmax_on_lattice(const DynamicsModel& m, std::span<const double> x,
                         std::span<const double> p, std::span<const Interval> db,
                         int levels) {
  const auto ub = m.control_bounds();
  const std::size_t nu = m.control_dim(), ndst = m.disturbance_dim();
  std::vector<double> u(nu), d(ndst), xdot(m.state_dim());

  auto lattice_value = [&](std::span<const Interval> b, std::size_t ch, std::size_t step) {
    return b[ch].lo + (b[ch].hi - b[ch].lo) * double(step) / double(levels - 1);
  };

  double best_u = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> ui(nu, 0);
  for (;;) {
    for (std::size_t j = 0; j < nu; ++j) u[j] = lattice_value(ub, j, ui[j]);
    double worst_d = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> di(ndst, 0);
    for (;;) {
      for (std::size_t k = 0; k < ndst; ++k) d[k] = lattice_value(db, k, di[k]);
      m.flow(x, u, d, xdot);
      double val = 0.0;
      for (std::size_t i = 0; i < m.state_dim(); ++i) val += p[i] * xdot[i];
      worst_d = std::max(worst_d, val);
      std::size_t c = 0;
      while (c < ndst && ++di[c] == std::size_t(levels)) di[c++] = 0;
      if (c == ndst) break;
    }
    best_u = std::min(best_u, worst_d);
    std::size_t c = 0;
    while (c < nu && ++ui[c] == std::size_t(levels)) ui[c++] = 0;
    if (c == nu) break;
  }
  return best_u;
}

}  // namespace

TEST_CASE("quad2d flow") {
  Quad2DVert m;  // k_T = 19.6, k_0 = 0
  std::vector<double> xdot(2);
  m.flow(std::vector<double>{1.0, 0.0}, std::vector<double>{0.5}, std::vector<double>{0.0},
         xdot);
  CHECK(xdot[0] == doctest::Approx(0.0));
  CHECK(xdot[1] == doctest::Approx(19.6 * 0.5 - 9.8));  // hover at half thrust

  CHECK_THROWS(m.flow(std::vector<double>{1.0}, std::vector<double>{0.5},
                      std::vector<double>{0.0}, xdot));
}

TEST_CASE("planar 4d flow matches the model equations") {
  NearHoverPlanar4D m("x");
  std::vector<double> xdot(4);
  SUBCASE("equilibrium attitude") {
    m.flow(std::vector<double>{0.0, 1.0, 0.0, 0.0}, std::vector<double>{0.0},
           std::vector<double>{0.0}, xdot);
    CHECK(xdot[0] == doctest::Approx(1.0));
    CHECK(xdot[1] == doctest::Approx(0.0));
    CHECK(xdot[2] == doctest::Approx(0.0));
    CHECK(xdot[3] == doctest::Approx(0.0));
  }
  SUBCASE("theta = 0.1, S = 0.1") {
    const double omega = 0.25;
    m.flow(std::vector<double>{0.0, 0.0, 0.1, omega}, std::vector<double>{0.1},
           std::vector<double>{0.0}, xdot);
    CHECK(xdot[1] == doctest::Approx(9.8 * std::tan(0.1)));
    CHECK(xdot[2] == doctest::Approx(-8.0 * 0.1 + omega));
    CHECK(xdot[3] == doctest::Approx(-10.0 * 0.1 + 10.0 * 0.1));  // cancels
  }
}

TEST_CASE("vertical 2d subsystem hovers inside its thrust box") {
  NearHoverVertical2D m;
  const auto ub = m.control_bounds();
  const double hover = m.params().gravity / m.params().thrust_gain;
  CHECK(ub[0].lo < hover);
  CHECK(ub[0].hi > hover);
  std::vector<double> xdot(2);
  m.flow(std::vector<double>{1.0, 0.0}, std::vector<double>{hover},
         std::vector<double>{0.0}, xdot);
  CHECK(xdot[1] == doctest::Approx(0.0));
  // authority is +-0.4 g around hover
  m.flow(std::vector<double>{1.0, 0.0}, std::vector<double>{ub[0].hi},
         std::vector<double>{0.0}, xdot);
  CHECK(xdot[1] == doctest::Approx(0.4 * 9.8));
}

TEST_CASE("extremal inputs follow the sign rule") {
  Quad2DVert m;
  const std::vector<Interval> db{{-0.3, 0.3}};
  const std::vector<double> x{1.0, 2.0};

  SUBCASE("p = (0,1): control minimizes, disturbance maximizes") {
    auto ext = extremal_inputs(m, x, std::vector<double>{0.0, 1.0}, db);
    CHECK(ext.u[0] == 0.0);
    CHECK(ext.d[0] == 0.3);
    CHECK_FALSE(ext.degenerate);
  }
  SUBCASE("p = (0,-1): signs flip") {
    auto ext = extremal_inputs(m, x, std::vector<double>{0.0, -1.0}, db);
    CHECK(ext.u[0] == 1.0);
    CHECK(ext.d[0] == -0.3);
  }
  SUBCASE("p = (1,0): coefficients vanish, ties take lower bounds") {
    auto ext = extremal_inputs(m, x, std::vector<double>{1.0, 0.0}, db);
    CHECK(ext.u[0] == 0.0);
    CHECK(ext.d[0] == -0.3);
    CHECK(ext.degenerate);
  }
}

TEST_CASE("hamiltonian examples") {
  Quad2DVert m;
  const std::vector<Interval> db{{-0.3, 0.3}};
  CHECK(hamiltonian(m, std::vector<double>{1.0, 2.0}, std::vector<double>{0.0, 1.0}, db) ==
        doctest::Approx(-9.8 + 0.3));
  CHECK(hamiltonian(m, std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 0.0}, db) ==
        doctest::Approx(2.0));
  CHECK(hamiltonian(m, std::vector<double>{1.0, 2.0}, std::vector<double>{0.0, 0.0}, db) ==
        doctest::Approx(0.0));
}

TEST_CASE("hamiltonian equals brute-force min-max on random costates") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const std::vector<Interval> db1{{-0.4, 0.25}};
  const std::vector<Interval> db2{{-0.4, 0.25}, {-0.1, 0.5}};

  Quad2DVert quad;
  NearHoverPlanar4D planar("x");
  TwinDoubleIntegrator twin;

  for (int trial = 0; trial < 500; ++trial) {
    SUBCASE("") {}  // keep doctest quiet about empty loops
    {
      std::vector<double> x{unit(rng) * 2 + 1.5, unit(rng) * 3};
      std::vector<double> p{unit(rng), unit(rng)};
      const double h = hamiltonian(quad, x, p, db1);
      CHECK(h == doctest::Approx(minmax_on_lattice(quad, x, p, db1, 11)).epsilon(1e-9));
    }
    {
      std::vector<double> x{unit(rng) * 2, unit(rng) * 3, unit(rng) * 0.3, unit(rng)};
      std::vector<double> p{unit(rng), unit(rng), unit(rng), unit(rng)};
      const double h = hamiltonian(planar, x, p, db1);
      CHECK(h == doctest::Approx(minmax_on_lattice(planar, x, p, db1, 11)).epsilon(1e-9));
    }
    {
      std::vector<double> x{unit(rng), unit(rng), unit(rng), unit(rng)};
      std::vector<double> p{unit(rng), unit(rng), unit(rng), unit(rng)};
      const double h = hamiltonian(twin, x, p, db2);
      CHECK(h == doctest::Approx(minmax_on_lattice(twin, x, p, db2, 11)).epsilon(1e-9));
    }
  }
}

TEST_CASE("flow bounds") {
  Quad2DVert m;
  const std::vector<Interval> db{{-0.3, 0.3}};
  SUBCASE("acceleration dimension attains 10.1") {
    auto alpha = flow_bounds(m, std::vector<double>{1.0, 2.0}, db);
    CHECK(alpha[1] == doctest::Approx(10.1));
    CHECK(alpha[0] == doctest::Approx(2.0));  // drift-only dimension
  }
  SUBCASE("planar omega-dot bound at theta = 0") {
    NearHoverPlanar4D p("x");
    auto alpha = flow_bounds(p, std::vector<double>{0.0, 0.0, 0.0, 0.0}, db);
    CHECK(alpha[3] == doctest::Approx(10.0 * 0.2443));
  }
}

TEST_CASE("flow bounds dominate |f_i| on random admissible inputs") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  NearHoverPlanar4D m("x");
  const std::vector<Interval> db{{-0.5, 0.8}};
  const auto ub = m.control_bounds();
  std::vector<double> xdot(4);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> x{unit(rng) * 4 - 2, unit(rng) * 6 - 3, unit(rng) * 0.6 - 0.3,
                          unit(rng) * 2 - 1};
    auto alpha = flow_bounds(m, x, db);
    const std::vector<double> u{ub[0].lo + unit(rng) * (ub[0].hi - ub[0].lo)};
    const std::vector<double> d{db[0].lo + unit(rng) * (db[0].hi - db[0].lo)};
    m.flow(x, u, d, xdot);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(xdot[i]) <= alpha[i] + 1e-12);
  }
}

TEST_CASE("10d model stacks its subsystems") {
  NearHover10D m;
  std::vector<double> x(10, 0.0);
  x[1] = 1.0;   // v_x
  x[9] = -0.5;  // v_z
  std::vector<double> u{0.1, -0.1, 9.8};
  std::vector<double> d{0.0, 0.0, 0.0};
  std::vector<double> xdot(10);
  m.flow(x, u, d, xdot);
  CHECK(xdot[0] == doctest::Approx(1.0));
  CHECK(xdot[3] == doctest::Approx(1.0));    // n0 * S_x
  CHECK(xdot[7] == doctest::Approx(-1.0));   // n0 * S_y
  CHECK(xdot[8] == doctest::Approx(-0.5));   // v_z
  CHECK(xdot[9] == doctest::Approx(0.0));    // hover thrust
}

TEST_CASE("model factory") {
  CHECK(make_model("quad2d_vert")->state_dim() == 2);
  CHECK(make_model("near_hover_10d")->state_dim() == 10);
  CHECK_THROWS(make_model("no_such_model"));
}
