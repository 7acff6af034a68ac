#include <cmath>

#include "catch_amalgamated.hpp"
#include "shocklab/pde.hpp"

using namespace shocklab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ShockParams phys(double ul = 1.0, double ur = -1.0, double delta = 0.45) {
  ShockParams p;
  p.eps = 1.0;
  p.delta = delta;
  p.u_minus = ul;
  p.u_plus = ur;
  p.A = 0.5;
  return p;
}

SimConfig small_config() {
  SimConfig c;
  c.params = phys();
  c.L_dom = 40;
  c.N = 1024;
  c.dt = 0.02;
  c.T = 4;
  return c;
}

const Profile& profile045() {
  static Profile p = build_profile(normalized_params(0.45));
  return p;
}

// Cubic Lagrange interpolation on a uniform grid.
double interp(const std::vector<double>& x, const std::vector<double>& v, double y) {
  double h = x[1] - x[0];
  long j = static_cast<long>(std::floor((y - x[0]) / h)) - 1;
  j = std::clamp<long>(j, 0, static_cast<long>(x.size()) - 4);
  double r = 0;
  for (int a = 0; a < 4; ++a) {
    double l = 1;
    for (int b = 0; b < 4; ++b)
      if (a != b) l *= (y - x[j + b]) / (x[j + a] - x[j + b]);
    r += l * v[j + a];
  }
  return r;
}

}  // namespace

TEST_CASE("the unperturbed profile is a discrete steady state") {
  for (int order : {2, 4}) {
    SimConfig c = small_config();
    c.order = order;
    Simulation sim(c, profile045());
    auto R = sim.run();
    CAPTURE(order);
    for (double l : R.series.linf_w) CHECK(l <= 1e-8);
    for (double l : R.series.lyap) CHECK(std::abs(l) <= 1e-14);
    CHECK(std::abs(R.final_state.X) <= 1e-12);
    CHECK(R.verdict.key1_max_abs <= 1e-12);
    CHECK(R.verdict.pass);
  }
}

TEST_CASE("periodic stepper preserves constants and conserves mass") {
  PeriodicHarness H(128, 20.0, 1.0, 0.45, 0.01, true);
  std::vector<double> u(128, 0.7);
  auto v = u;
  for (int k = 0; k < 50; ++k) v = H.step(v);
  for (std::size_t j = 0; j < v.size(); ++j) CHECK(v[j] == Catch::Approx(0.7).margin(1e-14));

  const double pi = std::acos(-1.0);
  std::vector<double> w(128);
  for (int j = 0; j < 128; ++j) w[j] = 0.5 * std::sin(2 * pi * j / 128.0) + 0.3 * std::cos(6 * pi * j / 128.0);
  double m0 = 0;
  for (double x : w) m0 += x;
  for (int k = 0; k < 100; ++k) w = H.step(w);
  double m1 = 0;
  for (double x : w) m1 += x;
  CHECK_THAT(m1, WithinAbs(m0, 1e-11));
}

TEST_CASE("linear part converges at second order to the exact Fourier mode") {
  const double pi = std::acos(-1.0), Lp = 2 * pi, eps = 0.3, delta = 0.2, T = 1.0;
  const int k = 3;
  auto err = [&](int n, double dt, int order) {
    PeriodicHarness H(n, Lp, eps, delta, dt, false, order);
    std::vector<double> u(n);
    for (int j = 0; j < n; ++j) u[j] = std::sin(k * Lp * j / n);
    int steps = static_cast<int>(std::lround(T / dt));
    for (int s = 0; s < steps; ++s) u = H.step(u);
    double e = 0;
    for (int j = 0; j < n; ++j) {
      double x = Lp * j / n;
      e = std::max(e, std::abs(u[j] - std::exp(-eps * k * k * T) * std::sin(k * x + delta * k * k * k * T)));
    }
    return e;
  };
  double e1 = err(64, 0.02, 2), e2 = err(128, 0.01, 2), e3 = err(256, 0.005, 2);
  CAPTURE(e1, e2, e3);
  CHECK(e1 / e2 == Catch::Approx(4).margin(0.4));
  CHECK(e2 / e3 == Catch::Approx(4).margin(0.4));
  // fourth order in space: the error is dominated by time stepping
  double f1 = err(64, 0.001, 4);
  CHECK(f1 < 0.05 * err(64, 0.001, 2));
}

TEST_CASE("shift rate of the profile derivative") {
  Simulation sim(small_config(), profile045());
  std::vector<double> ub, dub;
  sim.profile_at(0, 0, ub, dub);
  const double M = 4.0 / 3.0;
  double r = shift_rate(dub, dub, sim.dx(), M, 1.0, -1.0);
  auto q = quad_composite([&](double x) { double d = profile045().du_at(x); return d * d; }, -40, 40, 1e-12);
  CHECK_THAT(r, WithinRel(-(2 * M / 2.0) * q.value, 1e-5));
  CHECK_THROWS(shift_rate({1.0}, {1.0, 2.0}, 0.1, M, 1, -1));
}

TEST_CASE("initial perturbation norms") {
  SimConfig c = small_config();
  c.perturbation = Perturbation::gaussian(0.3, 2.0, 0.0);
  Simulation g(c, profile045());
  auto st = g.init();
  auto d = g.diagnostics(st.u, 0, 0);
  const double pi = std::acos(-1.0);
  CHECK_THAT(d.l2, WithinRel(0.09 * 2.0 * std::sqrt(pi / 2), 1e-9));

  c.perturbation = Perturbation::shifted(1.0);
  Simulation sh(c, profile045());
  st = sh.init();
  d = sh.diagnostics(st.u, 0, 0);
  const Profile& P = profile045();
  auto q = quad_composite([&](double x) { double v = P.u_at(x - 1) - P.u_at(x); return v * v; }, -40, 40, 1e-13);
  CHECK_THAT(d.l2, WithinRel(q.value, 1e-5));

  c.perturbation = Perturbation::random_fourier(7, 6, 0.1);
  Simulation rf1(c, profile045()), rf2(c, profile045());
  CHECK(rf1.init().u == rf2.init().u);
  c.perturbation = Perturbation::random_fourier(8, 6, 0.1);
  Simulation rf3(c, profile045());
  CHECK(rf1.init().u != rf3.init().u);
}

TEST_CASE("configuration guards") {
  SimConfig c = small_config();
  c.dt = 0.08;  // advective CFL
  CHECK_THROWS_AS(Simulation(c, profile045()).init(), SimConfigError);
  c = small_config();
  c.N = 256;  // under-resolved oscillation
  CHECK_THROWS_AS(Simulation(c, profile045()), SimConfigError);
  c = small_config();
  c.L_dom = 8;  // profile not flat at the edges
  CHECK_THROWS_AS(Simulation(c, profile045()), SimConfigError);
  c = small_config();
  c.perturbation = Perturbation::gaussian(0.3, 2.0, 39.5);  // touches the pinned nodes
  CHECK_THROWS_AS(Simulation(c, profile045()).init(), SimConfigError);
  c = small_config();
  c.M = 1.0;
  CHECK_THROWS_AS(Simulation(c, profile045()), SimConfigError);
  c = small_config();
  c.T = 4.01;
  CHECK_THROWS_AS(Simulation(c, profile045()).run(), SimConfigError);
  c = small_config();
  c.params.delta = 0.5;  // wrong profile
  CHECK_THROWS_AS(Simulation(c, profile045()), SimConfigError);
}

TEST_CASE("non-finite state is reported") {
  Simulation sim(small_config(), profile045());
  auto st = sim.init();
  st.u[500] = std::nan("");
  CHECK_THROWS_AS(sim.step(st), SimError);
}

TEST_CASE("perturbation reaching the boundary is reported") {
  SimConfig c = small_config();
  c.perturbation = Perturbation::gaussian(0.3, 1.0, 34.0);
  c.boundary_tol = 1e-12;
  CHECK_THROWS_AS(Simulation(c, profile045()).run(), SimError);
}

TEST_CASE("Galilean shift of the end states") {
  SimConfig a = small_config();
  a.dt = 0.005;
  a.T = 2;
  a.perturbation = Perturbation::gaussian(0.2, 2.0, 0.0);
  SimConfig b = a;
  b.params = phys(3.0, 1.0);
  b.cfl_max = 1.0;
  Simulation sa(a, profile045()), sb(b, profile045());
  CHECK(sb.sigma() == 2.0);
  auto Ra = sa.run(), Rb = sb.run();
  const auto& x = sa.x();
  double worst = 0;
  for (std::size_t j = 100; j + 100 < x.size(); ++j) {
    double y = x[j] - 2.0 * a.T;
    worst = std::max(worst, std::abs(Rb.final_state.u[j] - 2.0 - interp(x, Ra.final_state.u, y)));
  }
  CAPTURE(worst);
  CHECK(worst < 2e-3);
  CHECK_THAT(Rb.final_state.X, WithinAbs(Ra.final_state.X, 1e-3));
  CHECK(Ra.final_state.X != 0);
}

TEST_CASE("Lyapunov bookkeeping on a small gaussian run") {
  SimConfig c = small_config();
  c.perturbation = Perturbation::gaussian(0.3, 2.0, 0.0);
  auto R = Simulation(c, profile045()).run();
  const auto& S = R.series;
  REQUIRE(S.t.size() == static_cast<std::size_t>(R.steps) + 1);
  for (std::size_t k = 0; k < S.t.size(); ++k) {
    CHECK_THAT(S.lyap[k], WithinAbs(S.l2[k] + S.shift_cum[k] + S.diss_cum[k], 1e-14));
    CHECK(S.shift_cum[k] >= 0);
    CHECK(S.diss_cum[k] >= 0);
  }
  CHECK(R.verdict.max_violation <= R.verdict.band);
  CHECK(R.verdict.key1_max_abs < 1e-3);
  CHECK(R.trace.back().t == Catch::Approx(c.T));
}
