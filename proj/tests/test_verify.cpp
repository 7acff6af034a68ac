#include <cmath>

#include "catch_amalgamated.hpp"
#include "kv_cases.hpp"
#include "shocklab/verify.hpp"

using namespace shocklab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("closed-form u0 bounds") {
  CHECK_THAT(u0_closed_bound(0.5), WithinAbs(0.0601, 1e-4));
  CHECK_THAT(u0_closed_bound(1.0 / 3), WithinAbs(0.03, 1e-3));
  CHECK_THAT(u0_closed_bound(1.0), WithinAbs(0.15, 1e-3));
  CHECK_THAT(u0_closed_bound_quarter(), WithinAbs(0.0166, 1e-4));
  // continuity at the A -> 1/4 end
  CHECK_THAT(u0_closed_bound(0.25 + 1e-9), WithinAbs(u0_closed_bound_quarter(), 1e-7));
  // scales linearly with s
  CHECK_THAT(u0_closed_bound(0.5, 3.0), WithinRel(3 * u0_closed_bound(0.5), 1e-14));
  CHECK_THROWS_AS(u0_closed_bound(0.2), ParamError);
}

TEST_CASE("bootstrap on k replays admissibly") {
  auto steps = lem_rm_bootstrap(1.0);
  REQUIRE(steps.size() == 3);
  for (const auto& s : steps) CHECK(s.ok);
  CHECK(steps.back().bound < steps.front().bound);
}

TEST_CASE("decay-rate roots reproduce the tabulated values") {
  for (const auto& row : table1()) {
    // roots with the closed-form u0 bound, floored to two decimals
    double rs = rho_star_root(row.A, u0_closed_bound(row.A)), ru = rho_upper_root(row.A);
    CAPTURE(row.A, rs, ru);
    CHECK(std::floor(100 * rs + 1e-9) / 100 == Catch::Approx(row.rho_star).margin(1e-12));
    CHECK(std::floor(100 * ru + 1e-9) / 100 == Catch::Approx(row.rho_upper).margin(1e-12));
    rs = rho_star_root(row.A, row.alpha0);
    CHECK(std::abs(inc_decay_relation(rs, row.A, row.alpha0)) < 1e-10);
  }
  CHECK(std::floor(100 * rho_star_root(0.5, 0.0601)) / 100 == 4.64);
  CHECK(std::floor(100 * rho_upper_root(0.5)) / 100 == 4.77);
}

TEST_CASE("certificates pass on the A = 1/2 sweep") {
  for (double kappa : {0.30, 0.38, 0.45}) {
    Profile p = build_profile(normalized_params(kappa));
    VerifyBundle b = verify_profile(p, 0.5);
    CAPTURE(kappa);
    CHECK(b.u0_ok);
    CHECK(b.decay_ok);
    for (const auto& c : b.certs) {
      CAPTURE(c.name, c.index, c.margin);
      CHECK(!c.counts_as_failure());
      if (c.status == CertStatus::pass) CHECK(c.margin_refined >= c.margin - 1e-7);
    }
    CHECK(b.all_pass());
    for (const auto& v : b.l2.intervals) {
      CHECK(v.value <= v.bound);
      CHECK(v.quad_error < 0.01 * v.bound);
    }
    CHECK(b.l2.left_tail <= 0.001);
  }
}

TEST_CASE("decreasing-interval certificate where its hypotheses hold") {
  Profile p = build_profile(normalized_params(0.9, 1.0, 1.0));
  REQUIRE(p.n_resolved >= 3);
  auto c = check_dec_envelope(p, 2, 11.0 / 12.0, 1.0);
  CAPTURE(c.note, c.margin);
  CHECK(c.status == CertStatus::pass);
  CHECK(c.constants.at("rho") < 10);
  // at kappa = 0.45 the measured ratio is far above 10
  Profile q = build_profile(normalized_params(0.45));
  CHECK(check_dec_envelope(q, 2, 11.0 / 12.0, 0.5).status == CertStatus::not_applicable);
}

TEST_CASE("corrupted first parabola constant is caught") {
  Profile p = build_profile(normalized_params(0.45));
  VerifyOptions o;
  o.lambda_bar0_override = 0.5;
  auto cs = check_parabola_envelopes(p, o, 0);
  REQUIRE(!cs.empty());
  CHECK(cs.front().status == CertStatus::fail);
  CHECK(!verify_profile(p, 0.5, o).all_pass());
}

TEST_CASE("ceiling and regime guards") {
  CHECK_THROWS_AS(normalized_params(0.6, 1.0, 0.5).validate_ceiling(), ParamError);
  Profile p = build_profile(normalized_params(0.6, 1.0, 1.0));
  CHECK_THROWS_AS(check_parabola_envelopes(p), ParamError);
  CHECK_THROWS_AS(check_dec_envelope(p, 3, 0.9, 1.0), ParamError);
}

TEST_CASE("induction ledger constants") {
  auto L = induction_ledger();
  CHECK(L.a[1] == 1.0 / 30.0);
  CHECK(L.C1 == 1.0 / 3.0);
  CHECK(L.C0 == 13.0 / 10.0);
  CHECK(L.ok);
  int step2 = 0;
  for (const auto& c : L.checks) {
    CAPTURE(c.name, c.i, c.value, c.claim);
    CHECK(c.ok);
    if (c.name.rfind("step2_", 0) == 0) ++step2;
  }
  CHECK(step2 == 4 * 11);  // odd i <= 21
  for (double b : L.budget_exact) CHECK(b < 0.9);
  CHECK_THROWS_AS(induction_ledger(21, 1.0), ParamError);
}

TEST_CASE("weighted Poincare inequality on random smooth functions") {
  auto cases = kv_random_cases(200, 20240611ull);
  for (const auto& k : cases) {
    auto r = kv_inequality_check(k.f, k.df, k.a, k.b, 1e-10);
    CAPTURE(k.a, k.b, r.slack, r.scale);
    CHECK(r.ok);
  }
}

TEST_CASE("weighted Poincare inequality is sharp on constants and linears") {
  auto c = kv_inequality_check([](double) { return 2.5; }, [](double) { return 0.0; }, -1.3, 4.0);
  CHECK(std::abs(c.slack) <= 1e-12 * c.scale);
  auto l = kv_inequality_check([](double y) { return 3 * y - 1; }, [](double) { return 3.0; }, -1.3, 4.0);
  CHECK(std::abs(l.slack) <= 1e-12 * l.scale);
  // a quadratic is strict
  auto q = kv_inequality_check([](double y) { return y * y; }, [](double y) { return 2 * y; }, 0.0, 1.0);
  CHECK(q.slack > 1e-3 * q.scale);
  // the sampled variant agrees with the quadrature variant
  std::vector<double> fs(4001);
  for (int j = 0; j <= 4000; ++j) fs[j] = std::sin(3.0 * j / 4000.0);
  auto sv = kv_inequality_check(fs, 0.0, 1.0);
  auto qv = kv_inequality_check([](double y) { return std::sin(3 * y); }, [](double y) { return 3 * std::cos(3 * y); },
                                0.0, 1.0);
  CHECK_THAT(sv.slack, WithinAbs(qv.slack, 1e-5));
}
