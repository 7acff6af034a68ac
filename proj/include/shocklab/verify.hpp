// Floating-point certificates for the shock-structure inequalities, the L2
// interval bounds, the induction constants and the weighted Poincare bound.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shocklab/numerics.hpp"
#include "shocklab/profile.hpp"

namespace shocklab {

enum class CertStatus { pass, fail, not_applicable, unresolved, inconclusive };

inline const char* to_string(CertStatus s) {
  switch (s) {
    case CertStatus::pass: return "pass";
    case CertStatus::fail: return "fail";
    case CertStatus::not_applicable: return "not-applicable";
    case CertStatus::unresolved: return "unresolved";
    case CertStatus::inconclusive: return "inconclusive";
  }
  return "?";
}

struct InequalityCertificate {
  std::string name;
  int index = -1;
  double lo = 0, hi = 0;
  double margin = 0;          // min(LHS - RHS)
  double argmin = 0;
  double scale = 1;           // max(|LHS|, |RHS|, s^2)
  double rel_margin = 0;      // margin / max(|LHS|, |RHS|)
  double margin_refined = 0;  // at twice the samples
  int samples = 0;
  bool pass = false;
  CertStatus status = CertStatus::fail;
  std::map<std::string, double> constants;
  std::string note;

  bool counts_as_failure() const { return status == CertStatus::fail; }
};

struct VerifyOptions {
  int samples = 512;
  double margin_tol = 1e-7;
  // debug: override the first parabola constant (falsification path)
  std::optional<double> lambda_bar0_override;
};

// Pointwise (lhs, rhs) of an inequality lhs >= rhs.
using SidePair = std::pair<double, double>;
using SideFn = std::function<SidePair(double)>;

namespace detail {

struct SampleStats {
  double margin = std::numeric_limits<double>::infinity();
  double argmin = 0;
  double max_side = 0;
};

inline SampleStats sample_inequality(const SideFn& f, double a, double b, int n) {
  SampleStats st;
  auto visit = [&](double x) {
    auto [l, r] = f(x);
    double m = l - r;
    if (m < st.margin) {
      st.margin = m;
      st.argmin = x;
    }
    st.max_side = std::max({st.max_side, std::abs(l), std::abs(r)});
  };
  visit(a);
  for (double x : chebyshev_points(a, b, static_cast<std::size_t>(n))) visit(x);
  visit(b);
  return st;
}

inline InequalityCertificate certify(const std::string& name, int index, const SideFn& f,
                                     double a, double b, double s, const VerifyOptions& o) {
  InequalityCertificate c;
  c.name = name;
  c.index = index;
  c.lo = a;
  c.hi = b;
  c.samples = o.samples;
  auto st = sample_inequality(f, a, b, o.samples);
  auto st2 = sample_inequality(f, a, b, 2 * o.samples);
  c.margin = st.margin;
  c.argmin = st.argmin;
  c.margin_refined = st2.margin;
  double side = std::max(st.max_side, st2.max_side);
  c.scale = std::max(side, s * s);
  c.rel_margin = side > 0 ? st.margin / side : 0.0;
  double tol = o.margin_tol * c.scale;
  c.pass = st.margin >= -tol && st2.margin >= -tol && st2.margin >= st.margin - tol;
  c.status = c.pass ? CertStatus::pass : CertStatus::fail;
  return c;
}

inline double sqrt0(double x) { return std::sqrt(std::max(x, 0.0)); }

}  // namespace detail

// ------------------------------------------------------------ closed forms

inline double u0_closed_bound(double A, double s = 1.0) {
  if (!(A > 0.25 && A <= 1.0)) throw ParamError("u0_closed_bound: A must lie in (1/4, 1]");
  double r = std::sqrt(1.0 + 4.0 * A) - 1.0;
  double q = std::sqrt(9.0 + 25.0 * r * r) - 3.0;
  return s * q * q / (100.0 * A);
}

// Limit of the closed form as A -> 1/4 from above.
inline double u0_closed_bound_quarter(double s = 1.0) {
  double r = std::sqrt(2.0) - 1.0;
  double q = std::sqrt(9.0 + 25.0 * r * r) - 3.0;
  return s * q * q / 25.0;
}

struct BootstrapStep {
  double k = 0;
  double k_star = 0;
  double bound = 0;       // u0 <= bound * s
  double admissible = 0;  // k must be below this, computed from the previous bound
  bool ok = false;
};

inline double lem_rm_k_limit(double A, double u0_over_s) {
  return 2.0 * std::sqrt(A) / (1.0 + std::sqrt(1.0 + 4.0 * A)) *
         std::sqrt(1.0 / (u0_over_s - 1.0));
}

inline double lem_rm_bound(double A, double k) {
  double ks = 1.0 + 32.0 * k * k / (25.0 * A);
  return 1.0 + ks - std::sqrt(ks * ks - 1.0);
}

// Replays k = 1/2 -> 4/5 -> 1 starting from u0 < 2s.
inline std::vector<BootstrapStep> lem_rm_bootstrap(double A = 1.0,
                                                   std::vector<double> ks = {0.5, 0.8, 1.0}) {
  if (!(A > 0.25 && A <= 1.0)) throw ParamError("lem_rm_bootstrap: A must lie in (1/4, 1]");
  std::vector<BootstrapStep> out;
  double prev = 2.0;
  for (double k : ks) {
    BootstrapStep st;
    st.k = k;
    st.k_star = 1.0 + 32.0 * k * k / (25.0 * A);
    st.admissible = lem_rm_k_limit(A, prev);
    st.ok = k <= 1.0 && k < st.admissible;
    st.bound = lem_rm_bound(A, k);
    out.push_back(st);
    if (!st.ok) break;
    prev = st.bound;
  }
  return out;
}

// Tabulated decay rates per A and the u0 bounds they were derived with.
struct Table1Row {
  double A, rho_star, rho_upper, alpha0;
};
inline const std::vector<Table1Row>& table1() {
  static const std::vector<Table1Row> t = {{1.0 / 3, 6.05, 6.14, 0.03},
                                           {0.5, 4.64, 4.77, 0.0601},
                                           {2.0 / 3, 3.89, 4.06, 0.092},
                                           {0.75, 3.63, 3.81, 0.11},
                                           {1.0, 3.10, 3.30, 0.15}};
  return t;
}
inline const Table1Row& table1_row(double A) {
  for (const auto& r : table1())
    if (std::abs(r.A - A) < 1e-12) return r;
  throw ParamError("no tabulated decay rates for A=" + std::to_string(A));
}

// Left side minus right side of the increasing-interval decay relation.
inline double inc_decay_relation(double rho, double A, double alpha) {
  const double pi = std::acos(-1.0);
  return 3.0 * (rho - 1.0) + (rho * rho - rho + 1.0) * alpha / rho -
         0.75 * pi * std::sqrt(1.0 / A) * std::sqrt(2.0 - alpha / rho) * std::sqrt(rho + 1.0);
}
// Left side minus right side of the decreasing-interval decay relation.
inline double dec_decay_relation(double rho, double A, double k) {
  const double pi = std::acos(-1.0);
  return 3.0 * (rho - 1.0) - 0.75 * k * pi * std::sqrt(2.0 / A) * std::sqrt(rho + 1.0);
}
inline double rho_star_root(double A, double alpha0) {
  return find_root([&](double r) { return inc_decay_relation(r, A, alpha0); }, 1.0 + 1e-9,
                   100.0, 1e-13);
}
inline double rho_upper_root(double A, double k = 1.0) {
  return find_root([&](double r) { return dec_decay_relation(r, A, k); }, 1.0 + 1e-9, 100.0,
                   1e-13);
}

// Parabola constants, indexed by interval index i (rho_* from the A = 1/2 row).
inline double lambda_bar(int i, double rho_star = 4.64) {
  if (i == 0) return 0.355;
  if (i == 1) return 9.60;
  if (i % 2 == 0) return 1.94 * std::pow(rho_star, i);
  return std::pow(rho_star, i) / 0.51;
}

// ----------------------------------------------------------- certificates

namespace detail {
inline InequalityCertificate unresolved_cert(const std::string& name, int i) {
  InequalityCertificate c;
  c.name = name;
  c.index = i;
  c.status = CertStatus::unresolved;
  c.note = "interval beyond the resolved-oscillation cutoff";
  return c;
}
inline bool resolved(const Profile& p, int i) { return i < p.n_resolved; }
}  // namespace detail

// Rightmost decreasing piece (xi_0, inf): sampled up to the seed abscissa, the
// remaining tail compared through its limiting slope.
inline InequalityCertificate check_rm_envelope(const Profile& p, double A,
                                               const VerifyOptions& o = {}) {
  const double s = p.s();
  if (p.n_resolved < 1) {
    InequalityCertificate c = detail::unresolved_cert("rm_envelope", 0);
    c.status = CertStatus::not_applicable;
    c.note = "no interior extremum (monotone profile)";
    return c;
  }
  const double u0 = p.extrema[0].u, v0 = u0 - s;
  const double lam = (1.0 / std::sqrt(A)) * std::sqrt(v0 / (u0 + s));
  const double mu =
      (2.0 * s / (1.0 + std::sqrt(1.0 + 4.0 * A)) - (1.0 / std::sqrt(A)) * std::sqrt(s * v0)) /
      (u0 + s);
  if (!(mu > 0)) {
    InequalityCertificate c;
    c.name = "rm_envelope";
    c.index = 0;
    c.status = CertStatus::fail;
    c.note = "mu <= 0";
    c.constants = {{"lambda", lam}, {"mu", mu}, {"A", A}};
    return c;
  }
  SideFn f = [&p, s, u0, lam, mu](double x) -> SidePair {
    auto q = p.eval(x);
    double gap = std::max(u0 - q.u, 0.0);
    double up = q.u + s;
    return {-q.du, lam * std::sqrt(s) * std::sqrt(gap) * up + mu * gap * up};
  };
  auto c = detail::certify("rm_envelope", 0, f, p.extrema[0].xi, p.xi_right, s, o);
  double slope_lhs = -p.lambda_s;
  double slope_rhs = lam * std::sqrt(s) * std::sqrt(u0 + s) + mu * (u0 + s);
  c.constants = {{"lambda", lam}, {"mu", mu}, {"A", A}, {"u0", u0},
                 {"tail_slope_lhs", slope_lhs}, {"tail_slope_rhs", slope_rhs}};
  if (!(slope_lhs >= slope_rhs)) {
    c.pass = false;
    c.status = CertStatus::fail;
    c.note = "tail slope comparison fails";
  }
  return c;
}

// Envelope with a user-supplied k.
inline InequalityCertificate check_rm_lemma(const Profile& p, double A, double k,
                                            const VerifyOptions& o = {}) {
  const double s = p.s();
  if (p.n_resolved < 1) {
    InequalityCertificate c = detail::unresolved_cert("rm_lemma", 0);
    c.status = CertStatus::not_applicable;
    return c;
  }
  const double u0 = p.extrema[0].u, v0 = u0 - s;
  double kmax = lem_rm_k_limit(A, u0 / s);
  const double lam = k / std::sqrt(A) * std::sqrt(v0 / (u0 + s));
  SideFn f = [&p, s, u0, lam](double x) -> SidePair {
    auto q = p.eval(x);
    return {-q.du, lam * std::sqrt(s) * detail::sqrt0(u0 - q.u) * (q.u + s)};
  };
  auto c = detail::certify("rm_lemma", 0, f, p.extrema[0].xi, p.xi_right, s, o);
  c.constants = {{"k", k}, {"k_limit", kmax}, {"lambda", lam}, {"A", A}};
  if (!(k > 0 && k <= 1 && k < kmax)) {
    c.status = CertStatus::not_applicable;
    c.note = "k violates the lemma precondition";
  }
  return c;
}

inline InequalityCertificate check_inc_envelope(const Profile& p, int i, double A,
                                                const VerifyOptions& o = {}) {
  if (i < 1 || i % 2 == 0) throw ParamError("check_inc_envelope: i must be odd");
  if (!detail::resolved(p, i)) return detail::unresolved_cert("inc_envelope", i);
  const double s = p.s();
  const double vi = p.extrema[i].u - s, vp = p.extrema[i - 1].u - s;
  const double lam =
      std::sqrt(1.0 / A) * std::sqrt(s * (-vi) * (vi + 2.0 * s) / (vp - vi));
  SideFn f = [&p, vi, vp, lam](double x) -> SidePair {
    double v = p.v_at(x);
    return {p.du_at(x), lam * detail::sqrt0(vp - v) * detail::sqrt0(v - vi)};
  };
  auto c = detail::certify("inc_envelope", i, f, p.extrema[i].xi, p.extrema[i - 1].xi, s, o);
  // energy consequence: int u'^2 >= (pi/8) lambda (u_{i-1} - u_i)^2
  const double pi = std::acos(-1.0);
  auto q = quad_composite([&p](double x) { double d = p.du_at(x); return d * d; },
                          p.extrema[i].xi, p.extrema[i - 1].xi, 1e-12);
  double bound = pi / 8.0 * lam * (vp - vi) * (vp - vi);
  double ui = p.extrema[i].u, up = p.extrema[i - 1].u;
  double dE = (up - ui) * (up * up + up * ui + ui * ui - 3.0 * s * s) / 6.0;
  c.constants = {{"lambda_i", lam}, {"A", A}, {"dissipation", q.value},
                 {"dissipation_bound", bound}, {"energy_jump", dE}};
  if (q.value < bound * (1.0 - o.margin_tol)) {
    c.pass = false;
    c.status = CertStatus::fail;
    c.note = "energy consequence fails";
  }
  return c;
}

inline InequalityCertificate check_dec_envelope(const Profile& p, int i, double k, double A,
                                                const VerifyOptions& o = {}) {
  if (i < 2 || i % 2 != 0) throw ParamError("check_dec_envelope: i must be even and >= 2");
  if (!detail::resolved(p, i)) return detail::unresolved_cert("dec_envelope", i);
  const double s = p.s();
  const double vi = p.extrema[i].u - s, vp = p.extrema[i - 1].u - s;  // vi > 0 > vp
  const double ui2s2 = vi * (vi + 2.0 * s), s2up2 = -vp * (vp + 2.0 * s);
  const double lam = k * std::sqrt(1.0 / A) * std::sqrt(s * ui2s2 / (vi - vp));
  SideFn f = [&p, vi, vp, lam](double x) -> SidePair {
    double v = p.v_at(x);
    return {-p.du_at(x), lam * detail::sqrt0(vi - v) * detail::sqrt0(v - vp)};
  };
  auto c = detail::certify("dec_envelope", i, f, p.extrema[i].xi, p.extrema[i - 1].xi, s, o);
  const double rho = -vp / vi;
  const double kmax = std::min(1.0, std::sqrt(s2up2 / ui2s2));
  const double ui = dec_decay_relation(rho, A, k);
  c.constants = {{"k", k}, {"k_max", kmax}, {"rho", rho}, {"lambda_i", lam},
                 {"A", A}, {"dec_ui_slack", ui}};
  bool hyp_k = k >= 0.5 && k <= kmax;
  bool hyp_rho = rho < 10.0;
  if (!(hyp_k && hyp_rho)) {
    c.status = CertStatus::not_applicable;
    c.note = std::string("hypotheses fail:") + (hyp_k ? "" : " k-range") +
             (hyp_rho ? "" : " rho>=10") + "; margin reported for information";
  }
  return c;
}

// One certificate per monotone interval i = 0..n_resolved-1 (i = 0 on (xi_0, inf)).
inline std::vector<InequalityCertificate> check_parabola_envelopes(const Profile& p,
                                                                   const VerifyOptions& o = {},
                                                                   int max_i = -1) {
  if (!(p.params.kappa() < 0.5))
    throw ParamError("check_parabola_envelopes: constants are only given for kappa < 1/2");
  std::vector<InequalityCertificate> out;
  const double s = p.s();
  int n = p.n_resolved;
  int top = max_i < 0 ? std::max(n - 1, 0) : max_i;
  for (int i = 0; i <= top; ++i) {
    std::string name = "parabola_envelope";
    if (i >= n) {
      out.push_back(detail::unresolved_cert(name, i));
      continue;
    }
    double lb = lambda_bar(i);
    if (i == 0 && o.lambda_bar0_override) lb = *o.lambda_bar0_override;
    const double vi = p.extrema[i].u - s;
    const double vp = i == 0 ? -2.0 * s : p.extrema[i - 1].u - s;
    double hi = i == 0 ? p.xi_right : p.extrema[i - 1].xi;
    SideFn f;
    if (i % 2 == 0) {
      f = [&p, vi, vp, lb](double x) -> SidePair {
        double v = (x >= p.xi_right) ? p.eval(x).u - p.s() : p.v_at(x);
        return {-p.du_at(x), lb * (vi - v) * (v - vp)};
      };
    } else {
      f = [&p, vi, vp, lb](double x) -> SidePair {
        double v = p.v_at(x);
        return {p.du_at(x), lb * (vp - v) * (v - vi)};
      };
    }
    auto c = detail::certify(name, i, f, p.extrema[i].xi, hi, s, o);
    c.constants = {{"lambda_bar", lb}, {"rho_star", 4.64}};
    if (i == 0) {
      double slope_lhs = -p.lambda_s, slope_rhs = lb * (vi + 2.0 * s);
      c.constants["tail_slope_lhs"] = slope_lhs;
      c.constants["tail_slope_rhs"] = slope_rhs;
      if (!(slope_lhs >= slope_rhs)) {
        c.pass = false;
        c.status = CertStatus::fail;
        c.note = "tail slope comparison fails";
      }
    }
    if (i >= 2) c.note = "lambda_bar indexed by interval index i";
    out.push_back(c);
  }
  return out;
}

// ----------------------------------------------------------- decay ratios

struct DecayReport {
  std::vector<double> ratios_inc;  // (u_{i-1}-s)/(s-u_i), odd i
  std::vector<double> ratios_dec;  // (s-u_i)/(u_{i+1}-s), odd i
  double rho_star = 0, rho_upper = 0;
  double min_inc() const {
    return ratios_inc.empty() ? std::numeric_limits<double>::infinity()
                              : *std::min_element(ratios_inc.begin(), ratios_inc.end());
  }
  double min_dec() const {
    return ratios_dec.empty() ? std::numeric_limits<double>::infinity()
                              : *std::min_element(ratios_dec.begin(), ratios_dec.end());
  }
  bool dominated(double tol) const {
    return min_inc() >= rho_star - tol && min_dec() >= rho_upper - tol;
  }
};

inline DecayReport decay_report(const Profile& p, double A) {
  DecayReport r;
  const auto& row = table1_row(A);
  r.rho_star = row.rho_star;
  r.rho_upper = row.rho_upper;
  const double s = p.s();
  for (int i = 1; i < p.n_resolved; i += 2) {
    r.ratios_inc.push_back((p.extrema[i - 1].u - s) / (s - p.extrema[i].u));
    if (i + 1 < p.n_resolved) r.ratios_dec.push_back((s - p.extrema[i].u) / (p.extrema[i + 1].u - s));
  }
  return r;
}

// ------------------------------------------------------------- L2 bounds

struct L2IntervalValue {
  int i = 0;
  double value = 0;  // (1/|u_i-u_{i-1}|) int_{J_i} (u-u_i)^2
  double bound = 0;
  double quad_error = 0;
  CertStatus status = CertStatus::fail;
};

struct L2Report {
  std::vector<L2IntervalValue> intervals;
  double left_tail = 0, left_tail_bound = 0, left_tail_error = 0;
  CertStatus left_tail_status = CertStatus::not_applicable;
};

inline double l2_bound_for(int i, double rho_star = 4.64) {
  if (i == 1) return 0.178;
  if (i % 2 == 0) return 0.81 * std::pow(rho_star, -i);
  return 0.82 * std::pow(rho_star, -i);
}

inline L2Report l2_interval_bounds(const Profile& p) {
  L2Report r;
  const double s = p.s();
  for (const auto& m : p.markers.per_i) {
    int i = m.i;
    L2IntervalValue v;
    v.i = i;
    v.bound = l2_bound_for(i);
    const double vi = p.extrema[i].u - s;
    const double du = std::abs(p.extrema[i].u - p.extrema[i - 1].u);
    auto f = [&p, vi](double x) { double d = p.v_at(x) - vi; return d * d; };
    // split at the markers so each panel sees a smooth monotone stretch
    double pts[4] = {p.extrema[i].xi, m.xi_star, m.xi_starstar, m.xi_sup};
    double val = 0, err = 0;
    bool conv = true;
    for (int k = 0; k < 3; ++k) {
      auto q = quad_composite(f, pts[k], pts[k + 1], 1e-13);
      val += q.value;
      err += q.error;
      conv = conv && q.converged;
    }
    v.value = val / du;
    v.quad_error = err / du;
    if (!conv || v.quad_error > 0.01 * v.bound) v.status = CertStatus::inconclusive;
    else v.status = v.value <= v.bound ? CertStatus::pass : CertStatus::fail;
    r.intervals.push_back(v);
  }
  r.left_tail_bound = 0.001 * s;
  if (p.markers.xi_s) {
    auto f = [&p](double x) { double d = p.v_at(x); return d * d; };
    auto q = quad_composite(f, p.xi_left, *p.markers.xi_s, 1e-13);
    double tail = p.left_tail_l2();
    r.left_tail = q.value + tail;
    r.left_tail_error = q.error + std::abs(tail) * 1e-6;
    if (!q.converged || r.left_tail_error > 0.01 * r.left_tail_bound)
      r.left_tail_status = CertStatus::inconclusive;
    else
      r.left_tail_status = r.left_tail <= r.left_tail_bound ? CertStatus::pass : CertStatus::fail;
  } else {
    r.left_tail_status = CertStatus::not_applicable;
  }
  return r;
}

// -------------------------------------------------------- induction ledger

struct CoefficientCheck {
  std::string name;
  int i = 0;
  double value = 0;
  double claim = 0;
  bool ok = false;
};

struct InductionLedger {
  int n_max = 0;
  double M = 0;
  double M_min = 0;
  double C0 = 1.3, C1 = 1.0 / 3;
  double C0_required = 0;  // 14s/(222s - 198 u0) at u0 = 1.0601 s
  std::vector<double> a;   // a[n], n >= 0
  std::vector<double> C;   // C[n], n >= 0 (C[0], C[1] from the base steps)
  std::vector<CoefficientCheck> checks;
  std::vector<double> budget_claimed;  // per piece I_k, using the rounded claims
  std::vector<double> budget_exact;    // per piece I_k, using evaluated coefficients
  bool ok = false;
};

inline InductionLedger induction_ledger(int n_max = 21, double M = 4.0 / 3,
                                        double rho_star = 4.64) {
  if (n_max < 3) throw ParamError("induction_ledger: n_max must be >= 3");
  if (M < 4.0 / 3) throw ParamError("induction_ledger: M must be >= 4/3");
  InductionLedger L;
  L.n_max = n_max;
  L.M = M;
  L.M_min = 40.0 / 39.0 * L.C0;
  L.C0_required = 14.0 / (222.0 - 198.0 * 1.0601);
  const int top = n_max + 3;
  L.a.resize(top + 1);
  L.C.resize(top + 1);
  for (int n = 0; n <= top; ++n) L.a[n] = (1.0 / 15.0) * std::pow(2.0, -n);
  L.C[0] = L.C0;
  L.C[1] = L.C1;
  for (int n = 2; n <= top; ++n)
    L.C[n] = (n % 2 == 0) ? L.a[n - 1] + 1.5 + 1.0 / (2.0 * L.a[n - 1]) : L.a[n - 1];

  auto add = [&L](std::string nm, int i, double v, double claim) {
    L.checks.push_back({std::move(nm), i, v, claim, v < claim});
  };
  // base steps
  add("step0_key0", 0, 7.0 / 24.0 / lambda_bar(0), 0.83);
  add("step0_tail", 0, 20.0 * L.C0 * 0.001, 0.026 + 1e-12);
  add("step1_J1", 1, 0.178 * L.C1, 0.06);
  add("step1_key1", 1, (1.0 / 30.0) / lambda_bar(1), 0.01);
  add("C1_equation", 1, std::abs(L.C1 / (12 * L.C1 + 1) - 1.0 / 15), 1e-15);
  add("C0_requirement", 0, L.C0_required, L.C0 + 1e-15);
  add("M_requirement", 0, L.M_min, M + 1e-15);
  add("a1", 1, std::abs(L.a[1] - 1.0 / 30.0), 1e-17);

  // Step 2 for odd i
  std::map<int, double> c63, cJ, cdec, cinc;
  for (int i = 1; i <= n_max; i += 2) {
    double x1 = 0.81 * std::pow(rho_star, -(i + 1)) * L.C[i + 1];
    double x2 = 0.82 * std::pow(rho_star, -(i + 2)) * L.C[i + 2];
    double x3 = 0.5 * (0.5 + L.a[i + 1]) / 1.94 * std::pow(rho_star, -(i + 1));
    double x4 = 0.5 * L.a[i + 2] * 0.51 * std::pow(rho_star, -(i + 2));
    add("step2_J_even", i, x1, 0.63);
    add("step2_J_odd", i, x2, 0.01);
    add("step2_key_even", i, x3, 0.01);
    add("step2_key_odd", i, x4, 0.01);
    c63[i] = x1;
    cJ[i] = x2;
    cdec[i] = x3;
    cinc[i] = x4;
  }

  // Per-piece budget. Pieces I_k = (xi_k, xi_{k-1}), I_0 = (xi_0, inf).
  // J_j = (xi_j, xi^j) with xi^j in I_{j-1}, so J_j meets I_j and I_{j-1}.
  const int pieces = n_max + 3;
  L.budget_claimed.assign(pieces, 0.0);
  L.budget_exact.assign(pieces, 0.0);
  auto put = [&](int k, double claimed, double exact) {
    if (k >= 0 && k < pieces) {
      L.budget_claimed[k] += claimed;
      L.budget_exact[k] += exact;
    }
  };
  put(0, 0.83, 7.0 / 24.0 / lambda_bar(0));
  for (int k = 1; k < pieces; ++k) put(k, 0.026, 20.0 * L.C0 * 0.001);  // (-inf, xi_s)
  put(1, 0.06, 0.178 * L.C1);                                            // J_1
  put(0, 0.06, 0.178 * L.C1);
  put(1, 0.01, (1.0 / 30.0) / lambda_bar(1));
  for (int i = 1; i <= n_max; i += 2) {
    put(i + 1, 0.63, c63[i]);  // J_{i+1}
    put(i, 0.63, c63[i]);
    put(i + 2, 0.01, cJ[i]);   // J_{i+2}
    put(i + 1, 0.01, cJ[i]);
    put(i + 1, 0.01, cdec[i]);
    put(i + 2, 0.01, cinc[i]);
  }
  // the last pieces only see part of the recursion; report the full ones
  L.budget_claimed.resize(n_max + 1);
  L.budget_exact.resize(n_max + 1);
  bool ok = true;
  for (const auto& c : L.checks) ok = ok && c.ok;
  for (double b : L.budget_claimed) ok = ok && b < 0.9;
  for (double b : L.budget_exact) ok = ok && b < 0.9;
  L.ok = ok;
  return L;
}

// --------------------------------------------------------- KV inequality

struct KvResult {
  double lhs = 0, rhs = 0, slack = 0, scale = 0;
  bool ok = false;
};

inline KvResult kv_inequality_check(const std::function<double(double)>& f,
                                    const std::function<double(double)>& df, double a,
                                    double b, double margin_tol = 1e-10) {
  KvResult r;
  auto q1 = quad_composite([&](double y) { double v = f(y); return v * v; }, a, b, 1e-14);
  auto q2 = quad_composite(
      [&](double y) { double d = df(y); return (y - a) * (b - y) * d * d; }, a, b, 1e-14);
  auto q3 = quad_composite(f, a, b, 1e-14);
  r.lhs = q1.value;
  r.rhs = 0.5 * q2.value + q3.value * q3.value / (b - a);
  r.slack = r.rhs - r.lhs;
  r.scale = std::max({std::abs(r.lhs), std::abs(r.rhs), 1e-300});
  r.ok = r.slack >= -margin_tol * r.scale;
  return r;
}

// Sampled variant on a uniform grid (trapezoid rule, centered derivative).
inline KvResult kv_inequality_check(const std::vector<double>& fs, double a, double b,
                                    double margin_tol = 1e-7) {
  KvResult r;
  const std::size_t n = fs.size();
  if (n < 3) throw ParamError("kv_inequality_check: need at least 3 samples");
  const double h = (b - a) / static_cast<double>(n - 1);
  std::vector<double> f2(n), w(n), df(n);
  for (std::size_t j = 0; j < n; ++j) {
    double y = a + h * static_cast<double>(j);
    double d = (j == 0) ? (fs[1] - fs[0]) / h
               : (j + 1 == n) ? (fs[n - 1] - fs[n - 2]) / h
                              : (fs[j + 1] - fs[j - 1]) / (2 * h);
    f2[j] = fs[j] * fs[j];
    w[j] = (y - a) * (b - y) * d * d;
  }
  double I = quad_trapezoid_uniform(fs, h);
  r.lhs = quad_trapezoid_uniform(f2, h);
  r.rhs = 0.5 * quad_trapezoid_uniform(w, h) + I * I / (b - a);
  r.slack = r.rhs - r.lhs;
  r.scale = std::max({std::abs(r.lhs), std::abs(r.rhs), 1e-300});
  r.ok = r.slack >= -margin_tol * r.scale;
  return r;
}

// ------------------------------------------------------------ full bundle

struct VerifyBundle {
  ShockParams params;
  double A = 0.5;
  double u0 = 0;
  double u0_bound = 0;
  bool u0_ok = false;
  std::vector<InequalityCertificate> certs;
  DecayReport decay;
  bool decay_ok = false;
  L2Report l2;
  bool all_pass() const {
    if (!u0_ok || !decay_ok) return false;
    for (const auto& c : certs)
      if (c.counts_as_failure()) return false;
    for (const auto& v : l2.intervals)
      if (v.status == CertStatus::fail) return false;
    return l2.left_tail_status != CertStatus::fail;
  }
};

inline VerifyBundle verify_profile(const Profile& p, double A, const VerifyOptions& o = {},
                                   double k_dec = 11.0 / 12.0) {
  VerifyBundle b;
  b.params = p.params;
  b.A = A;
  const double s = p.s();
  if (p.n_resolved >= 1) {
    b.u0 = p.extrema[0].u;
    b.u0_bound = s + u0_closed_bound(A, s);
    b.u0_ok = b.u0 <= b.u0_bound + o.margin_tol * s;
  } else {
    b.u0_ok = true;
  }
  b.certs.push_back(check_rm_envelope(p, A, o));
  for (int i = 1; i < std::max(p.n_resolved, 2); i += 2) b.certs.push_back(check_inc_envelope(p, i, A, o));
  for (int i = 2; i < p.n_resolved; i += 2) b.certs.push_back(check_dec_envelope(p, i, k_dec, A, o));
  if (p.params.kappa() < 0.5 && std::abs(A - 0.5) < 1e-12) {
    auto par = check_parabola_envelopes(p, o);
    b.certs.insert(b.certs.end(), par.begin(), par.end());
  }
  b.decay = decay_report(p, A);
  b.decay_ok = b.decay.dominated(o.margin_tol);
  if (std::abs(A - 0.5) < 1e-12) b.l2 = l2_interval_bounds(p);
  return b;
}

}  // namespace shocklab
