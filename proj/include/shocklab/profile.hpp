// Viscous-dispersive shock profile of the KdV-Burgers equation as the
// heteroclinic orbit of u' - delta u'' = (u^2 - s^2)/2 (normalized frame).
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "shocklab/numerics.hpp"

namespace shocklab {

class ParamError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ShockParams {
  double eps = 1.0;
  double delta = 0.45;
  double u_minus = 1.0;
  double u_plus = -1.0;
  double A = 0.5;

  double sigma() const { return 0.5 * (u_minus + u_plus); }
  double s() const { return 0.5 * (u_minus - u_plus); }
  double kappa() const { return delta * (u_minus - u_plus) / (2.0 * eps * eps); }
  bool oscillatory() const { return kappa() > 0.25; }
  bool contraction_regime() const { return kappa() > 0.25 && kappa() < 0.5; }
  bool normalized() const { return eps == 1.0 && sigma() == 0.0; }

  void validate() const {
    if (!(eps > 0)) throw ParamError("eps must be positive");
    if (!(delta > 0)) throw ParamError("delta must be positive");
    if (!(u_minus > u_plus)) throw ParamError("u_minus must exceed u_plus");
  }
  void validate_ceiling() const {
    if (!(kappa() < A && A <= 1.0))
      throw ParamError("analysis ceiling requires kappa < A <= 1 (kappa=" +
                       std::to_string(kappa()) + ", A=" + std::to_string(A) + ")");
  }
};

// Affine maps between a physical frame and the normalized one.
// Physical (t, x, u) -> normalized: y = r x, v = r u (r = -1 if reflected),
// xi = (y - sigma t)/eps, w = v - sigma.
struct FrameMap {
  double sigma = 0;  // speed after reflection
  double eps = 1;
  bool reflected = false;

  double refl() const { return reflected ? -1.0 : 1.0; }
  double xi_of(double t, double x) const { return (refl() * x - sigma * t) / eps; }
  double x_of(double t, double xi) const { return refl() * (eps * xi + sigma * t); }
  double un_of(double u) const { return refl() * u - sigma; }
  double u_of(double un) const { return refl() * (un + sigma); }
  // du/dx in the physical frame from the normalized derivative dv/dxi
  double dudx_of(double dun) const { return dun / eps; }
};

struct Normalized {
  ShockParams params;
  FrameMap map;
};

inline Normalized normalize(ShockParams raw) {
  Normalized out;
  if (raw.delta < 0) {
    // x -> -x, u -> -u, delta -> -delta
    double um = -raw.u_plus, up = -raw.u_minus;
    raw.u_minus = um;
    raw.u_plus = up;
    raw.delta = -raw.delta;
    out.map.reflected = true;
  }
  raw.validate();
  out.map.sigma = raw.sigma();
  out.map.eps = raw.eps;
  ShockParams n = raw;
  n.eps = 1.0;
  n.delta = raw.delta / (raw.eps * raw.eps);
  n.u_minus = raw.s();
  n.u_plus = -raw.s();
  out.params = n;
  return out;
}

struct EquilibriumEigen {
  double saddle_stable = 0, saddle_unstable = 0;  // at u_plus = -s
  std::complex<double> focus_plus, focus_minus;   // at u_minus = s
  double L = 0;                                    // -2s/(1+sqrt(1+4 delta s))
  double focus_discriminant = 0;                   // 1 - 4 delta s (normalized)
  bool focus_complex = false;
};

inline EquilibriumEigen equilibrium_eigen(const ShockParams& p) {
  const double d = p.delta, s = p.s(), e = p.eps;
  EquilibriumEigen r;
  double root = std::sqrt(e * e + 2.0 * d * (p.u_minus - p.u_plus));
  r.saddle_unstable = (e + root) / (2.0 * d);
  r.saddle_stable = (e - root) / (2.0 * d);
  r.focus_discriminant = e * e - 2.0 * d * (p.u_minus - p.u_plus);
  std::complex<double> sq = std::sqrt(std::complex<double>(r.focus_discriminant, 0.0));
  r.focus_plus = (e + sq) / (2.0 * d);
  r.focus_minus = (e - sq) / (2.0 * d);
  r.focus_complex = r.focus_discriminant < 0;
  r.L = -2.0 * s / (e + std::sqrt(e * e + 4.0 * d * s));
  return r;
}

struct DecayRatio {
  double printed = 0;  // exp(-pi/(2 delta sqrt(kappa - 1/4))), the form with the extra delta
  double eigen = 0;    // exp(Re(lambda) * pi / Im(lambda)) from the focus pair
};

inline DecayRatio linearized_decay_ratio(const ShockParams& p) {
  const double k = p.kappa();
  if (!(k > 0.25)) throw ParamError("linearized_decay_ratio: kappa <= 1/4 (no oscillation)");
  const double pi = std::acos(-1.0);
  DecayRatio r;
  r.printed = std::exp(-pi / (2.0 * p.delta * std::sqrt(k - 0.25)));
  auto ev = equilibrium_eigen(p);
  r.eigen = std::exp(-std::abs(ev.focus_plus.real()) * pi / std::abs(ev.focus_plus.imag()));
  return r;
}

struct Extremum {
  int i = 0;
  double xi = 0;
  double u = 0;
  bool is_max = false;
  const char* kind() const { return is_max ? "max" : "min"; }
};

struct MarkerSet {
  int i = 0;
  double xi_sup = 0;       // xi^i in (xi_{i-1}, xi_{i-2}) with u = u_i
  double xi_star = 0;      // in (xi_i, xi_{i-1}) with u = (u_i + u_{i-1})/2
  double xi_starstar = 0;  // in (xi_{i-1}, xi^i) with u = (u_i + u_{i-1})/2
};

struct IntervalMarkers {
  std::optional<double> xi_s;  // u = s on (xi_1, xi_0)
  std::vector<MarkerSet> per_i;
};

struct ProfileOptions {
  ToleranceSet tol{1e-15, 1e-12, 1e-13, 1e-7};
  double eta_rel = 1e-8;         // seed offset from u_plus, relative to s
  int max_extrema = 12;
  double resolve_floor = 1e-12;  // |u_i - s| below this (relative to s) is unresolved
  double tail_stop = 1e-13;      // |v| + |v'| below this (relative to s) ends integration
  double max_span = 1e5;
};

class ProfileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense heteroclinic orbit. Internally the state is (v, v') with v = u - s.
class Profile {
 public:
  struct Point {
    double u, du;
  };

  ShockParams params;  // normalized
  ProfileOptions options;
  std::vector<double> xi, u, du, energy;
  std::vector<Extremum> extrema;  // all detected, right to left
  int n_resolved = 0;             // leading extrema with |u_i - s| >= floor
  IntervalMarkers markers;

  double xi_right = 0;  // seed abscissa (integration start)
  double xi_left = 0;   // integration end
  double eta = 0;
  double lambda_s = 0;
  bool tail_linear = true;

  double s() const { return params.s(); }
  double delta() const { return params.delta; }

  Point eval(double x) const {
    const double s = this->s();
    if (x >= xi_right) {
      double e = eta * std::exp(lambda_s * (x - xi_right));
      return {-s + e, lambda_s * e};
    }
    if (x <= xi_left) {
      double t = x - xi_left;
      std::complex<double> e1 = c1_ * std::exp(l1_ * t), e2 = c2_ * std::exp(l2_ * t);
      if (degenerate_) {
        // v = (c1 + c2 t) e^{l1 t}
        std::complex<double> g = std::exp(l1_ * t);
        std::complex<double> v = (c1_ + c2_ * t) * g;
        std::complex<double> dv = (c2_ + l1_ * (c1_ + c2_ * t)) * g;
        return {s + v.real(), dv.real()};
      }
      return {s + (e1 + e2).real(), (l1_ * e1 + l2_ * e2).real()};
    }
    auto y = traj_(x + xi_zero_);
    return {s + y[0], y[1]};
  }
  // Evaluation at increasing abscissae, walking the step list once.
  void eval_sorted(const double* x, std::size_t n, double* uo, double* duo) const {
    const auto& st = traj_.steps();
    std::size_t k = st.size();  // current step index, valid when < size
    for (std::size_t j = 0; j < n; ++j) {
      double xj = x[j];
      if (xj >= xi_right || xj <= xi_left) {
        auto q = eval(xj);
        uo[j] = q.u;
        duo[j] = q.du;
        continue;
      }
      double xr = xj + xi_zero_;
      if (k >= st.size()) k = traj_.locate(xr);
      // steps run toward decreasing raw abscissa; step k covers [t0 + h, t0]
      while (k > 0 && xr > st[k].t0) --k;
      while (k + 1 < st.size() && xr < st[k].t1()) ++k;
      auto y = st[k].eval(xr);
      uo[j] = s() + y[0];
      duo[j] = y[1];
    }
  }
  double u_at(double x) const { return eval(x).u; }
  double du_at(double x) const { return eval(x).du; }
  double d2u_at(double x) const {
    auto p = eval(x);
    const double s = this->s();
    return (p.du - 0.5 * (p.u * p.u - s * s)) / params.delta;
  }
  // u - s without cancellation inside the integrated range
  double v_at(double x) const {
    if (x >= xi_right || x <= xi_left) return eval(x).u - s();
    return traj_(x + xi_zero_)[0];
  }
  double energy_at(double x) const {
    auto p = eval(x);
    return energy_of(p.u, p.du);
  }
  double energy_of(double uu, double duu) const {
    const double s = this->s();
    return (uu + s) * (uu + s) * (uu - 2 * s) / 6.0 + 0.5 * params.delta * duu * duu;
  }

  // Residual u' - delta u'' - (u^2 - s^2)/2 with u'' from differentiating the
  // dense interpolant of u'.
  double ode_residual(double x) const {
    if (x >= xi_right || x <= xi_left) return 0.0;
    double xr = x + xi_zero_;
    const auto& st = traj_.step(traj_.locate(xr));
    auto y = st.eval(xr);
    double dp = dense_derivative(st, xr, 1);
    double uu = s() + y[0];
    return y[1] - params.delta * dp - 0.5 * (y[0] * (uu + s()));
  }

  // Exact integral of (u - s)^2 over (-inf, xi_left) from the linear focus tail.
  double left_tail_l2() const {
    if (degenerate_) {
      // v = (c1 + c2 t) e^{l t}, t <= 0; l real
      double l = l1_.real(), a = c1_.real(), b = c2_.real();
      // int_{-inf}^0 (a + b t)^2 e^{2 l t} dt
      return a * a / (2 * l) - 2 * a * b / (4 * l * l) + 2 * b * b / (8 * l * l * l);
    }
    std::complex<double> r = c1_ * c1_ / (2.0 * l1_) + 2.0 * c1_ * c2_ / (l1_ + l2_) +
                             c2_ * c2_ / (2.0 * l2_);
    return r.real();
  }
  // Exact integral of (u + s)^2 over (xi_right, inf).
  double right_tail_l2() const { return eta * eta / (-2.0 * lambda_s); }

  const DenseTrajectory<2>& trajectory() const { return traj_; }
  double xi_zero() const { return xi_zero_; }

  // Abscissae where the stored trajectory has step endpoints inside (a, b).
  std::vector<double> knots(double a, double b) const {
    std::vector<double> k;
    for (const auto& st : traj_.steps()) {
      double x = st.t0 - xi_zero_;
      if (x > a && x < b) k.push_back(x);
    }
    std::sort(k.begin(), k.end());
    return k;
  }

  static double dense_derivative(const DenseStep<2>& st, double t, std::size_t c) {
    double th = (t - st.t0) / st.h;
    const auto& r = st.r;
    double A = r[3][c] + (1 - th) * r[4][c], dA = -r[4][c];
    double B = r[2][c] + th * A, dB = A + th * dA;
    double C = r[1][c] + (1 - th) * B, dC = -B + (1 - th) * dB;
    return (C + th * dC) / st.h;
  }

 private:
  friend Profile compute_profile(const ShockParams&, const ProfileOptions&);
  DenseTrajectory<2> traj_;
  double xi_zero_ = 0;  // raw abscissa of the origin
  std::complex<double> l1_, l2_, c1_, c2_;
  bool degenerate_ = false;
};

inline std::vector<Extremum> detect_extrema(const Profile& p) { return p.extrema; }

namespace detail {

inline void fit_left_tail(const ShockParams& P, double vL, double pL, std::complex<double>& l1,
                          std::complex<double>& l2, std::complex<double>& c1,
                          std::complex<double>& c2, bool& degenerate) {
  auto ev = equilibrium_eigen(P);
  l1 = ev.focus_plus;
  l2 = ev.focus_minus;
  double gap = std::abs(l1 - l2);
  if (gap < 1e-7 * std::abs(l1)) {
    degenerate = true;
    l1 = l2 = 0.5 * (l1 + l2);
    c1 = vL;
    c2 = pL - l1 * vL;
    return;
  }
  degenerate = false;
  // c1 + c2 = vL, l1 c1 + l2 c2 = pL
  c1 = (pL - l2 * vL) / (l1 - l2);
  c2 = vL - c1;
}

}  // namespace detail

inline Profile compute_profile(const ShockParams& params, const ProfileOptions& opt = {}) {
  params.validate();
  if (!params.normalized())
    throw ParamError("compute_profile expects normalized parameters (eps=1, sigma=0)");
  opt.tol.validate();
  const double s = params.s(), d = params.delta;
  Profile P;
  P.params = params;
  P.options = opt;
  auto ev = equilibrium_eigen(params);
  P.lambda_s = ev.saddle_stable;
  P.eta = opt.eta_rel * s;

  Rhs<2> rhs = [s, d](double, const State<2>& y) -> State<2> {
    return {y[1], (y[1] - 0.5 * y[0] * (y[0] + 2.0 * s)) / d};
  };
  State<2> y0{-2.0 * s + P.eta, P.lambda_s * P.eta};

  const int budget = opt.max_extrema;
  const double stop_amp = opt.tail_stop * s;
  StopFn<2> stop = [&](const OdeResult<2>& r) {
    if (static_cast<int>(r.hits.size()) >= budget + 1) return true;
    if (!r.hits.empty() && std::abs(r.y_end[0]) + std::abs(r.y_end[1]) < stop_amp) return true;
    if (!params.oscillatory() && std::abs(r.y_end[0]) + std::abs(r.y_end[1]) < stop_amp)
      return true;
    return false;
  };
  OdeResult<2> res;
  try {
    res = integrate_ode<2>(rhs, y0, {0.0, -opt.max_span}, opt.tol,
                           {ComponentEvent{1, 0.0, 0}}, stop);
  } catch (const NumericsError& e) {
    throw ProfileError(std::string("profile integration failed: ") + e.what());
  }
  if (!res.stopped_early) {
    std::ostringstream os;
    os << "profile did not converge to u_minus within span; last state v=" << res.y_end[0]
       << " v'=" << res.y_end[1] << " at xi=" << res.t_end;
    throw ProfileError(os.str());
  }
  // Keep extrema up to the budget; end the stored trajectory at the last
  // accepted step.
  std::vector<EventHit> hits = res.hits;
  if (static_cast<int>(hits.size()) > budget) hits.resize(budget);

  P.traj_ = std::move(res.traj);

  // origin: u = 0 (v = -s) on the rightmost monotone piece
  double first_stop = hits.empty() ? P.traj_.t_end() : hits.front().t;
  auto vf = [&](double x) { return P.traj_(x)[0] + s; };
  double zero_raw;
  try {
    zero_raw = find_root(vf, first_stop, 0.0, opt.tol.event_tol);
  } catch (const NumericsError&) {
    throw ProfileError("profile: no midpoint crossing on the rightmost monotone piece");
  }
  P.xi_zero_ = zero_raw;
  P.xi_right = 0.0 - zero_raw;
  P.xi_left = P.traj_.t_end() - zero_raw;

  // extrema, merging near-duplicate hits
  std::vector<double> hx;
  for (const auto& h : hits) {
    if (!hx.empty() && std::abs(h.t - hx.back()) < 1e3 * opt.tol.event_tol) continue;
    hx.push_back(h.t);
  }
  for (std::size_t k = 0; k < hx.size(); ++k) {
    Extremum e;
    e.i = static_cast<int>(k);
    e.xi = hx[k] - zero_raw;
    e.u = s + P.traj_(hx[k])[0];
    e.is_max = (k % 2 == 0);
    P.extrema.push_back(e);
  }
  P.n_resolved = 0;
  for (const auto& e : P.extrema) {
    if (std::abs(P.traj_(e.xi + zero_raw)[0]) < opt.resolve_floor * s) break;
    ++P.n_resolved;
  }

  auto yl = P.traj_(P.traj_.t_end());
  detail::fit_left_tail(params, yl[0], yl[1], P.l1_, P.l2_, P.c1_, P.c2_, P.degenerate_);
  P.tail_linear = std::abs(yl[0]) + std::abs(yl[1]) < 1e-6 * s;

  // samples, increasing xi: four per step
  const auto& steps = P.traj_.steps();
  for (std::size_t k = steps.size(); k-- > 0;) {
    const auto& st = steps[k];
    for (int q = 4; q >= 1; --q) {
      double xr = st.t0 + st.h * (q / 4.0);
      if (q == 4 && k + 1 < steps.size()) continue;  // shared with next step start
      auto y = st.eval(xr);
      double uu = s + y[0];
      P.xi.push_back(xr - zero_raw);
      P.u.push_back(uu);
      P.du.push_back(y[1]);
      P.energy.push_back(P.energy_of(uu, y[1]));
    }
    (void)0;
  }
  {
    auto y = steps.front().eval(steps.front().t0);
    P.xi.push_back(0.0 - zero_raw);
    P.u.push_back(s + y[0]);
    P.du.push_back(y[1]);
    P.energy.push_back(P.energy_of(s + y[0], y[1]));
  }
  return P;
}

inline IntervalMarkers locate_markers(const Profile& p, int upto = -1) {
  IntervalMarkers m;
  const auto& ex = p.extrema;
  const double tol = p.options.tol.event_tol;
  int n = upto < 0 ? p.n_resolved : std::min(upto, p.n_resolved);
  auto ufun = [&p](double level) {
    return [&p, level](double x) { return p.v_at(x) + p.s() - level; };
  };
  if (n >= 2) {
    try {
      m.xi_s = find_root(ufun(p.s()), ex[1].xi, ex[0].xi, tol);
    } catch (const NumericsError&) {
    }
  }
  for (int i = 1; i < n; ++i) {
    MarkerSet ms;
    ms.i = i;
    double right = (i == 1) ? p.xi_right : ex[i - 2].xi;
    double left = ex[i - 1].xi;
    try {
      ms.xi_sup = find_root(ufun(ex[i].u), left, right, tol);
      double mid = 0.5 * (ex[i].u + ex[i - 1].u);
      ms.xi_star = find_root(ufun(mid), ex[i].xi, ex[i - 1].xi, tol);
      ms.xi_starstar = find_root(ufun(mid), ex[i - 1].xi, ms.xi_sup, tol);
    } catch (const NumericsError&) {
      break;  // bracket missing: truncate
    }
    m.per_i.push_back(ms);
  }
  return m;
}

inline double effective_energy(const Profile& p, double xi) { return p.energy_at(xi); }

// Convenience: normalized params, profile and markers in one call.
inline Profile build_profile(const ShockParams& normalized, const ProfileOptions& opt = {}) {
  Profile p = compute_profile(normalized, opt);
  p.markers = locate_markers(p);
  return p;
}

inline ShockParams normalized_params(double delta, double s = 1.0, double A = 0.5) {
  ShockParams p;
  p.eps = 1.0;
  p.delta = delta;
  p.u_minus = s;
  p.u_plus = -s;
  p.A = A;
  return p;
}

}  // namespace shocklab
