// KdV-Burgers initial-value solver on a truncated line with the co-evolving
// shift X(t), the contraction functional and the energy-identity monitor.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "shocklab/numerics.hpp"
#include "shocklab/profile.hpp"

namespace shocklab {

class SimConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Perturbation {
  enum class Kind { none, gaussian, shifted_profile, random_fourier };
  Kind kind = Kind::none;
  double amplitude = 0.3;
  double width = 2.0;
  double center = 0.0;
  double h = 1.0;  // shifted-profile offset
  std::uint64_t seed = 1;
  int modes = 6;

  static Perturbation none() { return {}; }
  static Perturbation gaussian(double a, double w, double c) {
    Perturbation p;
    p.kind = Kind::gaussian;
    p.amplitude = a;
    p.width = w;
    p.center = c;
    return p;
  }
  static Perturbation shifted(double h) {
    Perturbation p;
    p.kind = Kind::shifted_profile;
    p.h = h;
    return p;
  }
  static Perturbation random_fourier(std::uint64_t seed, int modes, double amplitude) {
    Perturbation p;
    p.kind = Kind::random_fourier;
    p.seed = seed;
    p.modes = modes;
    p.amplitude = amplitude;
    return p;
  }
};

inline const char* to_string(Perturbation::Kind k) {
  switch (k) {
    case Perturbation::Kind::none: return "none";
    case Perturbation::Kind::gaussian: return "gaussian";
    case Perturbation::Kind::shifted_profile: return "shifted-profile";
    case Perturbation::Kind::random_fourier: return "random-fourier";
  }
  return "?";
}

struct SimConfig {
  ShockParams params;  // physical (eps, delta, u_minus, u_plus) before scaling by nu
  double L_dom = 150.0;
  double center = 0.0;
  int N = 4096;  // number of cells; nodes = N + 1
  double dt = 0.02;
  double T = 50.0;
  double M = 4.0 / 3.0;
  Perturbation perturbation;
  int order = 2;
  double nu = 1.0;  // diffusion nu*eps, dispersion nu^2*delta, data u0(x/nu)
  int output_every = 0;    // steps between trace rows (0: about 500 rows)
  int snapshot_every = 0;  // steps between stored fields (0: none)
  double boundary_tol = 1e-6;
  double cfl_max = 0.5;
  double lyapunov_band_C = 1.0;
  bool check_resolution = true;
  bool check_domain = true;
};

struct SimState {
  double t = 0;
  std::vector<double> u;
  double X = 0;
  double Xdot = 0;
};

struct TraceRow {
  double t, l2w2, shift_term_cum, dissipation_cum, lyapunov_total, X, Xdot, key1_residual;
};

// Per-step diagnostics (index n is the state after n steps).
struct StepSeries {
  std::vector<double> t, l2, X, Xdot, I1, I2, Dw, key1_rhs, shift_cum, diss_cum,
      lyap, lyap_proof, linf_w;
};

struct Snapshot {
  int step = 0;
  double t = 0;
  double X = 0;
  std::vector<double> u;
};

struct MonotonicityVerdict {
  double max_violation = 0;        // max rise above the running minimum
  double max_violation_proof = 0;  // same with shift coefficient (u_- - u_+)/(2M) and eps/5
  double band = 0;
  double initial = 0;
  double xdot_last_quarter_max = 0, xdot_running_max = 0, xdot_final = 0;
  double key1_max_abs = 0;
  bool pass = false;
};

struct RunResult {
  SimState final_state;
  std::vector<TraceRow> trace;
  StepSeries series;
  std::vector<Snapshot> snapshots;
  MonotonicityVerdict verdict;
  double dx = 0;
  double dt = 0;
  double nu = 1;
  int steps = 0;
};

// Running-minimum rise of a sequence.
inline double max_rise(const std::vector<double>& v) {
  double mn = std::numeric_limits<double>::infinity(), worst = 0;
  for (double x : v) {
    mn = std::min(mn, x);
    worst = std::max(worst, x - mn);
  }
  return worst;
}

// Shift rate -(2M/(u_- - u_+)) * trapezoid(w * ub') on a uniform grid.
inline double shift_rate(const std::vector<double>& w, const std::vector<double>& dub, double dx,
                         double M, double u_minus, double u_plus) {
  if (w.size() != dub.size()) throw std::invalid_argument("shift_rate: size mismatch");
  double I = 0;
  for (std::size_t j = 0; j < w.size(); ++j)
    I += ((j == 0 || j + 1 == w.size()) ? 0.5 : 1.0) * w[j] * dub[j];
  return -(2.0 * M / (u_minus - u_plus)) * I * dx;
}

namespace detail {

// Stencil coefficients for d2 and d3 (central, order 2 or 4).
struct Stencils {
  int half = 2;
  double d1[7]{}, d2[7]{}, d3[7]{};  // offsets -3..3

  explicit Stencils(int order) {
    if (order == 2) {
      half = 2;
      d1[2] = -0.5; d1[4] = 0.5;
      d2[2] = 1; d2[3] = -2; d2[4] = 1;
      d3[1] = -0.5; d3[2] = 1; d3[4] = -1; d3[5] = 0.5;
    } else if (order == 4) {
      half = 3;
      d1[1] = 1.0 / 12; d1[2] = -8.0 / 12; d1[4] = 8.0 / 12; d1[5] = -1.0 / 12;
      d2[1] = -1.0 / 12; d2[2] = 16.0 / 12; d2[3] = -30.0 / 12; d2[4] = 16.0 / 12; d2[5] = -1.0 / 12;
      d3[0] = 1.0 / 8; d3[1] = -1; d3[2] = 13.0 / 8; d3[4] = -13.0 / 8; d3[5] = 1; d3[6] = -1.0 / 8;
    } else {
      throw SimConfigError("spatial order must be 2 or 4");
    }
  }
};

}  // namespace detail

// Linear operator eps*u_xx - delta*u_xxx and flux term -(u^2/2)_x on a
// uniform grid, either with pinned boundary nodes or periodic.
class KdvbOperators {
 public:
  KdvbOperators(int order, double dx, double eps, double delta, bool periodic)
      : st_(order), dx_(dx), eps_(eps), delta_(delta), periodic_(periodic) {
    for (int k = 0; k < 7; ++k)
      lin_[k] = eps_ * st_.d2[k] / (dx_ * dx_) - delta_ * st_.d3[k] / (dx_ * dx_ * dx_);
  }
  int pinned() const { return periodic_ ? 0 : st_.half; }
  double lin_coef(int off) const { return lin_[off + 3]; }
  double dx() const { return dx_; }

  // out = L u on active nodes, 0 on pinned
  void apply_linear(const std::vector<double>& u, std::vector<double>& out) const {
    apply(u, out, lin_);
  }
  // out = -(u^2/2)_x on active nodes
  void apply_flux(const std::vector<double>& u, std::vector<double>& out) const {
    const std::size_t n = u.size();
    f_.resize(n);
    for (std::size_t j = 0; j < n; ++j) f_[j] = 0.5 * u[j] * u[j];
    double c[7];
    for (int k = 0; k < 7; ++k) c[k] = -st_.d1[k] / dx_;
    apply(f_, out, c);
  }

 private:
  void apply(const std::vector<double>& u, std::vector<double>& out, const double* c) const {
    const long n = static_cast<long>(u.size());
    out.assign(u.size(), 0.0);
    if (periodic_) {
      for (long j = 0; j < n; ++j) {
        double s = 0;
        for (int k = -3; k <= 3; ++k)
          if (c[k + 3] != 0) s += c[k + 3] * u[((j + k) % n + n) % n];
        out[j] = s;
      }
      return;
    }
    const long p = st_.half;
    for (long j = p; j < n - p; ++j) {
      double s = 0;
      for (int k = -3; k <= 3; ++k)
        if (c[k + 3] != 0) s += c[k + 3] * u[j + k];
      out[j] = s;
    }
  }

  detail::Stencils st_;
  double dx_, eps_, delta_;
  bool periodic_;
  double lin_[7]{};
  mutable std::vector<double> f_;
};

// Periodic harness (dense solve) used to exercise the time stepper in
// isolation: Crank-Nicolson on the linear part, Heun on the flux.
class PeriodicHarness {
 public:
  PeriodicHarness(int n, double length, double eps, double delta, double dt, bool flux,
                  int order = 2)
      : n_(n), dx_(length / n), dt_(dt), flux_(flux),
        ops_(order, length / n, eps, delta, true) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    for (int j = 0; j < n; ++j)
      for (int k = -3; k <= 3; ++k) {
        double c = ops_.lin_coef(k);
        if (c != 0) A(j, ((j + k) % n + n) % n) -= 0.5 * dt * c;
      }
    lu_ = A.partialPivLu();
  }
  double dx() const { return dx_; }
  std::vector<double> step(const std::vector<double>& u) const {
    std::vector<double> Lu, Nu, Nus;
    ops_.apply_linear(u, Lu);
    if (flux_) ops_.apply_flux(u, Nu); else Nu.assign(u.size(), 0.0);
    Eigen::VectorXd b(n_);
    for (int j = 0; j < n_; ++j) b[j] = u[j] + 0.5 * dt_ * Lu[j] + dt_ * Nu[j];
    Eigen::VectorXd us = lu_.solve(b);
    std::vector<double> usv(us.data(), us.data() + n_);
    if (flux_) ops_.apply_flux(usv, Nus); else Nus.assign(u.size(), 0.0);
    for (int j = 0; j < n_; ++j) b[j] = u[j] + 0.5 * dt_ * Lu[j] + 0.5 * dt_ * (Nu[j] + Nus[j]);
    Eigen::VectorXd un = lu_.solve(b);
    return std::vector<double>(un.data(), un.data() + n_);
  }

 private:
  int n_;
  double dx_, dt_;
  bool flux_;
  KdvbOperators ops_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

// Solver for u_t + (u^2/2)_x = eps u_xx - delta u_xxx with pinned ends.
// The discrete travelling-wave residual of the shifted profile is subtracted,
// so for sigma = 0 every translate of the profile is an exact steady state.
class Simulation {
 public:
  Simulation(const SimConfig& cfg, const Profile& profile) : cfg_(cfg), prof_(profile) {
    setup();
  }

  const SimConfig& config() const { return cfg_; }
  double dx() const { return dx_; }
  double eps_eff() const { return eps_; }
  double delta_eff() const { return delta_; }
  double sigma() const { return sigma_; }
  double s() const { return s_; }
  std::size_t nodes() const { return x_.size(); }
  const std::vector<double>& x() const { return x_; }
  int pinned() const { return ops_.pinned(); }

  // Physical profile and derivative at x - sigma t - X for all nodes.
  void profile_at(double t, double X, std::vector<double>& ub, std::vector<double>& dub) const {
    const std::size_t n = x_.size();
    xi_buf_.resize(n);
    ub.resize(n);
    dub.resize(n);
    for (std::size_t j = 0; j < n; ++j) xi_buf_[j] = (x_[j] - sigma_ * t - X) / eps_;
    prof_.eval_sorted(xi_buf_.data(), n, ub.data(), dub.data());
    for (std::size_t j = 0; j < n; ++j) {
      ub[j] += sigma_;
      dub[j] /= eps_;
    }
  }

  double profile_value(double y) const { return sigma_ + prof_.u_at(y / eps_); }

  SimState init() const {
    SimState st;
    st.t = 0;
    st.X = 0;
    const std::size_t n = x_.size();
    std::vector<double> ub, dub;
    profile_at(0, 0, ub, dub);
    st.u = ub;
    const auto& p = cfg_.perturbation;
    const double nu = cfg_.nu;
    using K = Perturbation::Kind;
    if (p.kind == K::gaussian) {
      for (std::size_t j = 0; j < n; ++j) {
        double z = (x_[j] / nu - p.center) / p.width;
        st.u[j] += p.amplitude * std::exp(-z * z);
      }
    } else if (p.kind == K::shifted_profile) {
      std::vector<double> us, dus;
      profile_at(0, nu * p.h, us, dus);
      st.u = us;
    } else if (p.kind == K::random_fourier) {
      std::mt19937_64 rng(p.seed);
      std::uniform_real_distribution<double> U(-1.0, 1.0);
      std::vector<double> a(p.modes), b(p.modes);
      for (int k = 0; k < p.modes; ++k) {
        a[k] = U(rng);
        b[k] = U(rng);
      }
      for (std::size_t j = 0; j < n; ++j) {
        double y = x_[j] / nu;
        double sum = 0;
        for (int k = 0; k < p.modes; ++k)
          sum += (a[k] * std::cos((k + 1) * y / 2.0) + b[k] * std::sin((k + 1) * y / 2.0)) /
                 (k + 1);
        st.u[j] += p.amplitude * std::exp(-(y / 6.0) * (y / 6.0)) * sum;
      }
    }
    // pinned nodes carry the end states
    const int pn = ops_.pinned();
    for (int k = 0; k < pn; ++k) {
      double dl = st.u[k] - ul_, dr = st.u[n - 1 - k] - ur_;
      if (std::abs(dl) > 1e-8 * s_ || std::abs(dr) > 1e-8 * s_)
        throw SimConfigError("initial data violates boundary pinning");
      st.u[k] = ul_;
      st.u[n - 1 - k] = ur_;
    }
    double umax = 0;
    for (double v : st.u) umax = std::max(umax, std::abs(v));
    if (cfg_.dt * umax / dx_ > cfg_.cfl_max)
      throw SimConfigError("advective CFL violated: dt*max|u|/dx = " +
                           std::to_string(cfg_.dt * umax / dx_));
    Diag d = diagnostics(st.u, 0, 0);
    st.Xdot = d.Xdot;
    return st;
  }

  // One Heun / Crank-Nicolson step of (u, X).
  SimState step(const SimState& s0) const {
    const std::size_t n = x_.size();
    const double dt = cfg_.dt;
    Diag d0 = diagnostics(s0.u, s0.t, s0.X);
    std::vector<double> r0(n), rhs(n);
    rate_explicit(s0.u, d0, r0);  // N(u) + G
    ops_.apply_linear(s0.u, lu_buf_);
    for (std::size_t j = 0; j < n; ++j) rhs[j] = s0.u[j] + 0.5 * dt * lu_buf_[j] + dt * r0[j];
    pin(rhs);
    for (double v : rhs)
      if (!std::isfinite(v)) throw SimError("non-finite value at t=" + std::to_string(s0.t));
    std::vector<double> us = lu_.solve(rhs);
    double Xs = s0.X + dt * d0.Xdot;
    Diag ds = diagnostics(us, s0.t + dt, Xs);
    std::vector<double> rs(n);
    rate_explicit(us, ds, rs);
    for (std::size_t j = 0; j < n; ++j)
      rhs[j] = s0.u[j] + 0.5 * dt * lu_buf_[j] + 0.5 * dt * (r0[j] + rs[j]);
    pin(rhs);
    SimState s1;
    s1.u = lu_.solve(rhs);
    s1.t = s0.t + dt;
    s1.X = s0.X + 0.5 * dt * (d0.Xdot + ds.Xdot);
    for (double v : s1.u)
      if (!std::isfinite(v)) throw SimError("non-finite value at t=" + std::to_string(s1.t));
    return s1;
  }

  struct Diag {
    double l2 = 0, I1 = 0, I2 = 0, Dw = 0, Xdot = 0, linf = 0, w_left = 0, w_right = 0;
    std::vector<double> ub, dub;
  };

  // Diagnostics of w = u - profile(x - sigma t - X).
  Diag diagnostics(const std::vector<double>& u, double t, double X) const {
    Diag d;
    profile_at(t, X, d.ub, d.dub);
    const std::size_t n = u.size();
    w_buf_.resize(n);
    for (std::size_t j = 0; j < n; ++j) w_buf_[j] = u[j] - d.ub[j];
    // pinned nodes: w measured against the pinned end states is round-off
    double l2 = 0, I1 = 0, I2 = 0, Dw = 0, linf = 0;
    for (std::size_t j = 0; j < n; ++j) {
      double wt = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
      double w = w_buf_[j];
      l2 += wt * w * w;
      I1 += wt * w * d.dub[j];
      I2 += wt * w * w * d.dub[j];
      linf = std::max(linf, std::abs(w));
      if (j + 1 < n) {
        double g = w_buf_[j + 1] - w;
        Dw += g * g;
      }
    }
    d.l2 = l2 * dx_;
    d.I1 = I1 * dx_;
    d.I2 = I2 * dx_;
    d.Dw = Dw / dx_;
    d.linf = linf;
    d.Xdot = -(2.0 * cfg_.M / (ul_ - ur_)) * d.I1;
    const int pn = ops_.pinned();
    d.w_left = w_buf_[pn];
    d.w_right = w_buf_[n - 1 - pn];
    return d;
  }

  using Observer = std::function<void(int step, const SimState&)>;

  RunResult run(const Observer& observer = {}) const {
    RunResult R;
    R.dx = dx_;
    R.dt = cfg_.dt;
    R.nu = cfg_.nu;
    const int nsteps = static_cast<int>(std::llround(cfg_.T / cfg_.dt));
    if (std::abs(nsteps * cfg_.dt - cfg_.T) > 1e-9 * cfg_.T)
      throw SimConfigError("T must be an integer multiple of dt");
    R.steps = nsteps;
    int every = cfg_.output_every > 0 ? cfg_.output_every : std::max(1, nsteps / 500);
    SimState st = init();
    auto& S = R.series;
    const double ediv = ul_ - ur_;
    auto record = [&](const SimState& s, const Diag& d) {
      S.t.push_back(s.t);
      S.l2.push_back(d.l2);
      S.X.push_back(s.X);
      S.Xdot.push_back(d.Xdot);
      S.I1.push_back(d.I1);
      S.I2.push_back(d.I2);
      S.Dw.push_back(d.Dw);
      S.key1_rhs.push_back(d.Xdot * d.I1 - 0.5 * d.I2 - eps_ * d.Dw);
      S.linf_w.push_back(d.linf);
      if (S.shift_cum.empty()) {
        S.shift_cum.push_back(0);
        S.diss_cum.push_back(0);
        S.lyap_proof.push_back(d.l2);
        proof_shift_ = 0;
        proof_diss_ = 0;
      } else {
        double dt = cfg_.dt;
        double xd0 = S.Xdot[S.Xdot.size() - 2], xd1 = d.Xdot;
        double dw0 = S.Dw[S.Dw.size() - 2], dw1 = d.Dw;
        double qx = 0.5 * dt * (xd0 * xd0 + xd1 * xd1), qd = 0.5 * dt * (dw0 + dw1);
        S.shift_cum.push_back(S.shift_cum.back() + ediv / cfg_.M * qx);
        S.diss_cum.push_back(S.diss_cum.back() + eps_ / 10.0 * qd);
        proof_shift_ += ediv / (2.0 * cfg_.M) * qx;
        proof_diss_ += eps_ / 5.0 * qd;
        S.lyap_proof.push_back(d.l2 + proof_shift_ + proof_diss_);
      }
      S.lyap.push_back(d.l2 + S.shift_cum.back() + S.diss_cum.back());
      if (std::abs(d.w_left) > cfg_.boundary_tol * s_ || std::abs(d.w_right) > cfg_.boundary_tol * s_)
        throw SimError("boundary-adjacent perturbation exceeds tolerance at t=" +
                       std::to_string(s.t));
    };
    auto snap = [&](int k, const SimState& s) {
      if (cfg_.snapshot_every > 0 && k % cfg_.snapshot_every == 0)
        R.snapshots.push_back({k, s.t, s.X, s.u});
    };
    {
      Diag d = diagnostics(st.u, st.t, st.X);
      record(st, d);
    }
    snap(0, st);
    if (observer) observer(0, st);
    for (int k = 1; k <= nsteps; ++k) {
      st = step(st);
      Diag d = diagnostics(st.u, st.t, st.X);
      st.Xdot = d.Xdot;
      record(st, d);
      snap(k, st);
      if (observer) observer(k, st);
    }
    R.final_state = st;

    // key1 residual by centered differences in time
    const double s3 = s_ * s_ * s_;
    std::vector<double> res(S.t.size(), 0.0);
    for (std::size_t k = 1; k + 1 < S.t.size(); ++k) {
      double lhs = 0.5 * (S.l2[k + 1] - S.l2[k - 1]) / (2.0 * cfg_.dt);
      res[k] = (lhs - S.key1_rhs[k]) / s3;
    }
    if (S.t.size() >= 3) {
      res.front() = res[1];
      res.back() = res[res.size() - 2];
    }
    for (std::size_t k = 0; k < S.t.size(); ++k) {
      if (k % every != 0 && k + 1 != S.t.size()) continue;
      R.trace.push_back({S.t[k], S.l2[k], S.shift_cum[k], S.diss_cum[k], S.lyap[k], S.X[k],
                         S.Xdot[k], res[k]});
    }
    auto& V = R.verdict;
    V.initial = S.lyap.front();
    V.max_violation = max_rise(S.lyap);
    V.max_violation_proof = max_rise(S.lyap_proof);
    V.band = cfg_.lyapunov_band_C * (cfg_.dt * cfg_.dt + dx_ * dx_) * cfg_.T * s3;
    for (std::size_t k = 1; k + 1 < res.size(); ++k) V.key1_max_abs = std::max(V.key1_max_abs, std::abs(res[k]));
    std::size_t q = S.Xdot.size() * 3 / 4;
    for (std::size_t k = 0; k < S.Xdot.size(); ++k) {
      V.xdot_running_max = std::max(V.xdot_running_max, std::abs(S.Xdot[k]));
      if (k >= q) V.xdot_last_quarter_max = std::max(V.xdot_last_quarter_max, std::abs(S.Xdot[k]));
    }
    V.xdot_final = S.Xdot.back();
    V.pass = V.max_violation <= V.band;
    return R;
  }

  // Relative deviation of the profile from its end states at the domain edges.
  double edge_defect() const {
    double a = std::abs(profile_value(x_.front()) - ul_);
    double b = std::abs(profile_value(x_.back()) - ur_);
    return std::max(a, b) / s_;
  }

 private:
  void setup() {
    const auto& P = cfg_.params;
    P.validate();
    if (!(cfg_.nu > 0)) throw SimConfigError("nu must be positive");
    if (cfg_.dt <= 0 || cfg_.T <= 0) throw SimConfigError("dt and T must be positive");
    if (cfg_.M < 4.0 / 3.0) throw SimConfigError("shift gain M must be >= 4/3");
    eps_ = cfg_.nu * P.eps;
    delta_ = cfg_.nu * cfg_.nu * P.delta;
    ShockParams eff = P;
    eff.eps = eps_;
    eff.delta = delta_;
    Normalized nm = normalize(eff);
    if (std::abs(nm.params.delta - prof_.params.delta) > 1e-12 * prof_.params.delta ||
        std::abs(nm.params.s() - prof_.s()) > 1e-12 * prof_.s())
      throw SimConfigError("profile does not match the simulation parameters");
    sigma_ = P.sigma();
    s_ = P.s();
    ul_ = P.u_minus;
    ur_ = P.u_plus;
    double nN = cfg_.nu * cfg_.N;
    if (std::abs(nN - std::round(nN)) > 1e-9 || nN < 16)
      throw SimConfigError("nu*N must be an integer >= 16");
    const long Ncell = std::lround(nN);
    const double L = cfg_.nu * cfg_.L_dom;
    const double c = cfg_.nu * cfg_.center;
    dx_ = 2.0 * L / static_cast<double>(Ncell);
    x_.resize(Ncell + 1);
    for (long j = 0; j <= Ncell; ++j) x_[j] = c - L + dx_ * static_cast<double>(j);
    if (cfg_.check_resolution && nm.params.kappa() > 0.25) {
      const double pi = std::acos(-1.0);
      double dn = nm.params.delta, sn = nm.params.s();
      double half_wave = eps_ * pi * dn / std::sqrt(dn * sn - 0.25);
      if (dx_ > half_wave / 20.0)
        throw SimConfigError("grid does not resolve the oscillation: dx=" + std::to_string(dx_) +
                             " > half-wavelength/20=" + std::to_string(half_wave / 20.0));
    }
    ops_ = KdvbOperators(cfg_.order, dx_, eps_, delta_, false);
    if (cfg_.check_domain && edge_defect() >= 1e-8)
      throw SimConfigError("domain too small: profile not within 1e-8 s of the end states");
    // implicit matrix
    const std::size_t n = x_.size();
    BandedMatrix A(n, 3, 3);
    const int pn = ops_.pinned();
    for (std::size_t j = 0; j < n; ++j) {
      if (static_cast<int>(j) < pn || j + pn >= n) {
        A.at(j, j) = 1.0;
        continue;
      }
      for (int k = -3; k <= 3; ++k) {
        double cf = ops_.lin_coef(k);
        double v = (k == 0 ? 1.0 : 0.0) - 0.5 * cfg_.dt * cf;
        if (v != 0) A.at(j, j + k) = v;
      }
    }
    lu_.factor(A);
  }

  void pin(std::vector<double>& v) const {
    const std::size_t n = v.size();
    for (int k = 0; k < ops_.pinned(); ++k) {
      v[k] = ul_;
      v[n - 1 - k] = ur_;
    }
  }

  // N(u) - [N(ub) + L ub + sigma ub'] on active nodes. The bracket is the
  // discrete residual of the travelling wave.
  void rate_explicit(const std::vector<double>& u, const Diag& d, std::vector<double>& out) const {
    ops_.apply_flux(u, out);
    ops_.apply_flux(d.ub, nb_buf_);
    ops_.apply_linear(d.ub, lb_buf_);
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] -= nb_buf_[j] + lb_buf_[j] + sigma_ * d.dub[j];
  }

  SimConfig cfg_;
  const Profile& prof_;
  double eps_ = 1, delta_ = 1, sigma_ = 0, s_ = 1, ul_ = 1, ur_ = -1, dx_ = 1;
  std::vector<double> x_;
  KdvbOperators ops_{2, 1.0, 1.0, 1.0, false};
  BandedLU lu_;
  mutable std::vector<double> xi_buf_, w_buf_, lu_buf_, nb_buf_, lb_buf_;
  mutable double proof_shift_ = 0, proof_diss_ = 0;
};

}  // namespace shocklab
