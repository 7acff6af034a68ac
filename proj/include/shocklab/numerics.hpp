// Shared numerical kernels: adaptive Dormand-Prince integration with dense
// output and events, composite quadrature, bracketed roots, banded solves.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <lapacke.h>

namespace shocklab {

struct ToleranceSet {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double event_tol = 1e-12;
  double margin_tol = 1e-7;

  void validate() const {
    if (!(abs_tol > 0 && rel_tol > 0 && event_tol > 0 && margin_tol > 0))
      throw std::invalid_argument("tolerances must be strictly positive");
    if (margin_tol < event_tol)
      throw std::invalid_argument("margin_tol must be >= event_tol");
  }
  ToleranceSet scaled(double f) const {
    ToleranceSet t = *this;
    t.abs_tol *= f;
    t.rel_tol *= f;
    t.event_tol *= f;
    t.margin_tol *= f;
    return t;
  }
};

class NumericsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <std::size_t N>
using State = std::array<double, N>;

// One accepted step with the DOPRI5 continuous extension.
template <std::size_t N>
struct DenseStep {
  double t0 = 0, h = 0;
  std::array<State<N>, 5> r{};

  State<N> eval(double t) const {
    double th = (t - t0) / h, th1 = 1.0 - th;
    State<N> y;
    for (std::size_t i = 0; i < N; ++i)
      y[i] = r[0][i] +
             th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
    return y;
  }
  double t1() const { return t0 + h; }
};

template <std::size_t N>
class DenseTrajectory {
 public:
  static constexpr int order = 4;

  void push(const DenseStep<N>& s) { steps_.push_back(s); }
  bool empty() const { return steps_.empty(); }
  std::size_t size() const { return steps_.size(); }
  const DenseStep<N>& step(std::size_t i) const { return steps_[i]; }
  const std::vector<DenseStep<N>>& steps() const { return steps_; }

  double t_begin() const { return steps_.front().t0; }
  double t_end() const { return steps_.back().t1(); }
  double t_min() const { return std::min(t_begin(), t_end()); }
  double t_max() const { return std::max(t_begin(), t_end()); }
  bool forward() const { return steps_.front().h > 0; }

  State<N> operator()(double t) const { return steps_[locate(t)].eval(t); }

  std::size_t locate(double t) const {
    if (steps_.empty()) throw NumericsError("empty trajectory");
    // steps are ordered along the integration direction
    std::size_t lo = 0, hi = steps_.size() - 1;
    if (forward()) {
      while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (t > steps_[mid].t1()) lo = mid + 1; else hi = mid;
      }
    } else {
      while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (t < steps_[mid].t1()) lo = mid + 1; else hi = mid;
      }
    }
    return lo;
  }

  void truncate(std::size_t n) { steps_.resize(std::min(n, steps_.size())); }

 private:
  std::vector<DenseStep<N>> steps_;
};

// Event on a single state component crossing a level.
struct ComponentEvent {
  std::size_t component = 0;
  double level = 0;
  int id = 0;
};

struct EventHit {
  int id = 0;
  double t = 0;
  std::size_t step = 0;
  int direction = 0;  // sign of the crossing in the integration direction
};

template <std::size_t N>
struct OdeResult {
  DenseTrajectory<N> traj;
  std::vector<EventHit> hits;
  State<N> y_end{};
  double t_end = 0;
  std::size_t n_rhs = 0, n_accept = 0, n_reject = 0;
  bool stopped_early = false;
};

template <std::size_t N>
using Rhs = std::function<State<N>(double, const State<N>&)>;

// Called after each accepted step; returning true terminates integration.
template <std::size_t N>
using StopFn = std::function<bool(const OdeResult<N>&)>;

namespace detail {
struct Dopri {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113,
                          a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                          a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0,
                          d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0,
                          d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0,
                          d7 = 69997945.0 / 29380423.0;
};

template <std::size_t N>
double event_value(const ComponentEvent& e, const State<N>& y) {
  return y[e.component] - e.level;
}

// Bisection on the dense output followed by one Newton step using the rhs.
template <std::size_t N>
double locate_event(const DenseStep<N>& st, const ComponentEvent& ev,
                    const Rhs<N>& f, double tol) {
  double a = st.t0, b = st.t1();
  double ga = event_value(ev, st.eval(a));
  for (int it = 0; it < 200 && std::abs(b - a) > tol; ++it) {
    double m = 0.5 * (a + b);
    double gm = event_value(ev, st.eval(m));
    if (gm == 0) { a = b = m; break; }
    if ((gm < 0) == (ga < 0)) { a = m; ga = gm; } else { b = m; }
  }
  double t = 0.5 * (a + b);
  State<N> y = st.eval(t);
  double g = event_value(ev, y);
  double dg = f(t, y)[ev.component];
  if (dg != 0 && std::isfinite(dg)) {
    double tn = t - g / dg;
    double lo = std::min(st.t0, st.t1()), hi = std::max(st.t0, st.t1());
    if (tn >= lo && tn <= hi && std::abs(tn - t) <= std::abs(b - a) + tol) t = tn;
  }
  return t;
}
}  // namespace detail

// Adaptive DOPRI5(4) with PI control. span may be decreasing.
template <std::size_t N>
OdeResult<N> integrate_ode(const Rhs<N>& f, State<N> y0, std::pair<double, double> span,
                           const ToleranceSet& tol,
                           const std::vector<ComponentEvent>& events = {},
                           const StopFn<N>& stop = nullptr,
                           std::size_t max_steps = 2000000) {
  using D = detail::Dopri;
  tol.validate();
  OdeResult<N> out;
  double t = span.first, tend = span.second;
  const double dir = tend >= t ? 1.0 : -1.0;
  const double len = std::abs(tend - t);
  if (len == 0) throw NumericsError("empty integration span");

  auto norm_err = [&](const State<N>& e, const State<N>& ya, const State<N>& yb) {
    double acc = 0;
    for (std::size_t i = 0; i < N; ++i) {
      double sc = tol.abs_tol + tol.rel_tol * std::max(std::abs(ya[i]), std::abs(yb[i]));
      acc += (e[i] / sc) * (e[i] / sc);
    }
    return std::sqrt(acc / N);
  };

  State<N> y = y0;
  State<N> k1 = f(t, y);
  out.n_rhs = 1;
  // Initial step guess (Hairer-Norsett-Wanner).
  double h;
  {
    State<N> sc;
    for (std::size_t i = 0; i < N; ++i) sc[i] = tol.abs_tol + tol.rel_tol * std::abs(y[i]);
    double d0 = 0, d1 = 0;
    for (std::size_t i = 0; i < N; ++i) {
      d0 += (y[i] / sc[i]) * (y[i] / sc[i]);
      d1 += (k1[i] / sc[i]) * (k1[i] / sc[i]);
    }
    d0 = std::sqrt(d0 / N);
    d1 = std::sqrt(d1 / N);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, len);
    State<N> y1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + dir * h0 * k1[i];
    State<N> k2 = f(t + dir * h0, y1);
    ++out.n_rhs;
    double d2 = 0;
    for (std::size_t i = 0; i < N; ++i) {
      double v = (k2[i] - k1[i]) / sc[i];
      d2 += v * v;
    }
    d2 = std::sqrt(d2 / N) / h0;
    double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                          : std::pow(0.01 / std::max(d1, d2), 0.2);
    h = std::min({100 * h0, h1, len});
  }

  const double safety = 0.9, fac_min = 0.2, fac_max = 10.0;
  const double beta = 0.04, alpha = 0.2 - 0.75 * beta;
  double err_old = 1e-4;
  bool last_rejected = false;
  std::size_t nsteps = 0;

  while (dir * (tend - t) > 0) {
    if (++nsteps > max_steps) throw NumericsError("step budget exhausted at t=" + std::to_string(t));
    if (h < 16 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      throw NumericsError("step-size underflow at t=" + std::to_string(t) +
                          ", y0=" + std::to_string(y[0]));
    bool last = false;
    if (h >= std::abs(tend - t)) { h = std::abs(tend - t); last = true; }
    double hs = dir * h;
    State<N> yt, k2, k3, k4, k5, k6, k7, y1, e;
    for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * D::a21 * k1[i];
    k2 = f(t + D::c2 * hs, yt);
    for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (D::a31 * k1[i] + D::a32 * k2[i]);
    k3 = f(t + D::c3 * hs, yt);
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + hs * (D::a41 * k1[i] + D::a42 * k2[i] + D::a43 * k3[i]);
    k4 = f(t + D::c4 * hs, yt);
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + hs * (D::a51 * k1[i] + D::a52 * k2[i] + D::a53 * k3[i] + D::a54 * k4[i]);
    k5 = f(t + D::c5 * hs, yt);
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + hs * (D::a61 * k1[i] + D::a62 * k2[i] + D::a63 * k3[i] +
                           D::a64 * k4[i] + D::a65 * k5[i]);
    k6 = f(t + hs, yt);
    for (std::size_t i = 0; i < N; ++i)
      y1[i] = y[i] + hs * (D::a71 * k1[i] + D::a73 * k3[i] + D::a74 * k4[i] +
                           D::a75 * k5[i] + D::a76 * k6[i]);
    k7 = f(t + hs, y1);
    out.n_rhs += 6;
    for (std::size_t i = 0; i < N; ++i)
      e[i] = hs * (D::e1 * k1[i] + D::e3 * k3[i] + D::e4 * k4[i] + D::e5 * k5[i] +
                   D::e6 * k6[i] + D::e7 * k7[i]);
    double err = norm_err(e, y, y1);
    if (!std::isfinite(err)) {
      h *= 0.1;
      last_rejected = true;
      ++out.n_reject;
      continue;
    }
    if (err <= 1.0) {
      DenseStep<N> st;
      st.t0 = t;
      st.h = hs;
      for (std::size_t i = 0; i < N; ++i) {
        double dy = y1[i] - y[i];
        double bspl = hs * k1[i] - dy;
        st.r[0][i] = y[i];
        st.r[1][i] = dy;
        st.r[2][i] = bspl;
        st.r[3][i] = dy - hs * k7[i] - bspl;
        st.r[4][i] = hs * (D::d1 * k1[i] + D::d3 * k3[i] + D::d4 * k4[i] +
                           D::d5 * k5[i] + D::d6 * k6[i] + D::d7 * k7[i]);
      }
      out.traj.push(st);
      std::size_t sidx = out.traj.size() - 1;
      for (const auto& ev : events) {
        double g0 = detail::event_value(ev, y), g1 = detail::event_value(ev, y1);
        if (g0 == 0) continue;  // counted on the previous step
        if ((g0 < 0) != (g1 < 0) || g1 == 0) {
          EventHit hit;
          hit.id = ev.id;
          hit.step = sidx;
          hit.t = detail::locate_event(st, ev, f, tol.event_tol);
          hit.direction = g1 > g0 ? 1 : -1;
          out.hits.push_back(hit);
        }
      }
      t = last ? tend : t + hs;
      y = y1;
      k1 = k7;
      ++out.n_accept;
      double fac = safety * std::pow(std::max(err, 1e-10), -alpha) * std::pow(err_old, beta);
      fac = std::clamp(fac, fac_min, last_rejected ? 1.0 : fac_max);
      err_old = std::max(err, 1e-4);
      h *= fac;
      last_rejected = false;
      out.t_end = t;
      out.y_end = y;
      if (stop && stop(out)) {
        out.stopped_early = true;
        return out;
      }
    } else {
      double fac = std::max(fac_min, safety * std::pow(err, -alpha));
      h *= fac;
      last_rejected = true;
      ++out.n_reject;
    }
  }
  out.t_end = t;
  out.y_end = y;
  return out;
}

// ---------------------------------------------------------------- quadrature

enum class Endpoints { smooth, sqrt_singular };

struct QuadResult {
  double value = 0;
  double error = 0;
  std::size_t panels = 0;
  bool converged = false;
};

namespace detail {
inline double simpson_fixed(const std::function<double(double)>& g, double a, double b,
                            std::size_t n) {
  double h = (b - a) / static_cast<double>(n);
  double s = g(a) + g(b);
  for (std::size_t i = 1; i < n; ++i) s += g(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}
}  // namespace detail

// Composite Simpson with panel doubling until |S_2n - S_n|/15 <= tol(1+|S|).
// sqrt_singular applies x = a + (b-a)(3t^2 - 2t^3), which regularizes
// square-root endpoint behaviour.
inline QuadResult quad_composite(const std::function<double(double)>& f, double a, double b,
                                 double tol = 1e-12, Endpoints ep = Endpoints::smooth,
                                 std::size_t max_panels = std::size_t(1) << 22) {
  QuadResult r;
  if (a == b) {
    r.converged = true;
    return r;
  }
  std::function<double(double)> g = f;
  double lo = a, hi = b;
  if (ep == Endpoints::sqrt_singular) {
    g = [&f, a, b](double t) {
      double x = a + (b - a) * t * t * (3.0 - 2.0 * t);
      return f(x) * (b - a) * 6.0 * t * (1.0 - t);
    };
    lo = 0;
    hi = 1;
  }
  std::size_t n = 16;
  double s_old = detail::simpson_fixed(g, lo, hi, n);
  while (n < max_panels) {
    n *= 2;
    double s = detail::simpson_fixed(g, lo, hi, n);
    double err = std::abs(s - s_old) / 15.0;
    r.value = s;
    r.error = err;
    r.panels = n;
    if (err <= tol * (1.0 + std::abs(s))) {
      r.converged = true;
      return r;
    }
    s_old = s;
  }
  return r;
}

// Trapezoid rule on sampled data (x strictly monotone).
inline double quad_trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("quad_trapezoid: size mismatch");
  double s = 0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

// Trapezoid rule on a uniform grid with spacing dx.
inline double quad_trapezoid_uniform(const std::vector<double>& y, double dx) {
  if (y.size() < 2) return 0;
  double s = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
  return s * dx;
}

// ------------------------------------------------------------------- roots

inline double find_root(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
  double fa = f(a), fb = f(b);
  if (fa == 0) return a;
  if (fb == 0) return b;
  if ((fa < 0) == (fb < 0))
    throw NumericsError("find_root: no sign change on [" + std::to_string(a) + ", " +
                        std::to_string(b) + "]");
  std::uintmax_t iters = 500;
  auto term = [tol](double l, double r) { return std::abs(r - l) <= tol; };
  auto br = boost::math::tools::toms748_solve(f, a, b, fa, fb, term, iters);
  double x = 0.5 * (br.first + br.second);
  // prefer the bracket end with the smaller residual when it is tighter
  double fx = std::abs(f(x));
  if (std::abs(f(br.first)) < fx) x = br.first;
  if (std::abs(f(br.second)) < std::min(fx, std::abs(f(x)))) x = br.second;
  return x;
}

// ------------------------------------------------------------ banded algebra

// Square banded matrix with kl sub- and ku super-diagonals, stored dense by
// diagonal offset. get/set use global (row, col) indices.
class BandedMatrix {
 public:
  BandedMatrix() = default;
  BandedMatrix(std::size_t n, int kl, int ku)
      : n_(n), kl_(kl), ku_(ku), a_(n * static_cast<std::size_t>(kl + ku + 1), 0.0) {}

  std::size_t n() const { return n_; }
  int kl() const { return kl_; }
  int ku() const { return ku_; }

  bool in_band(std::size_t i, std::size_t j) const {
    long d = static_cast<long>(j) - static_cast<long>(i);
    return d >= -kl_ && d <= ku_;
  }
  double& at(std::size_t i, std::size_t j) {
    if (!in_band(i, j)) throw std::out_of_range("banded: outside band");
    return a_[i * (kl_ + ku_ + 1) + (static_cast<long>(j) - static_cast<long>(i) + kl_)];
  }
  double get(std::size_t i, std::size_t j) const {
    if (!in_band(i, j)) return 0.0;
    return a_[i * (kl_ + ku_ + 1) + (static_cast<long>(j) - static_cast<long>(i) + kl_)];
  }

  std::vector<double> multiply(const std::vector<double>& x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      std::size_t j0 = i >= static_cast<std::size_t>(kl_) ? i - kl_ : 0;
      std::size_t j1 = std::min(n_ - 1, i + ku_);
      double s = 0;
      for (std::size_t j = j0; j <= j1; ++j) s += get(i, j) * x[j];
      y[i] = s;
    }
    return y;
  }
  double norm_inf() const {
    double m = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0;
      for (std::size_t j = (i >= static_cast<std::size_t>(kl_) ? i - kl_ : 0);
           j <= std::min(n_ - 1, i + ku_); ++j)
        s += std::abs(get(i, j));
      m = std::max(m, s);
    }
    return m;
  }

 private:
  std::size_t n_ = 0;
  int kl_ = 0, ku_ = 0;
  std::vector<double> a_;
};

// LU factorization with partial pivoting (LAPACK gbtrf), reusable for many rhs.
class BandedLU {
 public:
  BandedLU() = default;
  explicit BandedLU(const BandedMatrix& m) { factor(m); }

  void factor(const BandedMatrix& m) {
    n_ = m.n();
    kl_ = m.kl();
    ku_ = m.ku();
    ldab_ = 2 * kl_ + ku_ + 1;
    ab_.assign(static_cast<std::size_t>(ldab_) * n_, 0.0);
    ipiv_.assign(n_, 0);
    // column-major band storage: AB(kl+ku+i-j, j) = A(i,j)
    for (std::size_t j = 0; j < n_; ++j) {
      std::size_t i0 = j >= static_cast<std::size_t>(ku_) ? j - ku_ : 0;
      std::size_t i1 = std::min(n_ - 1, j + kl_);
      for (std::size_t i = i0; i <= i1; ++i)
        ab_[j * ldab_ + (kl_ + ku_ + i - j)] = m.get(i, j);
    }
    lapack_int info = LAPACKE_dgbtrf(LAPACK_COL_MAJOR, static_cast<lapack_int>(n_),
                                     static_cast<lapack_int>(n_), kl_, ku_, ab_.data(),
                                     ldab_, ipiv_.data());
    if (info > 0)
      throw NumericsError("solve_banded: singular pivot at row " + std::to_string(info - 1));
    if (info < 0) throw NumericsError("solve_banded: invalid argument to gbtrf");
  }

  std::vector<double> solve(std::vector<double> b) const {
    if (b.size() != n_) throw std::invalid_argument("solve_banded: rhs size mismatch");
    lapack_int info = LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', static_cast<lapack_int>(n_), kl_,
                                     ku_, 1, ab_.data(), ldab_, ipiv_.data(), b.data(),
                                     static_cast<lapack_int>(n_));
    if (info != 0) throw NumericsError("solve_banded: gbtrs failed");
    return b;
  }

 private:
  std::size_t n_ = 0;
  int kl_ = 0, ku_ = 0, ldab_ = 0;
  std::vector<double> ab_;
  std::vector<lapack_int> ipiv_;
};

inline std::vector<double> solve_banded(const BandedMatrix& m, const std::vector<double>& b) {
  if (m.kl() > 3 || m.ku() > 3)
    throw std::invalid_argument("solve_banded: bandwidth exceeds 3");
  return BandedLU(m).solve(b);
}

// Chebyshev-Lobatto style interior points on (a, b), clustered at both ends.
inline std::vector<double> chebyshev_points(double a, double b, std::size_t n) {
  std::vector<double> x(n);
  const double pi = std::acos(-1.0);
  for (std::size_t k = 0; k < n; ++k) {
    double th = pi * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    x[k] = 0.5 * (a + b) - 0.5 * (b - a) * std::cos(th);
  }
  return x;
}

}  // namespace shocklab
