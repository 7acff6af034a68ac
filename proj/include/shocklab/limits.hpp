// nu-scaled KdV-Burgers family: exact scaling checks and the distance to the
// shifted Riemann shock as nu -> 0.
#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>
#include <string>
#include <vector>

#include "shocklab/pde.hpp"

namespace shocklab {

class ScalingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RiemannShock {
  double u_minus = 1, u_plus = -1, sigma = 0;
  double at(double x, double t) const { return x - sigma * t < 0 ? u_minus : u_plus; }
};

// L2 distance between the piecewise-linear grid function u and the step
// u_minus / u_plus with jump at z. Cells are integrated exactly; the cell
// holding z is split there.
inline double riemann_distance(const std::vector<double>& x, const std::vector<double>& u,
                               const RiemannShock& rs, double z) {
  if (x.size() != u.size() || x.size() < 2) throw std::invalid_argument("riemann_distance: bad grid");
  auto seg = [](double a, double b, double fa, double fb) {
    return (b - a) * (fa * fa + fa * fb + fb * fb) / 3.0;
  };
  double sum = 0;
  for (std::size_t j = 0; j + 1 < x.size(); ++j) {
    double a = x[j], b = x[j + 1];
    if (b <= z) {
      sum += seg(a, b, u[j] - rs.u_minus, u[j + 1] - rs.u_minus);
    } else if (a >= z) {
      sum += seg(a, b, u[j] - rs.u_plus, u[j + 1] - rs.u_plus);
    } else {
      double uz = u[j] + (u[j + 1] - u[j]) * (z - a) / (b - a);
      sum += seg(a, z, u[j] - rs.u_minus, uz - rs.u_minus);
      sum += seg(z, b, uz - rs.u_plus, u[j + 1] - rs.u_plus);
    }
  }
  // beyond the domain u sits at the end states up to the pinning tolerance
  return std::sqrt(sum);
}

// Base configuration rescaled to nu: same absolute dx and dt, domain nu*L,
// horizon nu*T, data u0(x/nu).
inline SimConfig scaled_config(const SimConfig& base, double nu, bool scale_horizon = true) {
  SimConfig c = base;
  c.nu = nu;
  if (scale_horizon) c.T = nu * base.T;
  if (base.snapshot_every > 0) {
    double k = nu * base.snapshot_every;
    if (std::abs(k - std::round(k)) > 1e-9 || k < 1)
      throw ScalingError("snapshot cadence does not scale to an integer step count");
    c.snapshot_every = static_cast<int>(std::lround(k));
  }
  return c;
}

inline RunResult scaled_run(const SimConfig& base, const Profile& profile, double nu,
                            const Simulation::Observer& obs = {}) {
  Simulation sim(scaled_config(base, nu), profile);
  return sim.run(obs);
}

struct ScalingDeviation {
  double max_dX = 0;  // max |X_nu(t) - nu X(t/nu)|
  double max_du = 0;  // max |u^nu(nu t, nu x) - u(t, x)| over snapshots and nodes
  int time_samples = 0;
  int field_samples = 0;
};

// Compares a run at nu with the base run at nu = 1. Both must share dx and
// dt; scaled node j then sits at nu times base node j/nu and scaled step k at
// nu times base step k/nu.
inline ScalingDeviation verify_scaling(const RunResult& scaled, const RunResult& base, double nu) {
  if (std::abs(scaled.dx - base.dx) > 1e-12 * base.dx || std::abs(scaled.dt - base.dt) > 1e-15)
    throw ScalingError("verify_scaling: grids are not compatible (dx, dt must agree)");
  double inv = 1.0 / nu;
  if (std::abs(inv - std::round(inv)) > 1e-9) throw ScalingError("verify_scaling: 1/nu must be an integer");
  const std::size_t m = static_cast<std::size_t>(std::llround(inv));
  ScalingDeviation d;
  const auto& Xs = scaled.series.X;
  const auto& Xb = base.series.X;
  for (std::size_t k = 0; k < Xs.size(); ++k) {
    std::size_t kb = k * m;
    if (kb >= Xb.size()) break;
    d.max_dX = std::max(d.max_dX, std::abs(Xs[k] - nu * Xb[kb]));
    ++d.time_samples;
  }
  if (d.time_samples == 0) throw ScalingError("verify_scaling: no common time samples");
  for (const auto& sn : scaled.snapshots) {
    auto it = std::find_if(base.snapshots.begin(), base.snapshots.end(),
                           [&](const Snapshot& b) { return b.step == sn.step * static_cast<int>(m); });
    if (it == base.snapshots.end()) continue;
    if ((it->u.size() - 1) != (sn.u.size() - 1) * m)
      throw ScalingError("verify_scaling: node counts are not compatible");
    for (std::size_t j = 0; j < sn.u.size(); ++j)
      d.max_du = std::max(d.max_du, std::abs(sn.u[j] - it->u[j * m]));
    ++d.field_samples;
  }
  if (d.field_samples == 0) throw ScalingError("verify_scaling: no common snapshots");
  return d;
}

// Richardson estimate of the coarse run's error from a run with half dx and dt.
struct DiscretizationError {
  double X = 0, u = 0;
};

inline DiscretizationError richardson_error(const RunResult& coarse, const RunResult& fine) {
  if (std::abs(fine.dx * 2 - coarse.dx) > 1e-12 * coarse.dx || std::abs(fine.dt * 2 - coarse.dt) > 1e-15)
    throw ScalingError("richardson_error: fine run must halve dx and dt");
  DiscretizationError e;
  for (std::size_t k = 0; k < coarse.series.X.size() && 2 * k < fine.series.X.size(); ++k)
    e.X = std::max(e.X, std::abs(coarse.series.X[k] - fine.series.X[2 * k]));
  for (const auto& sc : coarse.snapshots) {
    auto it = std::find_if(fine.snapshots.begin(), fine.snapshots.end(),
                           [&](const Snapshot& f) { return f.step == 2 * sc.step; });
    if (it == fine.snapshots.end()) continue;
    for (std::size_t j = 0; j < sc.u.size(); ++j)
      e.u = std::max(e.u, std::abs(sc.u[j] - it->u[2 * j]));
  }
  e.X *= 4.0 / 3.0;
  e.u *= 4.0 / 3.0;
  return e;
}

struct NuRun {
  double nu = 1;
  double initial_distance = 0;  // ||u^nu(0) - ubar||
  double max_distance = 0;      // max_t ||u^nu(t) - ubar(. - sigma t - Y_nu(t))||
  double excess_max = 0;        // max_distance - initial_distance
  double literal_excess = 0;    // max_distance - ||u0 - ubar|| with the unscaled datum
  std::vector<double> t, distance, X;
  RunResult run;
};

struct SqrtFit {
  double slope = 0;
  double residual = 0;  // max relative deviation |e - a sqrt(nu)| / (a sqrt(nu))
  bool degenerate = false;
  std::string note;
};

inline SqrtFit fit_sqrt_nu(const std::vector<double>& nu, const std::vector<double>& e) {
  SqrtFit f;
  if (nu.size() != e.size() || nu.empty()) throw std::invalid_argument("fit_sqrt_nu: bad input");
  double num = 0, den = 0;
  for (std::size_t k = 0; k < nu.size(); ++k) {
    num += e[k] * std::sqrt(nu[k]);
    den += nu[k];
  }
  f.slope = num / den;
  for (std::size_t k = 0; k < nu.size(); ++k) {
    double m = f.slope * std::sqrt(nu[k]);
    f.residual = std::max(f.residual, std::abs(e[k] - m) / std::abs(m));
  }
  if (nu.size() < 2) {
    f.degenerate = true;
    f.note = "single nu value: fit is degenerate";
  }
  return f;
}

struct LimitRun {
  std::vector<NuRun> runs;
  SqrtFit fit;
  bool monotone_bound = false;  // each excess <= slope*sqrt(nu)*(1.2)
};

// Runs the family on the same unscaled datum. Every run uses horizon T in its
// own time variable; dx and dt are shared.
inline LimitRun nu_sweep(const SimConfig& base, const Profile& profile, const std::vector<double>& nu_list,
                         int jobs = 1, bool keep_runs = false) {
  if (nu_list.empty()) throw ScalingError("nu_sweep: empty nu list");
  for (std::size_t k = 1; k < nu_list.size(); ++k)
    if (!(nu_list[k] < nu_list[k - 1])) throw ScalingError("nu_sweep: nu list must be strictly decreasing");
  const ShockParams& P = base.params;
  RiemannShock rs{P.u_minus, P.u_plus, P.sigma()};
  // unscaled datum distance, used for the literal comparison
  double d0_unscaled = 0;
  {
    SimConfig c1 = base;
    c1.nu = 1;
    Simulation s1(c1, profile);
    d0_unscaled = riemann_distance(s1.x(), s1.init().u, rs, 0.0);
  }
  auto one = [&](double nu) {
    SimConfig c = scaled_config(base, nu, false);
    Simulation sim(c, profile);
    NuRun r;
    r.nu = nu;
    const auto& x = sim.x();
    r.run = sim.run([&](int, const SimState& s) {
      double z = rs.sigma * s.t + s.X;
      double d = riemann_distance(x, s.u, rs, z);
      r.t.push_back(s.t);
      r.distance.push_back(d);
      r.X.push_back(s.X);
    });
    r.initial_distance = r.distance.front();
    r.max_distance = *std::max_element(r.distance.begin(), r.distance.end());
    r.excess_max = r.max_distance - r.initial_distance;
    r.literal_excess = r.max_distance - d0_unscaled;
    if (!keep_runs) r.run = RunResult{};
    return r;
  };
  LimitRun L;
  L.runs.resize(nu_list.size());
  if (jobs <= 1) {
    for (std::size_t k = 0; k < nu_list.size(); ++k) L.runs[k] = one(nu_list[k]);
  } else {
    std::size_t next = 0;
    while (next < nu_list.size()) {
      std::vector<std::future<NuRun>> fs;
      std::size_t b = next;
      for (; next < nu_list.size() && next - b < static_cast<std::size_t>(jobs); ++next)
        fs.push_back(std::async(std::launch::async, one, nu_list[next]));
      for (std::size_t k = 0; k < fs.size(); ++k) L.runs[b + k] = fs[k].get();
    }
  }
  std::vector<double> nus, ex;
  for (const auto& r : L.runs) {
    nus.push_back(r.nu);
    ex.push_back(r.excess_max);
  }
  L.fit = fit_sqrt_nu(nus, ex);
  L.monotone_bound = L.fit.slope > 0;
  for (const auto& r : L.runs)
    if (r.excess_max > L.fit.slope * std::sqrt(r.nu) * 1.2) L.monotone_bound = false;
  return L;
}

}  // namespace shocklab
