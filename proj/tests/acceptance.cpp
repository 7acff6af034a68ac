// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only 1,2,...] [--expected-failures FILE]
//
// Without --expected-failures the exit code is 0 iff every criterion passes.
// With it, the exit code is 0 iff the failing set equals the listed set.
#include <chrono>
#include <cstdarg>
#include <map>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>

#include "kv_cases.hpp"
#include "shocklab/commands.hpp"
#include "shocklab/config.hpp"
#include "shocklab/limits.hpp"
#include "shocklab/verify.hpp"

using namespace shocklab;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

void note(const std::string& s) { std::printf("    %s\n", s.c_str()); }

const Profile& profile_for(double kappa) {
  static std::map<double, Profile> cache;
  auto it = cache.find(kappa);
  if (it == cache.end()) it = cache.emplace(kappa, build_profile(normalized_params(kappa))).first;
  return it->second;
}

// ------------------------------------------------------------------ 1
Verdict c1() {
  Verdict v;
  const double A[] = {1.0 / 3, 0.5, 2.0 / 3, 0.75, 1.0};
  const double claim[] = {1.03, 1.0601, 1.092, 1.11, 1.15};
  std::string bad;
  for (int k = 0; k < 5; ++k) {
    double b = 1.0 + u0_closed_bound(A[k]);
    double d = std::abs(b - claim[k]);
    note(fmt("A=%.4f  1+bound=%.6f  claimed %.4f  |diff|=%.2e", A[k], b, claim[k], d));
    if (d > 1e-3) {
      v.pass = false;
      bad += fmt(" A=%.4f(diff %.2e)", A[k], d);
    }
  }
  double q = 1.0 + u0_closed_bound_quarter();
  note(fmt("A->1/4 limit 1+bound=%.6f  claimed 1.0166", q));
  if (std::abs(q - 1.0166) > 1e-3) {
    v.pass = false;
    bad += " A->1/4";
  }
  v.detail = v.pass ? "all five rows and the A->1/4 limit within 1e-3 s" : "outside 1e-3 s:" + bad;
  return v;
}

// ------------------------------------------------------------------ 2
Verdict c2() {
  Verdict v;
  double worst_u0 = -1, worst_inc = 1e300, worst_dec = 1e300;
  for (double kappa : {0.30, 0.38, 0.45}) {
    const Profile& p = profile_for(kappa);
    const double s = p.s();
    auto d = decay_report(p, 0.5);
    double u0 = p.extrema.at(0).u / s;
    note(fmt("kappa=%.2f resolved=%d u0/s=%.8f min rho_inc=%.4f min rho_dec=%.4f", kappa, p.n_resolved, u0,
             d.min_inc(), d.min_dec()));
    worst_u0 = std::max(worst_u0, u0);
    worst_inc = std::min(worst_inc, d.min_inc());
    worst_dec = std::min(worst_dec, d.min_dec());
    if (u0 > 1.0601 + 1e-6) v.pass = false;
    if (d.min_inc() < 4.64 - 1e-6 || d.min_dec() < 4.77 - 1e-6) v.pass = false;
    if (d.ratios_inc.empty() || d.ratios_dec.empty()) v.pass = false;
  }
  v.detail = fmt("max u0/s=%.6f (<= 1.0601), min ratios %.3f / %.3f (>= 4.64 / 4.77)", worst_u0, worst_inc, worst_dec);
  return v;
}

// ------------------------------------------------------------------ 3
bool cert_ok(const InequalityCertificate& c, std::string& why) {
  const double tol = 1e-7 * c.scale;
  if (c.status == CertStatus::fail || c.margin < -tol) {
    why = "fails";
    return false;
  }
  if (c.status == CertStatus::pass && (c.margin_refined < -tol || c.margin_refined < c.margin - tol)) {
    why = "degrades under refinement";
    return false;
  }
  return true;
}

Verdict c3() {
  Verdict v;
  VerifyOptions o;
  o.samples = 512;
  int passed = 0, na = 0, unres = 0;
  auto take = [&](const InequalityCertificate& c, double kappa) {
    std::string why;
    bool ok = cert_ok(c, why);
    if (c.status == CertStatus::pass) ++passed;
    else if (c.status == CertStatus::not_applicable) ++na;
    else if (c.status != CertStatus::fail) ++unres;
    if (!ok) {
      v.pass = false;
      note(fmt("kappa=%.2f %s[%d] %s: margin %.3e scale %.3e", kappa, c.name.c_str(), c.index, why.c_str(), c.margin,
               c.scale));
    }
    if (c.status != CertStatus::pass)
      note(fmt("kappa=%.2f %s[%d] %s: %s", kappa, c.name.c_str(), c.index, to_string(c.status), c.note.c_str()));
  };
  for (double kappa : {0.30, 0.38, 0.45}) {
    const Profile& p = profile_for(kappa);
    take(check_rm_envelope(p, 0.5, o), kappa);
    for (int i : {1, 3, 5}) take(check_inc_envelope(p, i, 0.5, o), kappa);
    for (int i : {2, 4}) take(check_dec_envelope(p, i, 11.0 / 12.0, 0.5, o), kappa);
    for (const auto& c : check_parabola_envelopes(p, o, 6)) take(c, kappa);
  }
  // decreasing-interval certificate where its ratio hypothesis holds
  Profile q = build_profile(normalized_params(0.9, 1.0, 1.0));
  for (int i : {2, 4}) {
    auto c = check_dec_envelope(q, i, 11.0 / 12.0, 1.0, o);
    note(fmt("kappa=0.90 A=1 dec_envelope[%d] %s margin %.3e rho %.3f", i, to_string(c.status), c.margin,
             c.constants.count("rho") ? c.constants.at("rho") : NAN));
    take(c, 0.9);
  }
  v.detail = fmt("%d certificates pass at 512 and 1024 samples, %d not applicable, %d unresolved", passed, na, unres);
  return v;
}

// ------------------------------------------------------------------ 4
Verdict c4() {
  Verdict v;
  int n = 0;
  for (double kappa : {0.30, 0.38, 0.45}) {
    const Profile& p = profile_for(kappa);
    auto r = l2_interval_bounds(p);
    for (const auto& x : r.intervals) {
      bool ok = x.value <= x.bound && x.quad_error < 0.01 * x.bound;
      note(fmt("kappa=%.2f J_%d: %.4e <= %.4e (quad err %.1e)%s", kappa, x.i, x.value, x.bound, x.quad_error,
               ok ? "" : "  FAIL"));
      v.pass = v.pass && ok;
      ++n;
    }
    const double s = p.s();
    bool ok = r.left_tail <= 0.001 * s && r.left_tail_error < 0.01 * 0.001 * s;
    note(fmt("kappa=%.2f left tail: %.4e <= %.1e s (quad err %.1e)%s", kappa, r.left_tail, 0.001, r.left_tail_error,
             ok ? "" : "  FAIL"));
    v.pass = v.pass && ok;
    if (r.intervals.empty()) v.pass = false;
  }
  v.detail = fmt("%d interval bounds and 3 tail bounds checked", n);
  return v;
}

// ------------------------------------------------------------------ 5
Verdict c5() {
  Verdict v;
  auto L = induction_ledger(21);
  bool exact = L.a.at(1) == 1.0 / 30 && L.C1 == 1.0 / 3 && L.C0 == 13.0 / 10;
  int step2 = 0, bad = 0;
  double worst[4] = {0, 0, 0, 0};
  const char* names[4] = {"step2_J_even", "step2_J_odd", "step2_key_even", "step2_key_odd"};
  for (const auto& c : L.checks) {
    if (!c.ok) {
      ++bad;
      note(fmt("%s i=%d: %.6g vs claim %.6g", c.name.c_str(), c.i, c.value, c.claim));
    }
    for (int k = 0; k < 4; ++k)
      if (c.name == names[k]) {
        ++step2;
        worst[k] = std::max(worst[k], c.value);
      }
  }
  double budget = *std::max_element(L.budget_exact.begin(), L.budget_exact.end());
  for (int k = 0; k < 4; ++k) note(fmt("%s max over odd i<=21: %.6g", names[k], worst[k]));
  note(fmt("a1=%.17g C1=%.17g C0=%.17g", L.a.at(1), L.C1, L.C0));
  v.pass = exact && bad == 0 && step2 == 44 && budget < 0.9 && L.ok;
  v.detail = fmt("constants %s, %d step-2 checks, %d failing, max budget %.4f (< 0.9)", exact ? "exact" : "WRONG", step2,
                 bad, budget);
  return v;
}

// ------------------------------------------------------------------ 6
Verdict c6() {
  Verdict v;
  double worst = 1e300;
  int bad = 0;
  for (const auto& k : kv_random_cases(200, 20240611ull)) {
    auto r = kv_inequality_check(k.f, k.df, k.a, k.b, 1e-10);
    worst = std::min(worst, r.slack / r.scale);
    if (!r.ok) ++bad;
  }
  auto c = kv_inequality_check([](double) { return 2.5; }, [](double) { return 0.0; }, -1.3, 4.0);
  auto l = kv_inequality_check([](double y) { return 3 * y - 1; }, [](double) { return 3.0; }, -1.3, 4.0);
  double ec = std::abs(c.slack) / c.scale, el = std::abs(l.slack) / l.scale;
  v.pass = bad == 0 && ec <= 1e-12 && el <= 1e-12;
  v.detail = fmt("200 random cases, min slack/scale %.3e, %d below -1e-10; equality cases %.1e, %.1e", worst, bad, ec,
                 el);
  return v;
}

// ------------------------------------------------------------------ 7, 8
struct Level {
  int N;
  double dt;
};
const Level kLevels[3] = {{4096, 0.02}, {8192, 0.01}, {16384, 0.005}};

std::vector<RunResult> g_gauss;  // criterion 7 gaussian runs, reused by 8

SimConfig default_sim(const Perturbation& p, int level) {
  SimConfig c = sim_config_from(default_config());
  c.perturbation = p;
  c.N = kLevels[level].N;
  c.dt = kLevels[level].dt;
  c.snapshot_every = 100 << level;
  return c;
}

Verdict c7() {
  Verdict v;
  const Profile& p = profile_for(0.45);
  struct Case {
    const char* name;
    Perturbation pert;
  };
  Case cases[2] = {{"gaussian", Perturbation::gaussian(0.3, 2.0, 0.0)}, {"shifted-profile", Perturbation::shifted(1.0)}};
  std::string summary;
  for (const auto& cs : cases) {
    double viol[3], band[3], key1[3], proof[3], init = 0;
    for (int k = 0; k < 3; ++k) {
      SimConfig c = default_sim(cs.pert, k);
      if (std::string(cs.name) != "gaussian") c.snapshot_every = 0;
      auto R = Simulation(c, p).run();
      viol[k] = R.verdict.max_violation;
      band[k] = R.verdict.band;
      key1[k] = R.verdict.key1_max_abs;
      proof[k] = R.verdict.max_violation_proof;
      init = R.verdict.initial;
      note(fmt("%s N=%d dt=%.3f: violation %.3e band %.3e key1 %.3e | half-shift-coefficient functional violation "
               "%.3e",
               cs.name, c.N, c.dt, viol[k], band[k], key1[k], proof[k]));
      if (std::string(cs.name) == "gaussian") g_gauss.push_back(std::move(R));
    }
    const double zero = 1e-12 * init;
    bool in_band = viol[0] <= band[0] && viol[1] <= band[1] && viol[2] <= band[2];
    bool shrink = true;
    for (int k = 0; k < 2; ++k)
      if (viol[k] > zero && viol[k + 1] > viol[k] / 3) shrink = false;
    double o1 = std::log2(key1[0] / key1[1]), o2 = std::log2(key1[1] / key1[2]);
    bool order = o1 >= 1.8 && o2 >= 1.8;
    note(fmt("%s: key1 observed orders %.2f, %.2f", cs.name, o1, o2));
    bool ok = in_band && shrink && order;
    v.pass = v.pass && ok;
    summary += fmt("%s[viol %.2e/%.2e/%.2e %s%s%s; half-shift-coefficient form max %.1e] ", cs.name, viol[0], viol[1],
                   viol[2], in_band ? "" : "above band ", shrink ? "" : "no shrink ", order ? "" : "key1 order low",
                   std::max({proof[0], proof[1], proof[2]}));
  }
  v.detail = summary;
  return v;
}

Verdict c8() {
  Verdict v;
  if (g_gauss.size() < 3) {
    // standalone: base runs at the first two levels plus the third for the error estimate
    for (int k = 0; k < 3; ++k)
      g_gauss.push_back(Simulation(default_sim(Perturbation::gaussian(0.3, 2.0, 0.0), k), profile_for(0.45)).run());
  }
  const Profile& p = profile_for(0.45);
  double dX[2], du[2], eX[2], eu[2];
  for (int k = 0; k < 2; ++k) {
    auto e = richardson_error(g_gauss[k], g_gauss[k + 1]);
    auto half = scaled_run(default_sim(Perturbation::gaussian(0.3, 2.0, 0.0), k), p, 0.5);
    auto d = verify_scaling(half, g_gauss[k], 0.5);
    dX[k] = d.max_dX;
    du[k] = d.max_du;
    eX[k] = e.X;
    eu[k] = e.u;
    note(fmt("N=%d dt=%.3f: dev X %.3e u %.3e | base error X %.3e u %.3e (%d times, %d fields)", kLevels[k].N,
             kLevels[k].dt, dX[k], du[k], eX[k], eu[k], d.time_samples, d.field_samples));
  }
  bool within = true;
  for (int k = 0; k < 2; ++k) within = within && dX[k] <= 5 * eX[k] && du[k] <= 5 * eu[k];
  double sX = dX[0] / dX[1], su = du[0] / du[1];
  v.pass = within && sX >= 3 && su >= 3;
  v.detail = fmt("deviation <= 5x base error: %s; shrink X %.2fx u %.2fx (>= 3x)", within ? "yes" : "NO", sX, su);
  return v;
}

// ------------------------------------------------------------------ 9
Verdict c9() {
  Verdict v;
  json cfg = default_config();
  SimConfig base = limit_config_from(cfg);
  auto nus = cfg["limit"]["nu_list"].get<std::vector<double>>();
  Normalized nm = normalize(base.params);
  Profile p = build_profile(nm.params);
  auto L = nu_sweep(base, p, nus, 1);
  for (const auto& r : L.runs)
    note(fmt("nu=%.4f excess %.4e  a*sqrt(nu) %.4e  (excess over the unscaled datum distance %.4e)", r.nu, r.excess_max,
             L.fit.slope * std::sqrt(r.nu), r.literal_excess));
  v.pass = nus.size() == 4 && !L.fit.degenerate && L.fit.slope > 0 && L.fit.residual < 0.2;
  v.detail = fmt("a=%.4e, relative fit residual %.2e (< 0.20)", L.fit.slope, L.fit.residual);
  return v;
}

// ------------------------------------------------------------------ 10
Verdict c10() {
  Verdict v;
  fs::path root = fs::temp_directory_path() / ("shocklab_accept_" + std::to_string(::getpid()));
  struct Cmd {
    const char* name;
    std::vector<std::pair<std::string, std::string>> sets;
    int jobs;
  };
  std::vector<Cmd> cmds = {
      {"profile", {}, 1},
      {"verify", {}, 1},
      {"simulate",
       {{"sim.N", "1024"}, {"sim.L_dom", "40"}, {"sim.T", "4"}, {"sim.perturbation.kind", "random-fourier"},
        {"sim.perturbation.seed", "17"}, {"sim.checkpoint", "true"}},
       1},
      {"limit",
       {{"limit.N", "2048"}, {"limit.L_dom", "40"}, {"limit.T", "1"}, {"limit.dt", "0.005"}, {"limit.nu_list", "[1,0.5,0.25]"}},
       2},
  };
  int files = 0;
  for (const auto& c : cmds) {
    json cfg = default_config();
    for (const auto& [k, val] : c.sets) set_dotted(cfg, k, val);
    for (int rep = 0; rep < 2; ++rep) {
      CommandContext ctx;
      ctx.cfg = cfg;
      ctx.out = root / (std::string(c.name) + std::to_string(rep));
      ctx.jobs = c.jobs;
      ctx.quiet = true;
      std::string err;
      int code = run_command(c.name, ctx, &err);
      if (code != 0) {
        note(fmt("%s exited %d: %s", c.name, code, err.c_str()));
        v.pass = false;
      }
    }
    for (const auto& e : fs::directory_iterator(root / (std::string(c.name) + "0"))) {
      auto ext = e.path().extension();
      if (ext != ".csv" && ext != ".json" && ext != ".bin") continue;
      fs::path other = root / (std::string(c.name) + "1") / e.path().filename();
      ++files;
      if (!fs::exists(other) || read_text(e.path()) != read_text(other)) {
        note(fmt("%s: %s differs", c.name, e.path().filename().c_str()));
        v.pass = false;
      }
    }
  }
  fs::remove_all(root);
  v.detail = fmt("%d CSV/JSON/binary outputs compared across two runs of each command", files);
  return v;
}

std::set<int> read_expected(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::set<int> out;
  std::string line;
  while (std::getline(f, line)) {
    auto h = line.find('#');
    if (h != std::string::npos) line.resize(h);
    std::istringstream ss(line);
    int n;
    if (ss >> n) out.insert(n);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, expected;
  bool have_expected = false;
  for (int k = 1; k < argc; ++k) {
    std::string a = argv[k];
    if (a == "--only" && k + 1 < argc) {
      std::stringstream ss(argv[++k]);
      std::string t;
      while (std::getline(ss, t, ',')) only.insert(std::stoi(t));
    } else if (a == "--expected-failures" && k + 1 < argc) {
      expected = read_expected(argv[++k]);
      have_expected = true;
    } else {
      std::fprintf(stderr, "usage: acceptance [--only 1,2,...] [--expected-failures FILE]\n");
      return 2;
    }
  }
  std::vector<std::pair<int, std::function<Verdict()>>> all = {{1, c1}, {2, c2}, {3, c3}, {4, c4}, {5, c5},
                                                               {6, c6}, {7, c7}, {8, c8}, {9, c9}, {10, c10}};
  std::set<int> failed, ran;
  std::vector<std::string> lines;
  for (auto& [n, fn] : all) {
    if (!only.empty() && !only.count(n)) continue;
    std::printf("criterion %d:\n", n);
    std::fflush(stdout);
    auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ran.insert(n);
    if (!v.pass) failed.insert(n);
    lines.push_back(fmt("criterion %2d: %s  %s (%.1f s)", n, v.pass ? "PASS" : "FAIL", v.detail.c_str(), el));
    std::printf("%s\n", lines.back().c_str());
    std::fflush(stdout);
  }
  std::printf("\nsummary\n");
  for (const auto& l : lines) std::printf("%s\n", l.c_str());
  if (!have_expected) return failed.empty() ? 0 : 1;
  std::set<int> exp_ran;
  for (int n : expected)
    if (ran.count(n)) exp_ran.insert(n);
  bool match = exp_ran == failed;
  std::printf("failing set %s the recorded expected failures\n", match ? "matches" : "DOES NOT match");
  return match ? 0 : 1;
}
