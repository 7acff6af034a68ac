#include "shocklab/commands.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "shocklab/config.hpp"
#include "shocklab/limits.hpp"
#include "shocklab/pde.hpp"
#include "shocklab/profile.hpp"
#include "shocklab/svg.hpp"
#include "shocklab/verify.hpp"

namespace shocklab {

namespace fs = std::filesystem;

namespace {

const char* kShiftNote =
    "shift rate uses Xdot = -(2M/(u_- - u_+)) * int w u~' dx; the plus-sign variant of the "
    "definition is not dissipative and is not used";

void say(const CommandContext& ctx, const std::string& s) {
  if (!ctx.quiet) std::fprintf(stderr, "%s\n", s.c_str());
}

json cert_json(const InequalityCertificate& c) {
  json k = json::object();
  for (const auto& [name, v] : c.constants) k[name] = v;
  return {{"name", c.name},
          {"interval", c.index},
          {"lo", c.lo},
          {"hi", c.hi},
          {"margin", c.margin},
          {"margin_refined", c.margin_refined},
          {"rel_margin", c.rel_margin},
          {"scale", c.scale},
          {"argmin", c.argmin},
          {"pass", c.pass},
          {"status", to_string(c.status)},
          {"samples", c.samples},
          {"constants_used", k},
          {"note", c.note}};
}

json extrema_json(const Profile& p) {
  json a = json::array();
  for (const auto& e : p.extrema)
    a.push_back({{"i", e.i}, {"xi", e.xi}, {"u", e.u}, {"kind", e.kind()}, {"resolved", e.i < p.n_resolved}});
  return a;
}

json markers_json(const Profile& p) {
  json m = json::object();
  m["xi_s"] = p.markers.xi_s ? json(*p.markers.xi_s) : json(nullptr);
  json per = json::array();
  for (const auto& s : p.markers.per_i)
    per.push_back({{"i", s.i}, {"xi_sup", s.xi_sup}, {"xi_star", s.xi_star}, {"xi_starstar", s.xi_starstar}});
  m["per_interval"] = per;
  return m;
}

json params_json(const ShockParams& P) {
  return {{"eps", P.eps}, {"delta", P.delta}, {"u_minus", P.u_minus}, {"u_plus", P.u_plus}, {"A", P.A},
          {"kappa", P.kappa()}, {"sigma", P.sigma()}, {"s", P.s()}};
}

}  // namespace

// ------------------------------------------------------------------ profile

int cmd_profile(const CommandContext& ctx) {
  const json& cfg = ctx.cfg;
  ShockParams raw = params_from(cfg);
  Normalized nm = normalize(raw);
  Profile p = build_profile(nm.params, profile_options_from(cfg));
  say(ctx, "profile: kappa=" + std::to_string(nm.params.kappa()) + ", " + std::to_string(p.extrema.size()) +
               " extrema, " + std::to_string(p.n_resolved) + " resolved");

  CsvWriter csv({"xi", "u", "du", "energy"});
  for (std::size_t k = 0; k < p.xi.size(); ++k) csv.row({p.xi[k], p.u[k], p.du[k], p.energy[k]});
  write_text(ctx.out / "profile.csv", csv.str());

  json j;
  j["provenance"] = provenance(cfg, "profile");
  j["params_physical"] = params_json(raw);
  j["params_normalized"] = params_json(nm.params);
  j["frame"] = {{"sigma", nm.map.sigma}, {"eps", nm.map.eps}, {"reflected", nm.map.reflected}};
  j["oscillatory"] = nm.params.oscillatory();
  j["extrema"] = extrema_json(p);
  j["n_resolved"] = p.n_resolved;
  j["markers"] = markers_json(p);
  j["tail"] = {{"xi_left", p.xi_left}, {"xi_right", p.xi_right}, {"eta", p.eta}, {"lambda_s", p.lambda_s},
               {"left_linear", p.tail_linear}, {"left_l2", p.left_tail_l2()}, {"right_l2", p.right_tail_l2()}};
  auto ev = equilibrium_eigen(nm.params);
  j["eigen"] = {{"saddle_stable", ev.saddle_stable},
                {"saddle_unstable", ev.saddle_unstable},
                {"focus_re", ev.focus_plus.real()},
                {"focus_im", ev.focus_plus.imag()},
                {"focus_complex", ev.focus_complex}};
  if (nm.params.oscillatory()) {
    auto dr = linearized_decay_ratio(nm.params);
    j["linear_half_oscillation_ratio"] = {{"eigen", dr.eigen}, {"printed_formula", dr.printed}};
  }
  write_json(ctx.out / "profile.json", j);

  // figures
  SvgPlot ph;
  ph.title = "phase plane (u, u')";
  ph.xlabel = "u";
  ph.ylabel = "u'";
  ph.add({p.u, p.du, "#1f77b4", "heteroclinic orbit"});
  SvgSeries eq{{nm.params.u_plus, nm.params.u_minus}, {0.0, 0.0}, "#d62728", "equilibria", 1.5, false, true};
  ph.add(eq);
  write_text(ctx.out / "phase.svg", ph.render());

  SvgPlot pr;
  pr.title = "profile u(xi)";
  pr.xlabel = "xi";
  pr.ylabel = "u";
  pr.add({p.xi, p.u, "#1f77b4", "u"});
  if (!p.extrema.empty()) {
    SvgSeries ex;
    ex.points = true;
    ex.color = "#d62728";
    ex.label = "extrema";
    for (const auto& e : p.extrema) {
      if (e.i >= p.n_resolved) continue;
      ex.x.push_back(e.xi);
      ex.y.push_back(e.u);
      pr.label(e.xi, e.u, "u" + std::to_string(e.i));
    }
    if (!ex.x.empty()) pr.add(ex);
  }
  write_text(ctx.out / "profile.svg", pr.render());
  return kOk;
}

// ------------------------------------------------------------------- verify

int cmd_verify(const CommandContext& ctx) {
  const json& cfg = ctx.cfg;
  const json& v = cfg.at("verify");
  const double A = get<double>(v, "A");
  VerifyOptions vo = verify_options_from(cfg);
  ProfileOptions po = profile_options_from(cfg);
  const double k_dec = get<double>(v, "k_dec");
  std::vector<double> kappas = v.at("kappas").get<std::vector<double>>();
  if (kappas.empty()) {
    Normalized nm = normalize(params_from(cfg));
    kappas.push_back(nm.params.kappa());
  }

  bool ok = true;
  json bundle;
  bundle["provenance"] = provenance(cfg, "verify");
  bundle["A"] = A;
  bundle["note"] = "floating-point certificates on sampled points; not interval-arithmetic proofs";
  if (vo.lambda_bar0_override) bundle["debug_lambda_bar0"] = *vo.lambda_bar0_override;
  json runs = json::array();
  std::map<double, std::pair<double, double>> measured;  // kappa -> (min inc, min dec)
  for (double kappa : kappas) {
    ShockParams P = normalized_params(kappa, 1.0, A);
    P.validate_ceiling();
    Profile p = build_profile(P, po);
    VerifyBundle b = verify_profile(p, A, vo, k_dec);
    bool pass = b.all_pass();
    ok = ok && pass;
    json r;
    r["kappa"] = kappa;
    r["params"] = params_json(P);
    r["n_resolved"] = p.n_resolved;
    r["u0"] = b.u0;
    r["u0_bound"] = b.u0_bound;
    r["u0_ok"] = b.u0_ok;
    json cs = json::array();
    for (const auto& c : b.certs) cs.push_back(cert_json(c));
    r["certificates"] = cs;
    r["decay"] = {{"ratios_inc", b.decay.ratios_inc},
                  {"ratios_dec", b.decay.ratios_dec},
                  {"rho_star", b.decay.rho_star},
                  {"rho_upper", b.decay.rho_upper},
                  {"ok", b.decay_ok}};
    json l2 = json::array();
    for (const auto& iv : b.l2.intervals)
      l2.push_back({{"i", iv.i}, {"value", iv.value}, {"bound", iv.bound}, {"quad_error", iv.quad_error},
                    {"status", to_string(iv.status)}});
    r["l2"] = {{"intervals", l2},
               {"left_tail", b.l2.left_tail},
               {"left_tail_bound", b.l2.left_tail_bound},
               {"left_tail_error", b.l2.left_tail_error},
               {"left_tail_status", to_string(b.l2.left_tail_status)}};
    r["pass"] = pass;
    runs.push_back(r);
    measured[kappa] = {b.decay.min_inc(), b.decay.min_dec()};
    say(ctx, "verify: kappa=" + std::to_string(kappa) + (pass ? " pass" : " FAIL"));
  }
  bundle["profiles"] = runs;

  InductionLedger L = induction_ledger(21, get<double>(cfg.at("sim"), "M"));
  json lc = json::array();
  for (const auto& c : L.checks)
    lc.push_back({{"name", c.name}, {"i", c.i}, {"value", c.value}, {"claim", c.claim}, {"ok", c.ok}});
  bundle["induction"] = {{"a1", L.a.size() > 1 ? L.a[1] : 0.0},
                         {"C0", L.C0},
                         {"C1", L.C1},
                         {"C0_required", L.C0_required},
                         {"M_min", L.M_min},
                         {"budget_claimed", L.budget_claimed},
                         {"budget_exact", L.budget_exact},
                         {"checks", lc},
                         {"ok", L.ok}};
  ok = ok && L.ok;

  // decay-rate table
  CsvWriter t({"A", "rho_star_claimed", "rho_star_measured_min", "rho_upper_claimed", "rho_upper_measured_min",
               "rho_star_root", "rho_upper_root", "u0_bound_over_s"});
  json rows = json::array();
  for (double a : v.at("table_A").get<std::vector<double>>()) {
    const Table1Row& row = table1_row(a);
    double mi = std::numeric_limits<double>::infinity(), md = mi;
    for (const auto& [kappa, m] : measured)
      if (kappa < a) {
        mi = std::min(mi, m.first);
        md = std::min(md, m.second);
      }
    double rs = rho_star_root(a, row.alpha0), ru = rho_upper_root(a);
    double u0b = 1.0 + u0_closed_bound(a, 1.0);
    t.row({a, row.rho_star, std::isfinite(mi) ? mi : NAN, row.rho_upper, std::isfinite(md) ? md : NAN, rs, ru, u0b});
    bool dom = (!std::isfinite(mi) || mi >= row.rho_star - vo.margin_tol) &&
               (!std::isfinite(md) || md >= row.rho_upper - vo.margin_tol);
    rows.push_back({{"A", a},
                    {"rho_star_claimed", row.rho_star},
                    {"rho_upper_claimed", row.rho_upper},
                    {"rho_star_measured_min", std::isfinite(mi) ? json(mi) : json(nullptr)},
                    {"rho_upper_measured_min", std::isfinite(md) ? json(md) : json(nullptr)},
                    {"rho_star_root", rs},
                    {"rho_upper_root", ru},
                    {"u0_bound_over_s", u0b},
                    {"dominated", dom}});
  }
  bundle["table"] = rows;
  bundle["pass"] = ok;
  write_text(ctx.out / "table1.csv", t.str());
  write_json(ctx.out / "certificates.json", bundle);
  return ok ? kOk : kCertificateFailure;
}

// ----------------------------------------------------------------- simulate

namespace {

std::string trace_csv(const RunResult& R) {
  CsvWriter c({"t", "l2w2", "shift_term_cum", "dissipation_cum", "lyapunov_total", "X", "Xdot", "key1_residual"});
  for (const auto& r : R.trace)
    c.row({r.t, r.l2w2, r.shift_term_cum, r.dissipation_cum, r.lyapunov_total, r.X, r.Xdot, r.key1_residual});
  return c.str();
}

json verdict_json(const RunResult& R) {
  const auto& V = R.verdict;
  return {{"pass", V.pass},
          {"max_violation", V.max_violation},
          {"band", V.band},
          {"initial_total", V.initial},
          {"max_violation_half_shift_coefficient", V.max_violation_proof},
          {"key1_residual_max_abs", V.key1_max_abs},
          {"xdot_running_max", V.xdot_running_max},
          {"xdot_last_quarter_max", V.xdot_last_quarter_max},
          {"xdot_final", V.xdot_final},
          {"xdot_final_below_running_max", std::abs(V.xdot_final) < V.xdot_running_max},
          {"final_X", R.final_state.X},
          {"dx", R.dx},
          {"dt", R.dt},
          {"steps", R.steps}};
}

}  // namespace

int cmd_simulate(const CommandContext& ctx) {
  const json& cfg = ctx.cfg;
  SimConfig sc = sim_config_from(cfg);
  Normalized nm = normalize(sc.params);
  Profile p = build_profile(nm.params, profile_options_from(cfg));
  Simulation sim(sc, p);
  RunResult R = sim.run();
  write_text(ctx.out / "trace.csv", trace_csv(R));
  json v = verdict_json(R);
  v["provenance"] = provenance(cfg, "simulate");
  v["perturbation"] = to_string(sc.perturbation.kind);
  v["shift_sign"] = kShiftNote;
  write_json(ctx.out / "verdict.json", v);
  if (get<bool>(cfg.at("sim"), "checkpoint")) {
    json h = {{"config", cfg}, {"provenance", provenance(cfg, "simulate")}, {"t", R.final_state.t},
              {"X", R.final_state.X}, {"x0", sim.x().front()}, {"dx", sim.dx()}};
    write_checkpoint(ctx.out / "final", h, R.final_state.u);
  }

  SvgPlot pl;
  pl.title = "contraction functional";
  pl.xlabel = "t";
  pl.ylabel = "value";
  std::vector<double> t, tot, l2, sh, di;
  for (const auto& r : R.trace) {
    t.push_back(r.t);
    tot.push_back(r.lyapunov_total);
    l2.push_back(r.l2w2);
    sh.push_back(r.shift_term_cum);
    di.push_back(r.dissipation_cum);
  }
  pl.add({t, tot, "#000000", "total", 2.0});
  pl.add({t, l2, "#1f77b4", "||w||^2"});
  pl.add({t, sh, "#2ca02c", "shift term", 1.5, true});
  pl.add({t, di, "#d62728", "dissipation", 1.5, true});
  write_text(ctx.out / "lyapunov.svg", pl.render());
  say(ctx, std::string("simulate: ") + (R.verdict.pass ? "monotone" : "NOT monotone") +
               ", max violation " + fmt17(R.verdict.max_violation));
  return R.verdict.pass ? kOk : kCertificateFailure;
}

// -------------------------------------------------------------------- limit

int cmd_limit(const CommandContext& ctx) {
  const json& cfg = ctx.cfg;
  SimConfig base = limit_config_from(cfg);
  std::vector<double> nus = cfg.at("limit").at("nu_list").get<std::vector<double>>();
  Normalized nm = normalize(base.params);
  Profile p = build_profile(nm.params, profile_options_from(cfg));
  LimitRun L = nu_sweep(base, p, nus, ctx.jobs, true);

  json rep;
  rep["provenance"] = provenance(cfg, "limit");
  rep["shift_sign"] = kShiftNote;
  rep["excess_reference"] = "distance of the scaled initial datum u0(x/nu) to the Riemann shock";
  json per = json::array();
  for (std::size_t k = 0; k < L.runs.size(); ++k) {
    const auto& r = L.runs[k];
    per.push_back({{"nu", r.nu},
                   {"excess_max", r.excess_max},
                   {"initial_distance", r.initial_distance},
                   {"max_distance", r.max_distance},
                   {"excess_over_unscaled_datum", r.literal_excess},
                   {"final_Y", r.X.back()},
                   {"fit_slope", L.fit.slope},
                   {"fit_residual", L.fit.residual}});
    write_text(ctx.out / ("trace_nu_" + std::to_string(k) + ".csv"), trace_csv(r.run));
  }
  rep["runs"] = per;
  rep["fit"] = {{"slope", L.fit.slope},
                {"residual", L.fit.residual},
                {"degenerate", L.fit.degenerate},
                {"note", L.fit.note},
                {"bound_holds", L.monotone_bound}};
  write_json(ctx.out / "sweep.json", rep);
  if (L.fit.degenerate) std::fprintf(stderr, "limit: warning: %s\n", L.fit.note.c_str());

  SvgPlot pl;
  pl.title = "excess distance vs sqrt(nu)";
  pl.xlabel = "sqrt(nu)";
  pl.ylabel = "excess";
  SvgSeries pts;
  pts.points = true;
  pts.label = "measured";
  SvgSeries line;
  line.color = "#d62728";
  line.label = "fit a*sqrt(nu)";
  line.x.push_back(0);
  line.y.push_back(0);
  for (const auto& r : L.runs) {
    pts.x.push_back(std::sqrt(r.nu));
    pts.y.push_back(r.excess_max);
  }
  double sm = pts.x.empty() ? 1.0 : *std::max_element(pts.x.begin(), pts.x.end());
  line.x.push_back(sm);
  line.y.push_back(L.fit.slope * sm);
  pl.add(line);
  pl.add(pts);
  write_text(ctx.out / "sqrt_fit.svg", pl.render());
  say(ctx, "limit: slope " + fmt17(L.fit.slope) + ", residual " + fmt17(L.fit.residual));
  return kOk;
}

int run_command(const std::string& name, const CommandContext& ctx, std::string* error) {
  auto fail = [&](int code, const std::string& m) {
    if (error) *error = m;
    return code;
  };
  try {
    if (name == "profile") return cmd_profile(ctx);
    if (name == "verify") return cmd_verify(ctx);
    if (name == "simulate") return cmd_simulate(ctx);
    if (name == "limit") return cmd_limit(ctx);
    return fail(kRejected, "unknown command '" + name + "'");
  } catch (const ParamError& e) {
    return fail(kRejected, e.what());
  } catch (const ConfigError& e) {
    return fail(kRejected, e.what());
  } catch (const SimConfigError& e) {
    return fail(kRejected, e.what());
  } catch (const ScalingError& e) {
    return fail(kRejected, e.what());
  } catch (const json::exception& e) {
    return fail(kRejected, std::string("config: ") + e.what());
  } catch (const std::exception& e) {
    return fail(kInternal, e.what());
  }
}

}  // namespace shocklab
