// Run configuration: JSON document with defaults, dotted-path overrides and
// conversion to the typed option blocks.
#pragma once

#include <string>
#include <vector>

#include "shocklab/io.hpp"
#include "shocklab/pde.hpp"
#include "shocklab/profile.hpp"
#include "shocklab/verify.hpp"

namespace shocklab {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline json default_config() {
  return json::parse(R"({
  "seed": 1,
  "tol_scale": 1.0,
  "params": {"eps": 1.0, "delta": 0.45, "u_minus": 1.0, "u_plus": -1.0, "A": 0.5},
  "profile": {"max_extrema": 12, "resolve_floor": 1e-12, "tail_stop": 1e-13, "eta_rel": 1e-8},
  "verify": {
    "kappas": [0.30, 0.38, 0.45],
    "A": 0.5,
    "samples": 512,
    "margin_tol": 1e-7,
    "k_dec": 0.9166666666666666,
    "lambda_bar0": null,
    "table_A": [0.3333333333333333, 0.5, 0.6666666666666666, 0.75, 1.0]
  },
  "sim": {
    "L_dom": 150.0, "center": 0.0, "N": 4096, "dt": 0.02, "T": 50.0,
    "M": 1.3333333333333333, "order": 2, "output_every": 0, "band_C": 1.0,
    "checkpoint": false,
    "perturbation": {"kind": "gaussian", "amplitude": 0.3, "width": 2.0, "center": 0.0,
                     "h": 1.0, "seed": 1, "modes": 6}
  },
  "limit": {
    "nu_list": [1.0, 0.5, 0.25, 0.125],
    "L_dom": 150.0, "N": 16384, "dt": 0.008, "T": 50.0,
    "perturbation": {"kind": "gaussian", "amplitude": -0.3, "width": 2.0, "center": 1.5,
                     "h": 1.0, "seed": 1, "modes": 6}
  }
})");
}

// JSON schema for the document above.
inline json config_schema() {
  auto num = json{{"type", "number"}};
  auto integer = json{{"type", "integer"}};
  json pert = {{"type", "object"},
               {"properties",
                {{"kind", {{"enum", {"none", "gaussian", "shifted-profile", "random-fourier"}}}},
                 {"amplitude", num}, {"width", num}, {"center", num}, {"h", num},
                 {"seed", integer}, {"modes", integer}}}};
  return {
      {"$schema", "https://json-schema.org/draft/2020-12/schema"},
      {"title", "shocklab run configuration"},
      {"type", "object"},
      {"properties",
       {{"seed", integer},
        {"tol_scale", num},
        {"params",
         {{"type", "object"},
          {"properties", {{"eps", num}, {"delta", num}, {"u_minus", num}, {"u_plus", num}, {"A", num}}}}},
        {"profile",
         {{"type", "object"},
          {"properties", {{"max_extrema", integer}, {"resolve_floor", num}, {"tail_stop", num}, {"eta_rel", num}}}}},
        {"verify",
         {{"type", "object"},
          {"properties",
           {{"kappas", {{"type", "array"}, {"items", num}}},
            {"A", num},
            {"samples", integer},
            {"margin_tol", num},
            {"k_dec", num},
            {"lambda_bar0", {{"type", {"number", "null"}}}},
            {"table_A", {{"type", "array"}, {"items", num}}}}}}},
        {"sim",
         {{"type", "object"},
          {"properties",
           {{"L_dom", num}, {"center", num}, {"N", integer}, {"dt", num}, {"T", num}, {"M", num},
            {"order", {{"enum", {2, 4}}}}, {"output_every", integer}, {"band_C", num},
            {"checkpoint", {{"type", "boolean"}}}, {"perturbation", pert}}}}},
        {"limit",
         {{"type", "object"},
          {"properties",
           {{"nu_list", {{"type", "array"}, {"items", num}}}, {"L_dom", num}, {"N", integer},
            {"dt", num}, {"T", num}, {"perturbation", pert}}}}}}}};
}

// Sets a dotted path ("sim.perturbation.kind") from text; the text is parsed
// as JSON when possible and taken as a string otherwise.
inline void set_dotted(json& cfg, const std::string& path, const std::string& text) {
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    std::size_t dot = path.find('.', start);
    std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("empty key in path '" + path + "'");
    if (!node->is_object()) throw ConfigError("'" + path + "' does not name an object field");
    if (!node->contains(key)) throw ConfigError("unknown config field '" + path + "'");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (!node->is_null() && !value.is_null() && node->is_number() != value.is_number())
    throw ConfigError("type mismatch for '" + path + "'");
  *node = value;
}

// Overlays a user document onto the defaults, rejecting unknown fields.
inline json merge_config(const json& base, const json& user, const std::string& at = "") {
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  json out = base;
  for (auto it = user.begin(); it != user.end(); ++it) {
    std::string p = at.empty() ? it.key() : at + "." + it.key();
    if (!out.contains(it.key())) throw ConfigError("unknown config field '" + p + "'");
    if (out[it.key()].is_object() && it.value().is_object())
      out[it.key()] = merge_config(out[it.key()], it.value(), p);
    else
      out[it.key()] = it.value();
  }
  return out;
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

inline ShockParams params_from(const json& cfg) {
  const json& p = cfg.at("params");
  ShockParams P;
  P.eps = get<double>(p, "eps");
  P.delta = get<double>(p, "delta");
  P.u_minus = get<double>(p, "u_minus");
  P.u_plus = get<double>(p, "u_plus");
  P.A = get<double>(p, "A");
  return P;
}

inline ProfileOptions profile_options_from(const json& cfg) {
  const json& p = cfg.at("profile");
  ProfileOptions o;
  o.max_extrema = get<int>(p, "max_extrema");
  o.resolve_floor = get<double>(p, "resolve_floor");
  o.tail_stop = get<double>(p, "tail_stop");
  o.eta_rel = get<double>(p, "eta_rel");
  double f = get<double>(cfg, "tol_scale");
  if (!(f > 0)) throw ConfigError("tol_scale must be positive");
  o.tol = o.tol.scaled(f);
  return o;
}

inline Perturbation perturbation_from(const json& p) {
  std::string kind = get<std::string>(p, "kind");
  Perturbation q;
  q.amplitude = get<double>(p, "amplitude");
  q.width = get<double>(p, "width");
  q.center = get<double>(p, "center");
  q.h = get<double>(p, "h");
  q.seed = get<std::uint64_t>(p, "seed");
  q.modes = get<int>(p, "modes");
  if (kind == "none") q.kind = Perturbation::Kind::none;
  else if (kind == "gaussian") q.kind = Perturbation::Kind::gaussian;
  else if (kind == "shifted-profile") q.kind = Perturbation::Kind::shifted_profile;
  else if (kind == "random-fourier") q.kind = Perturbation::Kind::random_fourier;
  else throw ConfigError("unknown perturbation kind '" + kind + "'");
  if (q.kind == Perturbation::Kind::gaussian && !(q.width > 0)) throw ConfigError("gaussian width must be positive");
  if (q.kind == Perturbation::Kind::random_fourier && q.modes < 1) throw ConfigError("modes must be >= 1");
  return q;
}

inline SimConfig sim_config_from(const json& cfg) {
  const json& s = cfg.at("sim");
  SimConfig c;
  c.params = params_from(cfg);
  c.L_dom = get<double>(s, "L_dom");
  c.center = get<double>(s, "center");
  c.N = get<int>(s, "N");
  c.dt = get<double>(s, "dt");
  c.T = get<double>(s, "T");
  c.M = get<double>(s, "M");
  c.order = get<int>(s, "order");
  c.output_every = get<int>(s, "output_every");
  c.lyapunov_band_C = get<double>(s, "band_C");
  c.perturbation = perturbation_from(s.at("perturbation"));
  return c;
}

inline SimConfig limit_config_from(const json& cfg) {
  const json& l = cfg.at("limit");
  SimConfig c = sim_config_from(cfg);
  c.L_dom = get<double>(l, "L_dom");
  c.N = get<int>(l, "N");
  c.dt = get<double>(l, "dt");
  c.T = get<double>(l, "T");
  c.perturbation = perturbation_from(l.at("perturbation"));
  return c;
}

inline VerifyOptions verify_options_from(const json& cfg) {
  const json& v = cfg.at("verify");
  VerifyOptions o;
  o.samples = get<int>(v, "samples");
  o.margin_tol = get<double>(v, "margin_tol");
  if (!v.at("lambda_bar0").is_null()) o.lambda_bar0_override = get<double>(v, "lambda_bar0");
  return o;
}

}  // namespace shocklab
