// shocklab command-line front end.
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shocklab/commands.hpp"
#include "shocklab/config.hpp"

using namespace shocklab;

int main(int argc, char** argv) {
  CLI::App app{"KdV-Burgers oscillatory shock laboratory"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out";
  long long seed = -1;
  int jobs = 1;
  double tol_scale = 0;
  std::vector<std::string> sets;
  bool quiet = false, print_config = false, print_schema = false;
  std::string lambda_bar0;

  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "output directory (SHOCKLAB_OUT overrides)");
  app.add_option("--seed", seed, "random seed for random-fourier perturbations");
  app.add_option("--jobs", jobs, "parallel worker runs for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--tol-scale", tol_scale, "scale factor for the ODE tolerances")->check(CLI::PositiveNumber);
  app.add_option("--set", sets, "override a config field: dotted.path=value")->take_all();
  app.add_flag("--quiet", quiet, "suppress progress messages");
  app.add_flag("--print-config", print_config, "print the merged configuration and exit");
  app.add_flag("--print-schema", print_schema, "print the configuration schema and exit");
  app.add_option("--debug-lambda-bar0", lambda_bar0, "override the first parabola constant (falsification path)");
  for (const char* c : {"profile", "verify", "simulate", "limit"}) app.add_subcommand(c)->fallthrough();
  app.fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kRejected;
  }

  CommandContext ctx;
  ctx.jobs = jobs;
  ctx.quiet = quiet;
  try {
    json cfg = default_config();
    if (!config_path.empty()) cfg = merge_config(cfg, json::parse(read_text(config_path)));
    if (seed >= 0) {
      cfg["seed"] = seed;
      cfg["sim"]["perturbation"]["seed"] = seed;
      cfg["limit"]["perturbation"]["seed"] = seed;
    }
    if (tol_scale > 0) cfg["tol_scale"] = tol_scale;
    if (!lambda_bar0.empty()) set_dotted(cfg, "verify.lambda_bar0", lambda_bar0);
    for (const auto& s : sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects path=value, got '" + s + "'");
      set_dotted(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    if (print_schema) {
      std::printf("%s\n", config_schema().dump(2).c_str());
      return kOk;
    }
    if (print_config) {
      std::printf("%s\n", cfg.dump(2).c_str());
      return kOk;
    }
    ctx.cfg = cfg;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRejected;
  }
  if (const char* env = std::getenv("SHOCKLAB_OUT"); env && *env) out_dir = env;
  ctx.out = out_dir;

  std::string cmd = app.get_subcommands().front()->get_name();
  std::string err;
  int code = run_command(cmd, ctx, &err);
  if (!err.empty()) std::fprintf(stderr, "error: %s\n", err.c_str());
  return code;
}
