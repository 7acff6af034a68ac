// Batch commands behind the shocklab CLI.
#pragma once

#include <filesystem>
#include <string>

#include "shocklab/io.hpp"

namespace shocklab {

enum ExitCode : int { kOk = 0, kInternal = 1, kCertificateFailure = 2, kRejected = 3 };

struct CommandContext {
  json cfg;                       // merged configuration
  std::filesystem::path out = "out";
  int jobs = 1;
  bool quiet = false;
};

int cmd_profile(const CommandContext& ctx);
int cmd_verify(const CommandContext& ctx);
int cmd_simulate(const CommandContext& ctx);
int cmd_limit(const CommandContext& ctx);

// Runs a command by name, mapping exceptions onto the exit-code contract.
int run_command(const std::string& name, const CommandContext& ctx, std::string* error = nullptr);

}  // namespace shocklab
