// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

// penflow <command> --config <path> [--out <dir>] [--seed <u64>] [--override key=value ...]

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "penflow/penflow.h"

namespace {

const char* kind_of(int code) {
  switch (code) {
    case PF_ERR_VALIDATION: return "validation";
    case PF_ERR_SOLVER: return "solver";
    case PF_ERR_IO: return "io";
    default: return "unknown";
  }
}

int fail(int code, const std::string& message) {
  const nlohmann::json record = {
      {"error", {{"code", code}, {"kind", kind_of(code)}, {"message", message}}}};
  std::cerr << record.dump() << "\n";
  return code;
}

// Takes ownership of a library-allocated string.
std::string take(char* s) {
  std::string out = s != nullptr ? s : "";
  pf_string_free(s);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal inflow control with undersupply penalty under stochastic demand"};
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool print_config = false;
  bool print_provenance = false;

  app.add_option("command", command, "solve | mc | figures | selfcheck")
      ->required()
      ->check(CLI::IsMember({"solve", "mc", "figures", "selfcheck"}));
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo seed (overrides montecarlo.seed)");
  app.add_option("--override", overrides, "section.key=value, applied after parsing")
      ->take_all();
  app.add_flag("--print-config", print_config, "print the resolved configuration as JSON");
  app.add_flag("--provenance", print_provenance, "list every field with its default flag");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(PF_ERR_VALIDATION, e.what());
  }

  if (*seed_opt) overrides.push_back("montecarlo.seed=" + std::to_string(seed));
  if (!out_dir.empty()) overrides.push_back("output.dir=" + nlohmann::json(out_dir).dump());

  std::vector<const char*> raw;
  for (const std::string& o : overrides) raw.push_back(o.c_str());

  pf_config* cfg = nullptr;
  if (const pf_status st = pf_config_load(config_path.c_str(), raw.data(), raw.size(), &cfg);
      st != PF_OK) {
    return fail(st, pf_last_error());
  }

  if (print_config) {
    char* text = nullptr;
    pf_config_to_json(cfg, &text);
    std::cout << take(text);
  }
  if (print_provenance) {
    char* text = nullptr;
    pf_config_provenance(cfg, &text);
    std::cout << take(text);
  }

  char* summary = nullptr;
  const pf_status st = pf_run_command(cfg, command.c_str(), nullptr, &summary);
  std::cout << take(summary);
  std::cout.flush();
  const int code = st == PF_OK ? 0 : fail(st, pf_last_error());
  pf_config_free(cfg);
  return code;
}
