// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "config.hpp"
#include "csv.hpp"

namespace penflow {

struct CommandOutcome {
  bool ok = true;  ///< false when a selfcheck fails
  std::string summary;
  std::vector<std::filesystem::path> artifacts;
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Oracle cross-checks run by the `selfcheck` command.
std::vector<CheckResult> run_selfchecks(const RunConfig& cfg);

/// Runs one of solve, mc, figures, selfcheck and writes its artifacts into out_dir.
CommandOutcome run_command(std::string_view command, const RunConfig& cfg,
                           const std::filesystem::path& out_dir);

// Table builders, exposed for tests.
CSVTable trace_table(const SolveResult& result, std::span<const double> levels);
CSVTable schedule_table(const SolveResult& result);
CSVTable undersupply_table(const MCStudy& study);
CSVTable ensemble_band_table(const MCStudy& study);
CSVTable band_table(const BandTable& bands);

/// File stem encoding method, alpha and seed, e.g. "cm2_alpha3_seed2018".
std::string run_tag(Policy policy, double alpha, std::uint64_t seed);

}  // namespace penflow
