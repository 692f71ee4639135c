// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "control.hpp"
#include "montecarlo.hpp"

namespace penflow {

/// Everything a CLI run needs, validated.
struct RunConfig {
  OUParams demand;
  GridSpec grid;
  PenaltyParams penalty{1.0, 1e-12};
  Bounds bounds;
  Policy method = Policy::cm1;
  SolverKind solver = SolverKind::pointwise;
  std::optional<int> n_updates = 5;  ///< equal split; unset when update_times is given
  std::vector<double> update_times;
  int n_paths = 1000;
  std::uint64_t seed = 2018;
  unsigned threads = 0;
  int figure_path = 0;  ///< path index shown in CM2 traces and the band table
  std::vector<double> band_levels{0.5, 0.9, 0.99};
  std::string out_dir = "out";
  std::vector<double> figure_alphas{1.0, 3.0};

  UpdateSchedule update_schedule() const;
  MCConfig mc_config(Policy policy) const;

  bool operator==(const RunConfig&) const = default;
};

struct ProvenanceEntry {
  std::string key;    ///< dotted path, e.g. "demand.kappa"
  std::string value;  ///< JSON text
  bool defaulted = false;
};

struct ParsedConfig {
  RunConfig config;
  std::vector<ProvenanceEntry> provenance;
};

/// Parses a JSON config document, applies `key.path=value` overrides, and
/// validates every field. Throws ValidationError naming the key and reason.
ParsedConfig parse_config(std::string_view text, std::span<const std::string> overrides = {});

/// Reads a config file; IoError if it cannot be read.
ParsedConfig load_config(const std::filesystem::path& path,
                         std::span<const std::string> overrides = {});

/// Full JSON document (every key explicit) that parses back to `cfg`.
std::string serialize_config(const RunConfig& cfg);

/// Provenance as a JSON array of {key, value, default}.
std::string provenance_json(std::span<const ProvenanceEntry> provenance);

}  // namespace penflow
