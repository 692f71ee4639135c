// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace penflow {

struct CSVTable {
  std::string schema;  ///< emitted as the leading "#schema: ..." line
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Throws ValidationError if any row width differs from the header.
  void validate() const;
};

/// 17 significant digits, C locale.
std::string format_number(double value);

/// Serialized bytes: schema comment, header, rows; LF endings, no trailing delimiter.
std::string to_csv_string(const CSVTable& table);

/// Throws IoError naming the path if the file cannot be written.
void write_csv(const CSVTable& table, const std::filesystem::path& path);

}  // namespace penflow
