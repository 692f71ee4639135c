// Copyright 2026 The penflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "errors.hpp"

namespace penflow {

void CSVTable::validate() const {
  if (header.empty()) throw ValidationError("csv: empty header");
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw ValidationError("csv: table is not rectangular");
  }
}

std::string format_number(double value) {
  if (value == 0.0) return "0";  // folds -0
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[32];
  const int n = std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return std::string(buffer, static_cast<std::size_t>(n));
}

std::string to_csv_string(const CSVTable& table) {
  table.validate();
  std::string out = "#schema: " + table.schema + "\n";
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i > 0) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_csv(const CSVTable& table, const std::filesystem::path& path) {
  const std::string bytes = to_csv_string(table);
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open " + path.string() + " for writing");
  file.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw IoError("failed writing " + path.string());
}

}  // namespace penflow
