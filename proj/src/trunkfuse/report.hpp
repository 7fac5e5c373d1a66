// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace trunkfuse {

struct Metric {
  std::string name;
  double value = 0.0;
  // Set when the metric has no defined value (e.g. no ground truth); value is 0.
  bool undefined = false;
  friend bool operator==(const Metric&, const Metric&) = default;
};

using Cell = std::variant<std::string, std::int64_t, double>;

struct ReportTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  friend bool operator==(const ReportTable&, const ReportTable&) = default;
};

struct InputDigest {
  std::string name;  // file name without directories
  std::string sha256;
  friend bool operator==(const InputDigest&, const InputDigest&) = default;
};

struct Report {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<InputDigest> inputs;
  std::vector<Metric> metrics;
  std::vector<ReportTable> tables;
  std::vector<std::string> notes;

  void add_metric(std::string name, double value, bool undefined = false);
  const Metric* find_metric(const std::string& name) const;
  friend bool operator==(const Report&, const Report&) = default;
};

// Writes `path` (JSON) and a plain-text summary next to it with the
// extension replaced by ".txt". Output bytes depend only on the report.
void write_report(const Report& report, const std::filesystem::path& path);
Report load_report(const std::filesystem::path& path);

std::filesystem::path summary_path(const std::filesystem::path& report_path);
std::string format_summary(const Report& report);

}  // namespace trunkfuse
