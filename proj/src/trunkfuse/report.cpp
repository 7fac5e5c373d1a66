// Copyright 2026 The trunkfuse Authors
// SPDX-License-Identifier: Apache-2.0

#include "trunkfuse/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "trunkfuse/error.hpp"
#include "trunkfuse/model_io.hpp"

namespace trunkfuse {

namespace {

constexpr const char* kSchema = "trunkfuse.report";

Json cell_json(const Cell& c) {
  return std::visit([](const auto& v) { return Json(v); }, c);
}

Cell cell_from_json(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  throw Error(ErrorCode::kSchemaError, "report table cell: unsupported type");
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string cell_text(const Cell& c) {
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return format_number(std::get<double>(c));
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << text;
  out.close();
  if (out.fail()) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

void append_table(std::ostringstream& os, const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size() && c < width.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string& s = c < row.size() ? row[c] : std::string();
      os << (c == 0 ? "" : "  ") << s << std::string(width[c] - s.size(), ' ');
    }
    os << '\n';
  };
  emit(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  os << std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') << '\n';
  for (const auto& row : rows) emit(row);
}

}  // namespace

void Report::add_metric(std::string name, double value, bool undefined) {
  metrics.push_back({std::move(name), undefined ? 0.0 : value, undefined});
}

const Metric* Report::find_metric(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

std::filesystem::path summary_path(const std::filesystem::path& report_path) {
  std::filesystem::path p = report_path;
  if (p.extension() == ".txt") return p.string() + ".summary.txt";
  return p.replace_extension(".txt");
}

std::string format_summary(const Report& report) {
  std::ostringstream os;
  os << "trunkfuse report: " << report.kind << "\n\n";
  std::vector<std::vector<std::string>> rows;
  for (const auto& m : report.metrics) {
    rows.push_back({m.name, m.undefined ? "undefined" : format_number(m.value)});
  }
  append_table(os, {"metric", "value"}, rows);
  for (const auto& t : report.tables) {
    os << '\n' << t.name << '\n';
    std::vector<std::vector<std::string>> body;
    for (const auto& r : t.rows) {
      std::vector<std::string> line;
      for (const auto& c : r) line.push_back(cell_text(c));
      body.push_back(std::move(line));
    }
    append_table(os, t.columns, body);
  }
  if (!report.notes.empty()) {
    os << "\nnotes\n";
    for (const auto& n : report.notes) os << "  " << n << '\n';
  }
  if (!report.inputs.empty()) {
    os << "\ninputs\n";
    for (const auto& in : report.inputs) os << "  " << in.name << "  " << in.sha256 << '\n';
  }
  return os.str();
}

void write_report(const Report& report, const std::filesystem::path& path) {
  Json j;
  j["schema"] = kSchema;
  j["format_version"] = kFormatVersion;
  j["kind"] = report.kind;
  Json cfg = Json::object();
  for (const auto& [k, v] : report.config) cfg[k] = v;
  j["config"] = std::move(cfg);
  Json inputs = Json::array();
  for (const auto& in : report.inputs) {
    inputs.push_back(Json{{"name", in.name}, {"sha256", in.sha256}});
  }
  j["inputs"] = std::move(inputs);
  Json metrics = Json::array();
  for (const auto& m : report.metrics) {
    metrics.push_back(Json{{"name", m.name}, {"value", m.value}, {"undefined", m.undefined}});
  }
  j["metrics"] = std::move(metrics);
  Json tables = Json::array();
  for (const auto& t : report.tables) {
    Json rows = Json::array();
    for (const auto& r : t.rows) {
      Json row = Json::array();
      for (const auto& c : r) row.push_back(cell_json(c));
      rows.push_back(std::move(row));
    }
    tables.push_back(Json{{"name", t.name}, {"columns", t.columns}, {"rows", std::move(rows)}});
  }
  j["tables"] = std::move(tables);
  j["notes"] = report.notes;

  write_file(path, j.dump(2) + "\n");
  write_file(summary_path(path), format_summary(report));
}

Report load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  try {
    if (j.at("schema") != kSchema) {
      throw Error(ErrorCode::kSchemaError, path.string() + ": schema: not a report");
    }
    Report r;
    r.kind = j.at("kind").get<std::string>();
    for (const auto& [k, v] : j.at("config").items()) {
      r.config.emplace_back(k, v.get<std::string>());
    }
    for (const auto& in_j : j.at("inputs")) {
      r.inputs.push_back({in_j.at("name").get<std::string>(),
                          in_j.at("sha256").get<std::string>()});
    }
    for (const auto& m : j.at("metrics")) {
      r.metrics.push_back({m.at("name").get<std::string>(), m.at("value").get<double>(),
                           m.at("undefined").get<bool>()});
    }
    for (const auto& t : j.at("tables")) {
      ReportTable table;
      table.name = t.at("name").get<std::string>();
      table.columns = t.at("columns").get<std::vector<std::string>>();
      for (const auto& row : t.at("rows")) {
        std::vector<Cell> cells;
        for (const auto& c : row) cells.push_back(cell_from_json(c));
        table.rows.push_back(std::move(cells));
      }
      r.tables.push_back(std::move(table));
    }
    r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSchemaError, path.string() + ": " + e.what());
  }
}

}  // namespace trunkfuse
