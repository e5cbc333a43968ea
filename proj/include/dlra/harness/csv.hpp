#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "dlra/core/common.hpp"

namespace dlra {

/// Deterministic shortest-ish decimal rendering, "%.12g".
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct CsvTable {
  std::string header;
  std::vector<std::string> rows;
};

inline void write_csv(const std::filesystem::path& path,
                      const CsvTable& table) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);  // fixed newlines on any host
  if (!out) throw NumericalError("cannot write CSV: " + path.string());
  out << table.header << "\n";
  for (const auto& row : table.rows) out << row << "\n";
}

/// Minimal CSV reader for the harness's own outputs (no quoting).
inline std::vector<std::vector<std::string>> read_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot read CSV: " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream iss(line);
    while (std::getline(iss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace dlra
