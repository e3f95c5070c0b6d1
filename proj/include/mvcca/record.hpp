#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace mvcca::harness {

using Cell = std::variant<double, std::int64_t, bool, std::string>;

/// Rectangular result table with a fixed column order.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row);
  std::size_t column(const std::string& name) const;
};

/// Everything one experiment run emits. Wall time is kept out of the emitted
/// files so identical configs reproduce identical bytes.
struct RunRecord {
  std::string experiment;
  std::string config_hash;
  std::string version;
  nlohmann::json config;
  std::map<std::string, Table> tables;
  nlohmann::json summary = nlohmann::json::object();
  double wall_seconds = 0.0;

  /// Summary "passed" flag written by the experiment's own acceptance checks.
  bool passed() const;
};

enum class Format { Csv, Json };

Format format_from_string(const std::string& s);

/// %.17g, with nan/inf spelled out.
std::string format_double(double v);

void write_csv(const Table& table, std::ostream& out);

/// Key-sorted JSON with doubles printed to 17 significant digits; non-finite
/// doubles become null.
void write_json(const nlohmann::json& value, std::ostream& out, int indent = 2);
std::string to_json_string(const nlohmann::json& value, int indent = -1);

nlohmann::json table_to_json(const Table& table);

/// CSV: one `<experiment>_<table>.csv` per table plus `<experiment>_summary.json`.
/// JSON: a single `<experiment>.json`. Returns the files written.
std::vector<std::filesystem::path> emit(const RunRecord& record, Format format, const std::filesystem::path& dir);

/// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace mvcca::harness
