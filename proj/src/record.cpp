#include "mvcca/record.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "mvcca/errors.hpp"

namespace mvcca::harness {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw DimensionError("table row width does not match header");
  rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (columns[c] == name) return c;
  throw DimensionError("table has no column '" + name + "'");
}

bool RunRecord::passed() const { return summary.value("passed", false); }

Format format_from_string(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw ConfigError("unknown output format '" + s + "' (expected csv or json)");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf, static_cast<std::size_t>(len));
}

namespace {

std::string csv_field(const Cell& cell) {
  struct Visitor {
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(bool v) const { return v ? "true" : "false"; }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string q = "\"";
      for (char c : s) {
        if (c == '"') q += '"';
        q += c;
      }
      return q + '"';
    }
  };
  return std::visit(Visitor{}, cell);
}

void write_json_impl(const nlohmann::json& v, std::ostream& out, int indent, int depth) {
  const bool pretty = indent >= 0;
  auto newline = [&](int d) {
    if (pretty) out << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {  // std::map: keys already sorted
        if (!first) out << ',';
        first = false;
        newline(depth + 1);
        out << nlohmann::json(it.key()).dump() << (pretty ? ": " : ":");
        write_json_impl(it.value(), out, indent, depth + 1);
      }
      newline(depth);
      out << '}';
      return;
    }
    case nlohmann::json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      out << '[';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ',';
        newline(depth + 1);
        write_json_impl(v[i], out, indent, depth + 1);
      }
      newline(depth);
      out << ']';
      return;
    }
    case nlohmann::json::value_t::number_float: {
      const double d = v.get<double>();
      out << (std::isfinite(d) ? format_double(d) : "null");
      return;
    }
    default:
      out << v.dump();
  }
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << contents;
  f.flush();
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace

void write_csv(const Table& table, std::ostream& out) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_field(row[c]);
    out << '\n';
  }
}

void write_json(const nlohmann::json& value, std::ostream& out, int indent) {
  write_json_impl(value, out, indent, 0);
  if (indent >= 0) out << '\n';
}

std::string to_json_string(const nlohmann::json& value, int indent) {
  std::ostringstream ss;
  write_json_impl(value, ss, indent, 0);
  return ss.str();
}

nlohmann::json table_to_json(const Table& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& cell : row) std::visit([&](const auto& v) { r.push_back(v); }, cell);
    rows.push_back(std::move(r));
  }
  return {{"columns", table.columns}, {"rows", rows}};
}

std::vector<std::filesystem::path> emit(const RunRecord& record, Format format, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  std::vector<std::filesystem::path> written;
  nlohmann::json head{{"experiment", record.experiment},
                      {"config_hash", record.config_hash},
                      {"version", record.version},
                      {"config", record.config},
                      {"summary", record.summary}};
  if (format == Format::Csv) {
    for (const auto& [name, table] : record.tables) {
      std::ostringstream ss;
      write_csv(table, ss);
      auto path = dir / (record.experiment + "_" + name + ".csv");
      write_file(path, ss.str());
      written.push_back(std::move(path));
    }
    std::ostringstream ss;
    write_json(head, ss);
    auto path = dir / (record.experiment + "_summary.json");
    write_file(path, ss.str());
    written.push_back(std::move(path));
  } else {
    nlohmann::json tables = nlohmann::json::object();
    for (const auto& [name, table] : record.tables) tables[name] = table_to_json(table);
    head["tables"] = std::move(tables);
    std::ostringstream ss;
    write_json(head, ss);
    auto path = dir / (record.experiment + ".json");
    write_file(path, ss.str());
    written.push_back(std::move(path));
  }
  return written;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mvcca::harness
