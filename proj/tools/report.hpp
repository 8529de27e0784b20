#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace twostage::cli {

using Value = std::variant<std::monostate, bool, std::int64_t, double, std::string>;

enum class Format { csv, jsonl };

Format parse_format(const std::string& name);

/// One command's output: metadata, a table, and trailing summary fields.
/// CSV puts metadata and summary on '#' lines around the table; JSON lines
/// emit a meta record, one record per row, then a summary record.
struct Report {
  std::string command;
  std::vector<std::pair<std::string, Value>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
  std::vector<std::pair<std::string, Value>> summary;

  void add_meta(std::string key, Value v) { meta.emplace_back(std::move(key), std::move(v)); }
  void add_summary(std::string key, Value v) { summary.emplace_back(std::move(key), std::move(v)); }
  void add_row(std::vector<Value> row);

  void write(std::ostream& os, Format format) const;
};

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double x);

inline Value integer(std::uint64_t n) { return static_cast<std::int64_t>(n); }

}  // namespace twostage::cli
