#include "report.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "json.hpp"
#include "twostage/errors.hpp"

namespace twostage::cli {

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::csv;
  if (name == "jsonl" || name == "json-lines") return Format::jsonl;
  throw ParameterError("unknown output format '" + name + "'");
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("double formatting failed");
  return {buf, end};
}

void Report::add_row(std::vector<Value> row) {
  if (row.size() != columns.size()) throw std::logic_error("row width does not match the header");
  rows.push_back(std::move(row));
}

namespace {

std::string csv_cell(const Value& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(bool b) const { return b ? "1" : "0"; }
    std::string operator()(std::int64_t n) const { return std::to_string(n); }
    std::string operator()(double x) const { return format_double(x); }
    std::string operator()(const std::string& s) const {
      if (s.find_first_of(",\"\n") == std::string::npos) return s;
      std::string out = "\"";
      for (char c : s) {
        if (c == '"') out += '"';
        out += c;
      }
      return out + "\"";
    }
  };
  return std::visit(Visitor{}, v);
}

nlohmann::ordered_json to_json(const Value& v) {
  struct Visitor {
    nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
    nlohmann::ordered_json operator()(bool b) const { return b; }
    nlohmann::ordered_json operator()(std::int64_t n) const { return n; }
    nlohmann::ordered_json operator()(double x) const {
      if (std::isfinite(x)) return x;
      return format_double(x);
    }
    nlohmann::ordered_json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, v);
}

}  // namespace

void Report::write(std::ostream& os, Format format) const {
  if (format == Format::csv) {
    os << "# command=" << command << '\n';
    for (const auto& [k, v] : meta) os << "# " << k << '=' << csv_cell(v) << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
      os << '\n';
    }
    for (const auto& [k, v] : summary) os << "# summary." << k << '=' << csv_cell(v) << '\n';
    return;
  }
  nlohmann::ordered_json head;
  head["record"] = "meta";
  head["command"] = command;
  for (const auto& [k, v] : meta) head[k] = to_json(v);
  os << head.dump() << '\n';
  for (const auto& row : rows) {
    nlohmann::ordered_json r;
    r["record"] = "row";
    for (std::size_t i = 0; i < row.size(); ++i) r[columns[i]] = to_json(row[i]);
    os << r.dump() << '\n';
  }
  if (!summary.empty()) {
    nlohmann::ordered_json s;
    s["record"] = "summary";
    for (const auto& [k, v] : summary) s[k] = to_json(v);
    os << s.dump() << '\n';
  }
}

}  // namespace twostage::cli
