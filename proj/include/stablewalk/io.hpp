#pragma once

// Machine-readable output: CSV tables and JSON mirrors with identical field
// names. Every file carries a manifest header (config hash, seed); numbers
// are printed with round-trip precision so identical runs produce identical
// bytes.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace stablewalk {

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return std::string(buf);
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

struct Cell {
  std::string text;
  bool quoted = false;  // true for strings, false for raw numeric tokens

  Cell(double v) : text(format_double(v)) {}
  Cell(int v) : text(std::to_string(v)) {}
  Cell(std::int64_t v) : text(std::to_string(v)) {}
  Cell(std::size_t v) : text(std::to_string(v)) {}
  Cell(const char* s) : text(s), quoted(true) {}
  Cell(std::string s) : text(std::move(s)), quoted(true) {}
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> cells) { rows.push_back(std::move(cells)); }
};

using ManifestHeader = std::vector<std::pair<std::string, std::string>>;

inline void write_csv(std::ostream& os, const Table& t, const ManifestHeader& header) {
  for (const auto& [k, v] : header) os << "# " << k << ": " << v << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i].text;
    os << "\n";
  }
}

namespace detail {

inline std::string json_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

}  // namespace detail

/// JSON mirror of a CSV table: {"manifest": {...}, "rows": [{col: value}]}.
inline void write_json(std::ostream& os, const Table& t, const ManifestHeader& header) {
  os << "{\n  \"manifest\": {";
  for (std::size_t i = 0; i < header.size(); ++i) {
    os << (i ? ", " : "") << "\"" << detail::json_escape(header[i].first) << "\": \""
       << detail::json_escape(header[i].second) << "\"";
  }
  os << "},\n  \"rows\": [\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    os << "    {";
    for (std::size_t i = 0; i < t.rows[r].size(); ++i) {
      const auto& c = t.rows[r][i];
      os << (i ? ", " : "") << "\"" << detail::json_escape(t.columns[i]) << "\": ";
      if (c.quoted)
        os << "\"" << detail::json_escape(c.text) << "\"";
      else
        os << c.text;
    }
    os << "}" << (r + 1 < t.rows.size() ? "," : "") << "\n";
  }
  os << "  ]\n}\n";
}

}  // namespace stablewalk
