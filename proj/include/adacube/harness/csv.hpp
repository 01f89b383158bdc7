#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "adacube/error.hpp"

namespace adacube {

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// RFC 4180 field quoting.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string csv_record(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += csv_field(fields[i]);
  }
  return line + "\r\n";
}

/// In-memory CSV document with a mandatory header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : width_(header.size()) { text_ = csv_record(header); }

  void row(const std::vector<std::string>& fields) {
    if (fields.size() != width_) throw InvalidInput("CsvTable: row width does not match header");
    text_ += csv_record(fields);
  }

  const std::string& str() const { return text_; }

 private:
  std::size_t width_;
  std::string text_;
};

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("cannot open " + path + " for writing");
    row(header);
  }

  void row(const std::vector<std::string>& fields) { out_ << csv_record(fields); }

 private:
  std::ofstream out_;
};

/// Parse one RFC 4180 record (no embedded newlines).
inline std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace adacube
