// RFC 4180-style CSV reading (quoted fields, doubled quotes, CRLF).
#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "phishvqc/error.hpp"

namespace phishvqc::csv {

using Row = std::vector<std::string>;

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Next record, or nullopt at end of input. Line numbers count records,
  // starting at 1 for the header.
  std::optional<Row> next() {
    Row row;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    char ch;
    while (in_.get(ch)) {
      any = true;
      if (in_quotes) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            in_.get(ch);
            field.push_back('"');
          } else {
            in_quotes = false;
          }
        } else {
          field.push_back(ch);
        }
        continue;
      }
      if (ch == '"') {
        in_quotes = true;
      } else if (ch == ',') {
        row.push_back(std::move(field));
        field.clear();
      } else if (ch == '\n') {
        row.push_back(std::move(field));
        ++record_;
        return row;
      } else if (ch != '\r') {
        field.push_back(ch);
      }
    }
    if (!any) return std::nullopt;
    if (in_quotes) throw ParseError("unterminated quoted field", record_ + 1);
    row.push_back(std::move(field));
    ++record_;
    return row;
  }

  std::size_t record_number() const noexcept { return record_; }

 private:
  std::istream& in_;
  std::size_t record_ = 0;
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// Parses a complete numeric field; nullopt for anything else.
inline std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline bool is_missing(std::string_view s) {
  s = trim(s);
  return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null" || s == "NULL";
}

}  // namespace phishvqc::csv
