#include "table_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "errors.hpp"
#include "text.hpp"

namespace softskills {

std::optional<std::size_t> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Table::require_column(std::string_view name, std::string_view what) const {
  auto c = column(name);
  if (!c) throw ParseError(std::string(what) + ": missing column '" + std::string(name) + "'", 1);
  return *c;
}

Table parse_csv(std::string_view content) {
  if (content.starts_with("\xEF\xBB\xBF")) content.remove_prefix(3);
  Table table;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  std::size_t line = 1;
  std::size_t row_start = 1;
  bool have_header = false;

  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_quoted = false;
    bool blank = row.size() == 1 && row[0].empty();
    if (!blank) {
      if (!have_header) {
        table.header = std::move(row);
        have_header = true;
      } else {
        table.rows.push_back(std::move(row));
        table.line_numbers.push_back(row_start);
      }
    }
    row.clear();
  };

  for (std::size_t i = 0; i < content.size(); ++i) {
    char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field.empty() && !field_quoted) {
          in_quotes = true;
          field_quoted = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_quoted = false;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        row_start = line;
        break;
      default:
        field.push_back(c);
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", row_start);
  if (!field.empty() || !row.empty() || field_quoted) end_row();
  return table;
}

Table read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

Table parse_tsv(std::string_view content) {
  Table table;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= content.size()) {
    auto nl = content.find('\n', pos);
    std::string_view line =
        content.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? content.size() + 1 : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (starts_with_comment(line)) continue;
    auto fields = split(line, '\t');
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
    } else {
      table.rows.push_back(std::move(fields));
      table.line_numbers.push_back(line_no);
    }
  }
  return table;
}

Table read_tsv(const std::filesystem::path& path) { return parse_tsv(read_file(path)); }

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(fields[i]);
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string format_fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s(buf);
  if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace softskills
