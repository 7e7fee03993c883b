#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace softskills {

/// A delimited table with a header row. `line_numbers[i]` is the 1-based
/// source line where data row i starts.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  /// Index of `name` in the header, compared case-sensitively.
  std::optional<std::size_t> column(std::string_view name) const;
  /// Like column() but throws ParseError naming the missing column.
  std::size_t require_column(std::string_view name, std::string_view what) const;
};

/// RFC 4180 CSV: quoted fields may contain separators, newlines and doubled
/// quotes. A UTF-8 byte-order mark on the first line is skipped.
Table parse_csv(std::string_view content);
Table read_csv(const std::filesystem::path& path);

/// Tab-separated, no quoting. Lines starting with '#' and blank lines are
/// skipped, including before the header.
Table parse_tsv(std::string_view content);
Table read_tsv(const std::filesystem::path& path);

std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

/// Shortest round-trippable decimal representation.
std::string format_double(double v);
/// Fixed-point with `digits` decimals.
std::string format_fixed(double v, int digits);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

}  // namespace softskills
