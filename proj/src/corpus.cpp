#include "corpus.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "errors.hpp"
#include "table_io.hpp"

namespace softskills::corpus {

CorpusFormat parse_corpus_format(std::string_view id) {
  if (id == "canonical") return CorpusFormat::Canonical;
  if (id == "adzuna") return CorpusFormat::Adzuna;
  throw ValidationError("unknown corpus format '" + std::string(id) + "' (expected canonical or adzuna)");
}

std::string_view corpus_format_name(CorpusFormat f) {
  return f == CorpusFormat::Canonical ? "canonical" : "adzuna";
}

namespace {

struct NumberToken {
  double value;
  std::size_t begin;
  std::size_t end;
};

std::vector<NumberToken> scan_numbers(std::string_view s) {
  std::vector<NumberToken> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!(s[i] >= '0' && s[i] <= '9')) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    std::string digits;
    while (i < s.size() && ((s[i] >= '0' && s[i] <= '9') || s[i] == ',' || s[i] == '.')) {
      if (s[i] == ',') {
        // thousands separator only when followed by three digits
        if (i + 4 <= s.size() && std::all_of(s.begin() + i + 1, s.begin() + i + 4,
                                             [](char c) { return c >= '0' && c <= '9'; })) {
          ++i;
          continue;
        }
        break;
      }
      if (s[i] == '.' && (i + 1 >= s.size() || !(s[i + 1] >= '0' && s[i + 1] <= '9'))) break;
      digits.push_back(s[i]);
      ++i;
    }
    double v = parse_double(digits).value_or(0);
    if (i < s.size() && (s[i] == 'k' || s[i] == 'K') &&
        (i + 1 == s.size() || !std::isalpha(static_cast<unsigned char>(s[i + 1])))) {
      v *= 1000;
      ++i;
    }
    out.push_back({v, begin, i});
  }
  return out;
}

bool is_range_separator(std::string_view between) {
  std::string kept;
  for (char c : between) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalpha(u)) kept.push_back(static_cast<char>(std::tolower(u)));
    else if (c == '-') kept.push_back('-');
    else if (u == 0xE2) kept.push_back('-');  // en/em dash lead byte
  }
  return kept == "-" || kept == "to";
}

std::optional<SalaryRange> checked(double low, double high) {
  if (!(low > 0) || !(high > 0) || low > high) return std::nullopt;
  return SalaryRange{low, high};
}

const char* const kCanonicalColumns[] = {"Id", "Title", "FullDescription", "Category", "SalaryMin", "SalaryMax"};
const char* const kAdzunaColumns[] = {"Id", "Title", "FullDescription", "Category", "SalaryRaw", "SalaryNormalized"};

}  // namespace

std::optional<SalaryRange> parse_salary_range(std::string_view raw) {
  auto nums = scan_numbers(raw);
  if (nums.empty()) return std::nullopt;
  if (nums.size() >= 2 && is_range_separator(raw.substr(nums[0].end, nums[1].begin - nums[0].end))) {
    return checked(nums[0].value, nums[1].value);
  }
  return checked(nums[0].value, nums[0].value);
}

std::optional<double> salary_point(const JobAd& ad) {
  if (!ad.salary) return std::nullopt;
  return (ad.salary->low + ad.salary->high) / 2.0;
}

LoadedCorpus parse_ads(std::string_view csv, CorpusFormat format) {
  Table table = parse_csv(csv);
  const auto& names = format == CorpusFormat::Canonical ? kCanonicalColumns : kAdzunaColumns;
  std::size_t idx[6];
  for (int k = 0; k < 6; ++k) idx[k] = table.require_column(names[k], "corpus");

  std::vector<bool> is_fixed(table.header.size(), false);
  for (auto i : idx) is_fixed[i] = true;

  LoadedCorpus out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = table.line_numbers[r];
    auto field = [&](std::size_t col) -> std::string {
      return col < row.size() ? row[col] : std::string();
    };
    auto reject = [&](std::string reason) {
      out.report.rejected++;
      out.report.rejections.push_back({line, std::move(reason)});
    };
    if (row.size() != table.header.size()) {
      reject("expected " + std::to_string(table.header.size()) + " fields, found " + std::to_string(row.size()));
      continue;
    }
    JobAd ad;
    ad.id = std::string(trim(field(idx[0])));
    ad.title = field(idx[1]);
    ad.description = field(idx[2]);
    ad.category = std::string(trim(field(idx[3])));
    if (ad.id.empty()) {
      reject("empty id");
      continue;
    }
    if (trim(ad.description).empty()) {
      reject("empty description");
      continue;
    }
    std::string a = std::string(trim(field(idx[4])));
    std::string b = std::string(trim(field(idx[5])));
    if (format == CorpusFormat::Canonical) {
      auto lo = parse_double(a), hi = parse_double(b);
      if (lo && hi) ad.salary = checked(*lo, *hi);
      else if (!a.empty() && b.empty()) ad.salary = parse_salary_range(a);
      else if (a.empty() && !b.empty()) ad.salary = parse_salary_range(b);
    } else {
      auto range = parse_salary_range(a);
      if (range && range->low >= 1000 && range->high >= 1000) {
        ad.salary = range;
      } else if (auto norm = parse_double(b)) {
        ad.salary = checked(*norm, *norm);
      }
    }
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (!is_fixed[c] && !row[c].empty()) ad.extra.emplace_back(table.header[c], row[c]);
    }
    if (!ad.salary) out.report.salary_absent++;
    if (!ad.has_category()) out.report.category_absent++;
    out.report.accepted++;
    out.ads.push_back(std::move(ad));
  }
  return out;
}

LoadedCorpus load_ads(const std::filesystem::path& path, CorpusFormat format) {
  if (!std::filesystem::exists(path)) throw IoError("corpus file not found: " + path.string());
  return parse_ads(read_file(path), format);
}

std::string serialize_ads(const std::vector<JobAd>& ads) {
  std::vector<std::string> extra_cols;
  for (const auto& ad : ads) {
    for (const auto& [k, v] : ad.extra) {
      if (std::find(extra_cols.begin(), extra_cols.end(), k) == extra_cols.end()) extra_cols.push_back(k);
    }
  }
  std::vector<std::string> header(std::begin(kCanonicalColumns), std::end(kCanonicalColumns));
  header.insert(header.end(), extra_cols.begin(), extra_cols.end());
  std::string out = csv_row(header) + "\n";
  for (const auto& ad : ads) {
    std::vector<std::string> row{ad.id, ad.title, ad.description, ad.category,
                                 ad.salary ? format_double(ad.salary->low) : "",
                                 ad.salary ? format_double(ad.salary->high) : ""};
    for (const auto& col : extra_cols) {
      auto it = std::find_if(ad.extra.begin(), ad.extra.end(), [&](const auto& kv) { return kv.first == col; });
      row.push_back(it == ad.extra.end() ? "" : it->second);
    }
    out += csv_row(row) + "\n";
  }
  return out;
}

std::optional<NormalizedTitle> normalize_title(std::string_view title, const StopwordList& stopwords) {
  std::vector<std::string> kept;
  for (auto& tok : tokenize_words(title)) {
    if (!stopwords.contains(tok)) kept.push_back(std::move(tok));
  }
  if (kept.empty()) return std::nullopt;
  std::sort(kept.begin(), kept.end());
  return NormalizedTitle{join(kept)};
}

std::optional<std::string> find_duplicate_id(const std::vector<JobAd>& ads) {
  std::unordered_set<std::string> seen;
  for (const auto& ad : ads) {
    if (!seen.insert(ad.id).second) return ad.id;
  }
  return std::nullopt;
}

}  // namespace softskills::corpus
