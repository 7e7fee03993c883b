#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "text.hpp"

namespace softskills::corpus {

struct SalaryRange {
  double low = 0;
  double high = 0;
  friend bool operator==(const SalaryRange&, const SalaryRange&) = default;
};

struct JobAd {
  std::string id;
  std::string title;
  std::string description;
  std::string category;  ///< empty when the row had none
  std::optional<SalaryRange> salary;
  /// Unused source columns (location, contract type, ...), non-empty values only.
  std::vector<std::pair<std::string, std::string>> extra;

  bool has_category() const noexcept { return !category.empty(); }
  friend bool operator==(const JobAd&, const JobAd&) = default;
};

enum class CorpusFormat {
  /// Id, Title, FullDescription, Category, SalaryMin, SalaryMax.
  Canonical,
  /// Kaggle/Adzuna job-salary layout: Id, Title, FullDescription, Category,
  /// SalaryRaw, SalaryNormalized. The range comes from SalaryRaw when it holds
  /// "a - b" or "a to b" with both bounds >= 1000; otherwise SalaryNormalized
  /// is used as a zero-width range.
  Adzuna,
};

CorpusFormat parse_corpus_format(std::string_view id);
std::string_view corpus_format_name(CorpusFormat f);

struct RowRejection {
  std::size_t line = 0;
  std::string reason;
};

struct LoadReport {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t salary_absent = 0;
  std::size_t category_absent = 0;
  std::vector<RowRejection> rejections;
};

struct LoadedCorpus {
  std::vector<JobAd> ads;
  LoadReport report;
};

/// Throws IoError when the file is missing and ParseError naming the first
/// missing column on a header mismatch.
LoadedCorpus load_ads(const std::filesystem::path& path, CorpusFormat format);
LoadedCorpus parse_ads(std::string_view csv, CorpusFormat format);

/// Canonical-format CSV. Extra columns follow the six fixed ones in order of
/// first appearance.
std::string serialize_ads(const std::vector<JobAd>& ads);

/// Parses "20000-30000", "£18,000 to £20,000 per annum", "35k", "40000".
/// Returns nullopt unless the bounds are positive and ordered.
std::optional<SalaryRange> parse_salary_range(std::string_view raw);

/// Midpoint of the range; nullopt signals "no salary".
std::optional<double> salary_point(const JobAd& ad);

/// Sorted non-stopword title tokens joined by single spaces.
struct NormalizedTitle {
  std::string key;
  friend auto operator<=>(const NormalizedTitle&, const NormalizedTitle&) = default;
};

/// nullopt when the title has no non-stopword tokens.
std::optional<NormalizedTitle> normalize_title(std::string_view title, const StopwordList& stopwords);

/// First id that appears more than once, if any.
std::optional<std::string> find_duplicate_id(const std::vector<JobAd>& ads);

}  // namespace softskills::corpus
