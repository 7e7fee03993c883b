#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "corpus.hpp"
#include "lexicon.hpp"
#include "text.hpp"

namespace softskills::detection {

struct SkillPattern {
  int cluster_id = 0;
  std::string phrase;
  std::vector<std::string> tokens;
  bool competence_removed = false;
};

std::set<std::string> default_competence_terms();

/// One pattern per lexicon entry. Stopwords are dropped from the phrase unless
/// listed as essential for it; competence terms are dropped according to the
/// entry's policy. Throws ValidationError naming the phrase when an entry has
/// no cluster or nothing is left to match.
std::vector<SkillPattern> compile_patterns(const std::vector<lexicon::LexiconEntry>& entries,
                                           const std::set<std::string>& competence_terms,
                                           const StopwordList& stopwords);

struct MatchOccurrence {
  int cluster_id = 0;
  std::size_t pattern = 0;  ///< index into the pattern list
  std::size_t start = 0;    ///< token index of the first pattern token
  std::size_t end = 0;      ///< token index of the last pattern token (inclusive)
};

struct AdDetection {
  std::vector<int> clusters;  ///< sorted, distinct
  std::vector<MatchOccurrence> occurrences;
};

/// Compiled pattern set with a first-token index so an ad is scanned once.
class Matcher {
 public:
  Matcher(std::vector<SkillPattern> patterns, const StopwordList& stopwords, std::size_t max_gap = 2);

  /// A pattern matches at start i when its tokens occur in order at
  /// i = i1 < i2 < ... < ik and between consecutive positions at most
  /// `max_gap` non-stopword tokens intervene (stopwords are free). For each
  /// start the lexicographically smallest position tuple is reported.
  AdDetection detect(const TokenSequence& text) const;
  AdDetection detect(std::string_view text) const { return detect(tokenize(text)); }

  const std::vector<SkillPattern>& patterns() const noexcept { return patterns_; }
  std::size_t max_gap() const noexcept { return max_gap_; }

 private:
  bool extend(const std::vector<std::string>& tokens, const std::vector<char>& is_stop,
              const SkillPattern& pattern, std::size_t j, std::size_t pos, std::size_t& last) const;

  std::vector<SkillPattern> patterns_;
  StopwordList stopwords_;
  std::size_t max_gap_;
  std::unordered_map<std::string, std::vector<std::size_t>> first_token_;
};

struct CoverageSummary {
  std::size_t ads = 0;
  std::size_t with_any = 0;
  std::size_t with_three = 0;
  double fraction_any() const { return ads ? double(with_any) / double(ads) : 0.0; }
  double fraction_three() const { return ads ? double(with_three) / double(ads) : 0.0; }
};

/// Per-ad cluster sets aligned with the corpus order.
struct CorpusDetections {
  std::vector<std::string> ad_ids;
  std::vector<std::vector<int>> clusters;
  CoverageSummary summary;
};

/// Runs the matcher over every description. `threads` = 0 picks the hardware
/// concurrency; the result does not depend on it.
CorpusDetections detect_corpus(const std::vector<corpus::JobAd>& ads, const Matcher& matcher,
                               std::size_t threads = 0);

CoverageSummary summarize(const std::vector<std::vector<int>>& clusters);

/// TSV: ad_id, clusters (comma-separated, ascending).
std::string serialize_detections(const CorpusDetections& d);
/// Reads detections and aligns them to `ads`. Throws ValidationError when ids
/// are unknown, repeated or missing.
CorpusDetections parse_detections(std::string_view tsv, const std::vector<corpus::JobAd>& ads);

struct DistinctivenessRow {
  int cluster_id = 0;
  std::string category;
  double pct_in_category = 0;
  double pct_overall = 0;
  double delta = 0;
};

/// Rows for every cluster detected anywhere, sorted by delta descending (ties
/// by cluster id). Throws ValidationError for a category absent from the corpus.
std::vector<DistinctivenessRow> distinctiveness(const CorpusDetections& detections,
                                                const std::vector<corpus::JobAd>& ads, std::string_view category);

}  // namespace softskills::detection
