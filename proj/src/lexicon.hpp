#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "corpus.hpp"

namespace softskills::lexicon {

struct RawSkillSubmission {
  std::string text;
  std::string source_ad;
};

/// Whether detection strips competence terms ("able", "skills", ...) from a
/// phrase. Auto keeps them only when stripping would leave fewer than two
/// content tokens ("communication skills").
enum class CompetencePolicy { Auto, Keep, Strip };

std::string_view competence_policy_name(CompetencePolicy p);
CompetencePolicy parse_competence_policy(std::string_view s);

struct SkillPhrase {
  std::string phrase;
  std::size_t token_count = 0;
  std::optional<double> confidence;
  CompetencePolicy competence = CompetencePolicy::Auto;
  /// Stopwords that must be matched literally for this phrase.
  std::vector<std::string> essential_stopwords;

  static SkillPhrase from_text(std::string_view text);
  friend bool operator==(const SkillPhrase&, const SkillPhrase&) = default;
};

/// One lexicon row: a phrase plus the cluster it was assigned to.
struct LexiconEntry {
  SkillPhrase skill;
  std::optional<int> cluster_id;
  friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

// --- cleaning -------------------------------------------------------------

std::vector<std::string> default_superfluous_adjectives();

enum class CleanStatus { Accepted, Corrected, NeedsReview, Rejected };

struct CleanResult {
  CleanStatus status = CleanStatus::Rejected;
  std::string phrase;  ///< empty when rejected
  std::string reason;  ///< why review/rejection happened
  std::vector<std::pair<std::string, std::string>> corrections;

  bool usable() const noexcept { return status != CleanStatus::Rejected; }
};

/// Lowercases, drops punctuation and extra whitespace, strips leading
/// superfluous adjectives (multi-word entries allowed), then corrects tokens
/// outside `whitelist` to the unique whitelist token at edit distance 1. An
/// empty whitelist disables correction. Tokens with zero or several candidates
/// flag the phrase for manual review.
CleanResult clean_phrase(std::string_view raw, const std::vector<std::string>& adjectives,
                         const std::set<std::string>& whitelist);

// --- curation script --------------------------------------------------------

struct CurationDirective {
  enum class Kind { Keep, Drop, Rewrite } kind;
  std::string phrase;
  std::string target;  ///< rewrite only
  std::size_t line = 0;
};

/// Line grammar: `keep <phrase>`, `drop <phrase>`, `rewrite <phrase> -> <phrase>`.
/// Blank lines and '#' comments ignored.
std::vector<CurationDirective> parse_curation_script(std::string_view text);

struct CurationCandidate {
  std::string phrase;
  bool needs_review = false;
};

struct CurationResult {
  std::vector<std::string> phrases;          ///< accepted, in first-seen order
  std::vector<std::string> unresolved;       ///< still flagged for review, excluded
  std::vector<std::string> log;
};

/// Applies directives in order. `keep` clears a review flag, `drop` removes,
/// `rewrite` renames (merging into an existing phrase if the target exists).
/// A directive naming an absent phrase throws ValidationError with its line.
CurationResult apply_curation(std::vector<CurationCandidate> candidates,
                              const std::vector<CurationDirective>& script);

// --- annotations and confidence --------------------------------------------

enum class Vote { Candidate, Company, Other };

struct AnnotationRecord {
  std::string skill;
  std::string snippet_id;
  std::string worker_id;
  Vote vote = Vote::Other;
  double trust = 1;
};

Vote parse_vote(std::string_view s);

/// CSV with columns skill, snippet_id, worker_id, vote, trust.
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path);
std::vector<AnnotationRecord> parse_annotations(std::string_view csv);

/// CSV with columns text, source_ad.
std::vector<RawSkillSubmission> load_submissions(const std::filesystem::path& path);
std::vector<RawSkillSubmission> parse_submissions(std::string_view csv);

/// Trust mass of Candidate votes over total trust mass, pooled over every
/// snippet of the skill. Throws ValidationError on an empty list.
double compute_confidence(const std::vector<AnnotationRecord>& records);

/// Pools records by skill phrase (normalized through the tokenizer).
std::map<std::string, double> confidence_by_skill(const std::vector<AnnotationRecord>& records);

struct FilterResult {
  std::vector<SkillPhrase> kept;
  std::size_t scored = 0;
  std::size_t scored_kept = 0;
  /// Short phrases that never received a score; dropped.
  std::vector<std::string> unscored_short;
  double retention_fraction() const { return scored ? double(scored_kept) / double(scored) : 0.0; }
};

/// Phrases of more than `max_scored_tokens` tokens pass unconditionally;
/// shorter ones need confidence >= threshold.
FilterResult filter_lexicon(const std::vector<SkillPhrase>& skills, double threshold,
                            std::size_t max_scored_tokens = 3);

// --- snippets and discovery -------------------------------------------------

struct Snippet {
  std::string skill;
  std::string ad_id;
  std::size_t token_index = 0;  ///< first token of the occurrence
  std::string window;

  std::string snippet_id() const { return ad_id + ":" + std::to_string(token_index); }
};

/// Samples up to `n` occurrences of `skill` (contiguous token match) without
/// replacement, returning them in corpus order with `context` words either side.
std::vector<Snippet> extract_snippets(const SkillPhrase& skill, const std::vector<corpus::JobAd>& ads,
                                      std::size_t n, std::uint64_t seed, std::size_t context = 25);

struct CurvePoint {
  std::size_t ads = 0;
  std::size_t distinct_skills = 0;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

std::vector<CurvePoint> discovery_curve(const std::vector<std::vector<std::string>>& skills_per_ad);

// --- lexicon file -----------------------------------------------------------

/// TSV: phrase, token_count, confidence, cluster_id, keep_competence[, essential].
std::string serialize_lexicon(const std::vector<LexiconEntry>& entries);
std::vector<LexiconEntry> parse_lexicon(std::string_view tsv);
std::vector<LexiconEntry> load_lexicon(const std::filesystem::path& path);

}  // namespace softskills::lexicon
