#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "corpus.hpp"
#include "stats.hpp"
#include "text.hpp"

namespace softskills::matching {

using SkillSets = std::vector<std::vector<int>>;

/// Ads eligible for matching, bucketed by (category, normalized title).
/// Eligible means: category present, salary present, title with at least one
/// non-stopword token, and a bucket of at least `min_title_count` such ads.
struct MatchingStudy {
  struct Group {
    std::string category;
    std::string title_key;
    std::vector<std::size_t> members;  ///< indices into `corpus_index` / `salaries`
    double salary_total = 0;
  };
  std::vector<Group> groups;                ///< ordered by (category, title_key)
  std::vector<std::size_t> corpus_index;    ///< study ad -> corpus ad
  std::vector<double> salaries;             ///< study ad -> salary point

  std::size_t size() const noexcept { return salaries.size(); }
};

MatchingStudy prepare_study(const std::vector<corpus::JobAd>& ads, const StopwordList& stopwords,
                            std::size_t min_title_count = 2);

/// Study-ad view of the per-corpus-ad skill sets.
SkillSets study_skill_sets(const MatchingStudy& study, const SkillSets& corpus_sets);

/// One (skill, category, title) cell: treated and control salaries.
struct MatchedGroup {
  int skill = 0;
  std::string category;
  std::string title_key;
  std::vector<double> with_salaries;
  std::vector<double> without_salaries;

  std::size_t treated() const noexcept { return with_salaries.size(); }
  std::size_t control() const noexcept { return without_salaries.size(); }
};

using CellKey = std::tuple<int, std::string, std::string>;

/// Cells with at least one ad on each side, keyed by (skill, category, title).
std::map<CellKey, MatchedGroup> build_matched_groups(const std::vector<corpus::JobAd>& ads,
                                                     const SkillSets& corpus_sets, const StopwordList& stopwords,
                                                     std::size_t min_title_count = 2);

/// (M - M_bar) / M_bar * 100 from the treated and control means.
double reward_cell(double treated_mean, double control_mean);
double reward_cell(const MatchedGroup& group);

enum class Significance { None, P05, P01 };
std::string stars(Significance s);
Significance significance_of(double p);

struct RewardResult {
  int skill = 0;
  double reward = 0;        ///< percent
  std::size_t count = 0;    ///< sum of min(C, C_bar)
  std::optional<double> p_value;
  Significance significance = Significance::None;
};

/// Count-weighted mean of cell rewards with weights min(C, C_bar); nullopt
/// when there are no cells.
std::optional<RewardResult> reward_aggregate(const std::vector<MatchedGroup>& cells);

/// Rewards for every skill in one pass over the study (no p-values).
std::map<int, RewardResult> compute_rewards(const MatchingStudy& study, const SkillSets& study_sets);

struct PermutationConfig {
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Shuffles the skill-set column across study ads and recomputes every skill's
/// reward per replicate. p = fraction of replicates with |r_rand| >= |r_obs|,
/// over replicates where the skill still has a valid cell. Replicate r draws
/// its permutation from substream r of the seed, so results are independent of
/// the thread count. Fills p_value/significance in `observed`.
void permutation_test(const MatchingStudy& study, const SkillSets& study_sets,
                      std::map<int, RewardResult>& observed, const PermutationConfig& config);

/// Single-skill convenience wrapper. nullopt when the skill has no cell.
std::optional<double> permutation_p_value(const MatchingStudy& study, const SkillSets& study_sets, int skill,
                                          const PermutationConfig& config);

// --- salary bands -------------------------------------------------------------

struct SalaryBand {
  double low = 0;   ///< exclusive
  double high = 0;  ///< inclusive
};

std::vector<SalaryBand> default_salary_bands();
/// "0,20000,40000,60000,80000" -> four bands. Edges must increase strictly.
std::vector<SalaryBand> parse_band_edges(std::string_view edges);

struct SalaryBandSummary {
  SalaryBand band;
  std::size_t ads = 0;
  std::optional<stats::BootstrapInterval> mean_skills;  ///< nullopt = no data
};

struct BandComparison {
  std::size_t a = 0;
  std::size_t b = 0;
  std::optional<stats::TTestResult> welch;  ///< nullopt when a band has < 2 ads
};

struct SalaryBandReport {
  std::vector<SalaryBandSummary> bands;
  std::vector<BandComparison> comparisons;
};

/// Mean distinct-cluster count per ad in each band, percentile-bootstrap CI
/// (band i uses substream i of `seed`) and pairwise Welch tests.
SalaryBandReport skills_by_salary_band(const std::vector<corpus::JobAd>& ads, const SkillSets& corpus_sets,
                                       const std::vector<SalaryBand>& bands, std::size_t bootstrap_replicates,
                                       std::uint64_t seed);

}  // namespace softskills::matching
