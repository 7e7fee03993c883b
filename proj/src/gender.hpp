#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "clustering.hpp"
#include "corpus.hpp"
#include "matching.hpp"
#include "stats.hpp"

namespace softskills::gender {

struct GenderMapRow {
  std::string category;
  std::string ons_category;
  std::optional<double> female_share;  ///< percent; nullopt = N/A
};

class CategoryGenderMap {
 public:
  CategoryGenderMap() = default;
  /// Throws ValidationError for repeated categories or shares outside [0, 100].
  explicit CategoryGenderMap(std::vector<GenderMapRow> rows);

  const GenderMapRow* find(std::string_view category) const;
  const std::vector<GenderMapRow>& rows() const noexcept { return rows_; }

 private:
  std::vector<GenderMapRow> rows_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// TSV: category, ons_category, female_share ("N/A" allowed).
CategoryGenderMap parse_gender_map(std::string_view tsv);
CategoryGenderMap load_gender_map(const std::filesystem::path& path);

struct FemaleShares {
  std::vector<std::optional<double>> shares;  ///< per corpus ad
  std::size_t excluded_na = 0;
  std::size_t excluded_no_category = 0;
};

/// Throws ValidationError listing every corpus category missing from the map.
FemaleShares attach_female_share(const std::vector<corpus::JobAd>& ads, const CategoryGenderMap& map);

struct RegressionResult {
  /// Column names for coefficients; the intercept, when fitted, is first.
  std::vector<std::string> names;
  std::vector<double> coefficients;
  std::vector<double> std_errors;  ///< NaN for aliased coefficients
  std::vector<double> p_values;    ///< NaN for aliased coefficients
  std::vector<bool> aliased;
  double r_squared = 0;
  std::size_t n_observations = 0;
  std::size_t rank = 0;
  bool rank_deficient = false;
};

/// Least squares on a dense design (no implicit intercept). Full-rank designs
/// are solved through a Cholesky factorization of the normal equations;
/// rank-deficient ones get the minimum-norm solution from a symmetric
/// eigendecomposition, and every coefficient that loads on the null space is
/// flagged as aliased.
RegressionResult ols_dense(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           std::vector<std::string> names = {});

/// OLS of female share on cluster indicators plus an intercept. Row i has a 1
/// in the column of every cluster in `clusters[i]`. Only rows with at least
/// `min_skills` clusters and a share are used; only clusters present in those
/// rows become columns. Throws ValidationError when no row qualifies.
struct IndicatorRegression {
  RegressionResult fit;
  std::vector<int> cluster_ids;         ///< column j + 1 of fit -> cluster id
  std::vector<std::size_t> occurrences;  ///< per cluster column, in qualifying rows
};

IndicatorRegression fit_female_share(const std::vector<std::vector<int>>& clusters,
                                     const std::vector<std::optional<double>>& shares, std::size_t min_skills = 3);

struct RegressionRow {
  int cluster_id = 0;
  double coefficient = 0;
  double p_value = 0;
  std::size_t count = 0;
  std::optional<matching::RewardResult> reward;
};

/// Clusters with at least `min_count` occurrences and p < `alpha`, sorted by
/// coefficient descending.
std::vector<RegressionRow> significant_predictors(const IndicatorRegression& reg,
                                                  const std::map<int, matching::RewardResult>& rewards,
                                                  std::size_t min_count = 50, double alpha = 0.01);

// --- stereotypes ---------------------------------------------------------------

enum class Stereotype { Feminine, Masculine };
std::string_view stereotype_name(Stereotype s);

struct StereotypeEntry {
  std::string trait;
  Stereotype gender = Stereotype::Feminine;
  int cluster_id = 0;
  std::string cluster_label;
};

/// TSV: bem_trait, gender, cluster_id. The cluster column holds a numeric id
/// or a cluster label/member phrase, which is resolved through `clusters`.
std::vector<StereotypeEntry> parse_stereotype_map(std::string_view tsv, const clustering::ClusterSet& clusters);
std::vector<StereotypeEntry> load_stereotype_map(const std::filesystem::path& path,
                                                 const clustering::ClusterSet& clusters);

struct DominanceSplit {
  double female_min = 60;  ///< share >= this: female-dominated
  double male_max = 40;    ///< share <= this: male-dominated
  void validate() const;
};

/// (P_f - P_m) / max(P_f, P_m) * 100; nullopt when both are zero.
std::optional<double> relative_difference(double p_f, double p_m);

struct StereotypePrevalence {
  int cluster_id = 0;
  std::optional<double> p_f;  ///< nullopt when there are no female-dominated ads
  std::optional<double> p_m;
  std::optional<double> rel_diff;
};

struct DominanceGroups {
  std::size_t female_ads = 0;
  std::size_t male_ads = 0;
};

DominanceGroups count_dominance(const std::vector<std::optional<double>>& shares, const DominanceSplit& split);

std::vector<StereotypePrevalence> stereotype_prevalence(const std::vector<std::vector<int>>& clusters,
                                                        const std::vector<std::optional<double>>& shares,
                                                        const std::vector<int>& cluster_ids,
                                                        const DominanceSplit& split);

struct StereotypeRow {
  StereotypeEntry entry;
  StereotypePrevalence prevalence;
  std::optional<matching::RewardResult> reward;
};

/// Arithmetic means over the member rows that have a value in each column.
struct StereotypeAverage {
  Stereotype gender = Stereotype::Feminine;
  std::optional<double> reward;
  std::optional<double> p_f;
  std::optional<double> p_m;
  std::optional<double> rel_diff;
};

StereotypeAverage average_rows(const std::vector<StereotypeRow>& rows, Stereotype gender);

struct RewardComparison {
  double feminine_mean = 0;
  double masculine_mean = 0;
  stats::TTestResult test;  ///< pooled-variance, one-tailed: masculine > feminine
};

/// Throws ValidationError when either group is empty or too small to test.
RewardComparison stereotype_reward_comparison(const std::vector<double>& feminine_rewards,
                                              const std::vector<double>& masculine_rewards);

}  // namespace softskills::gender
