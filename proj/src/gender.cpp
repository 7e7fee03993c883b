#include "gender.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "errors.hpp"
#include "table_io.hpp"
#include "text.hpp"

namespace softskills::gender {

CategoryGenderMap::CategoryGenderMap(std::vector<GenderMapRow> rows) : rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    if (r.female_share && !(*r.female_share >= 0 && *r.female_share <= 100)) {
      throw ValidationError("gender map: share for '" + r.category + "' is outside [0, 100]");
    }
    if (!index_.emplace(r.category, i).second) {
      throw ValidationError("gender map: category '" + r.category + "' listed twice");
    }
  }
}

const GenderMapRow* CategoryGenderMap::find(std::string_view category) const {
  auto it = index_.find(category);
  return it == index_.end() ? nullptr : &rows_[it->second];
}

CategoryGenderMap parse_gender_map(std::string_view tsv) {
  Table t = parse_tsv(tsv);
  const auto c_cat = t.require_column("category", "gender map");
  const auto c_ons = t.require_column("ons_category", "gender map");
  const auto c_share = t.require_column("female_share", "gender map");
  std::vector<GenderMapRow> rows;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() <= std::max({c_cat, c_ons, c_share})) throw ParseError("gender map: short row", t.line_numbers[r]);
    GenderMapRow g;
    g.category = std::string(trim(row[c_cat]));
    g.ons_category = std::string(trim(row[c_ons]));
    const auto share = trim(row[c_share]);
    if (share != "N/A" && share != "NA") {
      auto v = parse_double(share);
      if (!v) throw ParseError("gender map: bad share '" + std::string(share) + "'", t.line_numbers[r]);
      g.female_share = *v;
    }
    rows.push_back(std::move(g));
  }
  return CategoryGenderMap(std::move(rows));
}

CategoryGenderMap load_gender_map(const std::filesystem::path& path) { return parse_gender_map(read_file(path)); }

FemaleShares attach_female_share(const std::vector<corpus::JobAd>& ads, const CategoryGenderMap& map) {
  FemaleShares out;
  out.shares.resize(ads.size());
  std::set<std::string> unmapped;
  for (std::size_t i = 0; i < ads.size(); ++i) {
    if (!ads[i].has_category()) {
      out.excluded_no_category++;
      continue;
    }
    const auto* row = map.find(ads[i].category);
    if (!row) {
      unmapped.insert(ads[i].category);
    } else if (!row->female_share) {
      out.excluded_na++;
    } else {
      out.shares[i] = row->female_share;
    }
  }
  if (!unmapped.empty()) {
    std::string msg = "gender map lacks categories:";
    for (const auto& c : unmapped) msg += " '" + c + "'";
    throw ValidationError(msg);
  }
  return out;
}

namespace {

constexpr double kRankTolerance = 1e-10;
constexpr double kAliasTolerance = 1e-6;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Solves the normal equations and fills everything but r_squared. `ssr`
/// evaluates the residual sum of squares for a coefficient vector.
template <typename Ssr>
RegressionResult solve_normal(const Eigen::MatrixXd& xtx, const Eigen::VectorXd& xty, std::size_t n, Ssr ssr) {
  const auto p = static_cast<std::size_t>(xtx.rows());
  RegressionResult res;
  res.n_observations = n;
  res.aliased.assign(p, false);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(xtx);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double top = p ? std::max(lambda.cwiseAbs().maxCoeff(), 0.0) : 0.0;
  const double tol = top * kRankTolerance;
  std::size_t rank = 0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda[k] > tol && top > 0) rank++;
  }
  res.rank = rank;
  res.rank_deficient = rank < p;

  Eigen::VectorXd beta;
  Eigen::MatrixXd unscaled_cov;
  if (!res.rank_deficient) {
    Eigen::LLT<Eigen::MatrixXd> llt(xtx);
    beta = llt.solve(xty);
    unscaled_cov = llt.solve(Eigen::MatrixXd::Identity(xtx.rows(), xtx.cols()));
  } else {
    const Eigen::MatrixXd& v = eig.eigenvectors();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(lambda.size());
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
      if (lambda[k] > tol && top > 0) {
        inv[k] = 1.0 / lambda[k];
      } else {
        for (Eigen::Index j = 0; j < v.rows(); ++j) {
          if (std::fabs(v(j, k)) > kAliasTolerance) res.aliased[static_cast<std::size_t>(j)] = true;
        }
      }
    }
    unscaled_cov = v * inv.asDiagonal() * v.transpose();
    beta = unscaled_cov * xty;
  }

  res.coefficients.assign(beta.data(), beta.data() + beta.size());
  const double dof = static_cast<double>(n) - static_cast<double>(rank);
  const double sigma2 = dof > 0 ? ssr(beta) / dof : kNaN;
  res.std_errors.assign(p, kNaN);
  res.p_values.assign(p, kNaN);
  for (std::size_t j = 0; j < p; ++j) {
    if (res.aliased[j] || !(dof > 0)) continue;
    const double se = std::sqrt(std::max(0.0, sigma2 * unscaled_cov(j, j)));
    res.std_errors[j] = se;
    if (se == 0) {
      res.p_values[j] = beta[j] == 0 ? 1.0 : 0.0;
    } else {
      res.p_values[j] = stats::student_t_two_tailed(beta[j] / se, dof);
    }
  }
  return res;
}

double r_squared(double ssr, double sst) { return sst > 0 ? 1 - ssr / sst : 0.0; }

}  // namespace

RegressionResult ols_dense(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> names) {
  if (x.rows() != y.size()) throw ValidationError("design and target lengths differ");
  if (x.rows() == 0) throw ValidationError("regression needs at least one observation");
  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::VectorXd xty = x.transpose() * y;
  auto ssr = [&](const Eigen::VectorXd& beta) { return (y - x * beta).squaredNorm(); };
  auto res = solve_normal(xtx, xty, static_cast<std::size_t>(x.rows()), ssr);
  Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(res.coefficients.data(),
                                                           static_cast<Eigen::Index>(res.coefficients.size()));
  res.r_squared = r_squared(ssr(beta), (y.array() - y.mean()).square().sum());
  if (names.empty()) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) names.push_back("x" + std::to_string(j));
  }
  res.names = std::move(names);
  return res;
}

IndicatorRegression fit_female_share(const std::vector<std::vector<int>>& clusters,
                                     const std::vector<std::optional<double>>& shares, std::size_t min_skills) {
  if (clusters.size() != shares.size()) throw ValidationError("detections and shares are not aligned");
  std::vector<std::size_t> rows;
  std::map<int, std::size_t> counts;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (!shares[i] || clusters[i].size() < min_skills) continue;
    rows.push_back(i);
    for (int c : clusters[i]) counts[c]++;
  }
  if (rows.empty()) {
    throw ValidationError("no ads with a female share and at least " + std::to_string(min_skills) + " skills");
  }

  IndicatorRegression out;
  std::map<int, Eigen::Index> column;
  for (const auto& [c, n] : counts) {
    column[c] = static_cast<Eigen::Index>(out.cluster_ids.size()) + 1;
    out.cluster_ids.push_back(c);
    out.occurrences.push_back(n);
  }
  const Eigen::Index p = static_cast<Eigen::Index>(out.cluster_ids.size()) + 1;

  // Indicator rows are sparse, so the normal equations are accumulated directly.
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd xty = Eigen::VectorXd::Zero(p);
  std::vector<std::vector<Eigen::Index>> cols(rows.size());
  double y_sum = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double y = *shares[rows[r]];
    y_sum += y;
    auto& cs = cols[r];
    cs.push_back(0);
    for (int c : clusters[rows[r]]) cs.push_back(column.at(c));
    for (auto a : cs) {
      xty[a] += y;
      for (auto b : cs) xtx(a, b) += 1;
    }
  }
  auto ssr = [&](const Eigen::VectorXd& beta) {
    double s = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      double fitted = 0;
      for (auto a : cols[r]) fitted += beta[a];
      const double e = *shares[rows[r]] - fitted;
      s += e * e;
    }
    return s;
  };
  out.fit = solve_normal(xtx, xty, rows.size(), ssr);
  const double y_mean = y_sum / static_cast<double>(rows.size());
  double sst = 0;
  for (std::size_t r : rows) sst += (*shares[r] - y_mean) * (*shares[r] - y_mean);
  Eigen::VectorXd beta = Eigen::Map<const Eigen::VectorXd>(out.fit.coefficients.data(), p);
  out.fit.r_squared = std::clamp(r_squared(ssr(beta), sst), 0.0, 1.0);
  out.fit.names.push_back("intercept");
  for (int c : out.cluster_ids) out.fit.names.push_back(std::to_string(c));
  return out;
}

std::vector<RegressionRow> significant_predictors(const IndicatorRegression& reg,
                                                  const std::map<int, matching::RewardResult>& rewards,
                                                  std::size_t min_count, double alpha) {
  std::vector<RegressionRow> out;
  for (std::size_t j = 0; j < reg.cluster_ids.size(); ++j) {
    const double p = reg.fit.p_values[j + 1];
    if (reg.fit.aliased[j + 1] || std::isnan(p) || !(p < alpha) || reg.occurrences[j] < min_count) continue;
    RegressionRow row;
    row.cluster_id = reg.cluster_ids[j];
    row.coefficient = reg.fit.coefficients[j + 1];
    row.p_value = p;
    row.count = reg.occurrences[j];
    if (auto it = rewards.find(row.cluster_id); it != rewards.end()) row.reward = it->second;
    out.push_back(row);
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.coefficient > b.coefficient; });
  return out;
}

std::string_view stereotype_name(Stereotype s) { return s == Stereotype::Feminine ? "feminine" : "masculine"; }

std::vector<StereotypeEntry> parse_stereotype_map(std::string_view tsv, const clustering::ClusterSet& clusters) {
  Table t = parse_tsv(tsv);
  const auto c_trait = t.require_column("bem_trait", "stereotype map");
  const auto c_gender = t.require_column("gender", "stereotype map");
  const auto c_cluster = t.require_column("cluster_id", "stereotype map");

  std::map<std::string, int> by_name;
  for (const auto& c : clusters.clusters) {
    by_name.emplace(c.label, c.id);
    for (const auto& m : c.members) by_name.emplace(m, c.id);
  }

  std::vector<StereotypeEntry> out;
  std::set<std::string> traits;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto line = t.line_numbers[r];
    if (row.size() <= std::max({c_trait, c_gender, c_cluster})) throw ParseError("stereotype map: short row", line);
    StereotypeEntry e;
    e.trait = std::string(trim(row[c_trait]));
    const auto g = to_lower(trim(row[c_gender]));
    if (g == "feminine") {
      e.gender = Stereotype::Feminine;
    } else if (g == "masculine") {
      e.gender = Stereotype::Masculine;
    } else {
      throw ParseError("stereotype map: gender must be feminine or masculine, got '" + g + "'", line);
    }
    const std::string ref(trim(row[c_cluster]));
    if (auto id = parse_int(ref)) {
      e.cluster_id = static_cast<int>(*id);
    } else if (auto it = by_name.find(ref); it != by_name.end()) {
      e.cluster_id = it->second;
    } else {
      throw ParseError("stereotype map: unknown cluster '" + ref + "'", line);
    }
    const auto* cl = clusters.find(e.cluster_id);
    if (!cl) throw ParseError("stereotype map: unknown cluster id " + std::to_string(e.cluster_id), line);
    e.cluster_label = cl->label;
    if (!traits.insert(e.trait).second) throw ParseError("stereotype map: trait '" + e.trait + "' listed twice", line);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<StereotypeEntry> load_stereotype_map(const std::filesystem::path& path,
                                                 const clustering::ClusterSet& clusters) {
  return parse_stereotype_map(read_file(path), clusters);
}

void DominanceSplit::validate() const {
  if (!(male_max >= 0 && female_min <= 100 && male_max < female_min)) {
    throw ValidationError("dominance split needs 0 <= male_max < female_min <= 100");
  }
}

std::optional<double> relative_difference(double p_f, double p_m) {
  if (p_f < 0 || p_m < 0) throw ValidationError("prevalence percentages must be non-negative");
  const double top = std::max(p_f, p_m);
  if (top == 0) return std::nullopt;
  return (p_f - p_m) / top * 100.0;
}

DominanceGroups count_dominance(const std::vector<std::optional<double>>& shares, const DominanceSplit& split) {
  DominanceGroups g;
  for (const auto& s : shares) {
    if (!s) continue;
    if (*s >= split.female_min) g.female_ads++;
    if (*s <= split.male_max) g.male_ads++;
  }
  return g;
}

std::vector<StereotypePrevalence> stereotype_prevalence(const std::vector<std::vector<int>>& clusters,
                                                        const std::vector<std::optional<double>>& shares,
                                                        const std::vector<int>& cluster_ids,
                                                        const DominanceSplit& split) {
  split.validate();
  if (clusters.size() != shares.size()) throw ValidationError("detections and shares are not aligned");
  const auto groups = count_dominance(shares, split);
  std::map<int, std::pair<std::size_t, std::size_t>> hits;
  for (int c : cluster_ids) hits[c];
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (!shares[i]) continue;
    const bool female = *shares[i] >= split.female_min;
    const bool male = *shares[i] <= split.male_max;
    if (!female && !male) continue;
    for (int c : clusters[i]) {
      auto it = hits.find(c);
      if (it == hits.end()) continue;
      if (female) it->second.first++;
      if (male) it->second.second++;
    }
  }
  std::vector<StereotypePrevalence> out;
  for (int c : cluster_ids) {
    StereotypePrevalence p;
    p.cluster_id = c;
    const auto [f, m] = hits.at(c);
    if (groups.female_ads) p.p_f = 100.0 * static_cast<double>(f) / static_cast<double>(groups.female_ads);
    if (groups.male_ads) p.p_m = 100.0 * static_cast<double>(m) / static_cast<double>(groups.male_ads);
    if (p.p_f && p.p_m) p.rel_diff = relative_difference(*p.p_f, *p.p_m);
    out.push_back(p);
  }
  return out;
}

StereotypeAverage average_rows(const std::vector<StereotypeRow>& rows, Stereotype gender) {
  struct Acc {
    double sum = 0;
    std::size_t n = 0;
    void add(const std::optional<double>& v) {
      if (v) {
        sum += *v;
        n++;
      }
    }
    std::optional<double> mean() const {
      return n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt;
    }
  } r, pf, pm, rd;
  for (const auto& row : rows) {
    if (row.entry.gender != gender) continue;
    r.add(row.reward ? std::optional<double>(row.reward->reward) : std::nullopt);
    pf.add(row.prevalence.p_f);
    pm.add(row.prevalence.p_m);
    rd.add(row.prevalence.rel_diff);
  }
  return {gender, r.mean(), pf.mean(), pm.mean(), rd.mean()};
}

RewardComparison stereotype_reward_comparison(const std::vector<double>& feminine_rewards,
                                              const std::vector<double>& masculine_rewards) {
  if (feminine_rewards.empty() || masculine_rewards.empty()) {
    throw ValidationError("reward comparison needs rewards for both feminine and masculine skills");
  }
  RewardComparison out;
  out.feminine_mean = stats::mean(feminine_rewards);
  out.masculine_mean = stats::mean(masculine_rewards);
  out.test = stats::equal_var_t_test(masculine_rewards, feminine_rewards, /*one_tailed=*/true);
  return out;
}

}  // namespace softskills::gender
