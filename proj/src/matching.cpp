#include "matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <span>
#include <thread>

#include "errors.hpp"
#include "rng.hpp"
#include "table_io.hpp"

namespace softskills::matching {

MatchingStudy prepare_study(const std::vector<corpus::JobAd>& ads, const StopwordList& stopwords,
                            std::size_t min_title_count) {
  std::map<std::pair<std::string, std::string>, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < ads.size(); ++i) {
    const auto& ad = ads[i];
    if (!ad.has_category() || !ad.salary) continue;
    auto key = corpus::normalize_title(ad.title, stopwords);
    if (!key) continue;
    buckets[{ad.category, key->key}].push_back(i);
  }
  MatchingStudy study;
  for (auto& [key, members] : buckets) {
    if (members.size() < std::max<std::size_t>(min_title_count, 1)) continue;
    MatchingStudy::Group g;
    g.category = key.first;
    g.title_key = key.second;
    for (std::size_t idx : members) {
      g.members.push_back(study.salaries.size());
      const double s = *corpus::salary_point(ads[idx]);
      study.corpus_index.push_back(idx);
      study.salaries.push_back(s);
      g.salary_total += s;
    }
    study.groups.push_back(std::move(g));
  }
  return study;
}

SkillSets study_skill_sets(const MatchingStudy& study, const SkillSets& corpus_sets) {
  SkillSets out;
  out.reserve(study.size());
  for (std::size_t idx : study.corpus_index) out.push_back(corpus_sets.at(idx));
  return out;
}

std::map<CellKey, MatchedGroup> build_matched_groups(const std::vector<corpus::JobAd>& ads,
                                                     const SkillSets& corpus_sets, const StopwordList& stopwords,
                                                     std::size_t min_title_count) {
  const auto study = prepare_study(ads, stopwords, min_title_count);
  std::map<CellKey, MatchedGroup> out;
  for (const auto& g : study.groups) {
    std::set<int> skills;
    for (std::size_t m : g.members) {
      const auto& s = corpus_sets.at(study.corpus_index[m]);
      skills.insert(s.begin(), s.end());
    }
    for (int skill : skills) {
      MatchedGroup cell{skill, g.category, g.title_key, {}, {}};
      for (std::size_t m : g.members) {
        const auto& s = corpus_sets[study.corpus_index[m]];
        const bool has = std::find(s.begin(), s.end(), skill) != s.end();
        (has ? cell.with_salaries : cell.without_salaries).push_back(study.salaries[m]);
      }
      if (cell.treated() && cell.control()) out.emplace(CellKey{skill, g.category, g.title_key}, std::move(cell));
    }
  }
  return out;
}

double reward_cell(double treated_mean, double control_mean) {
  if (!(control_mean > 0)) throw ValidationError("control mean salary must be positive");
  return (treated_mean - control_mean) / control_mean * 100.0;
}

double reward_cell(const MatchedGroup& group) {
  if (group.with_salaries.empty() || group.without_salaries.empty()) {
    throw ValidationError("matched group needs ads with and without the skill");
  }
  return reward_cell(stats::mean(group.with_salaries), stats::mean(group.without_salaries));
}

std::string stars(Significance s) {
  switch (s) {
    case Significance::P01: return "**";
    case Significance::P05: return "*";
    case Significance::None: break;
  }
  return "";
}

Significance significance_of(double p) {
  if (p <= 0.01) return Significance::P01;
  if (p <= 0.05) return Significance::P05;
  return Significance::None;
}

std::optional<RewardResult> reward_aggregate(const std::vector<MatchedGroup>& cells) {
  if (cells.empty()) return std::nullopt;
  double num = 0;
  std::size_t den = 0;
  for (const auto& c : cells) {
    const std::size_t w = std::min(c.treated(), c.control());
    num += reward_cell(c) * static_cast<double>(w);
    den += w;
  }
  RewardResult r;
  r.skill = cells.front().skill;
  r.reward = num / static_cast<double>(den);
  r.count = den;
  return r;
}

namespace {

/// Per-skill weighted reward sums for one assignment of skill sets to study ads.
class RewardAccumulator {
 public:
  explicit RewardAccumulator(std::size_t n_skills)
      : sum_(n_skills, 0.0), cnt_(n_skills, 0), num_(n_skills, 0.0), den_(n_skills, 0) {}

  /// `order` maps study ad -> index into `sets` (nullptr = identity).
  void run(const MatchingStudy& study, const SkillSets& sets, const std::vector<std::size_t>* order) {
    std::fill(num_.begin(), num_.end(), 0.0);
    std::fill(den_.begin(), den_.end(), 0);
    for (const auto& g : study.groups) {
      touched_.clear();
      for (std::size_t m : g.members) {
        const auto& s = sets[order ? (*order)[m] : m];
        for (int skill : s) {
          auto k = static_cast<std::size_t>(skill);
          if (cnt_[k] == 0) touched_.push_back(k);
          sum_[k] += study.salaries[m];
          cnt_[k]++;
        }
      }
      const std::size_t n = g.members.size();
      for (std::size_t k : touched_) {
        const std::size_t c = cnt_[k];
        if (c < n) {
          const double treated = sum_[k] / static_cast<double>(c);
          const double control = (g.salary_total - sum_[k]) / static_cast<double>(n - c);
          const std::size_t w = std::min(c, n - c);
          num_[k] += (treated - control) / control * 100.0 * static_cast<double>(w);
          den_[k] += w;
        }
        sum_[k] = 0;
        cnt_[k] = 0;
      }
    }
  }

  bool has(std::size_t k) const { return den_[k] > 0; }
  double reward(std::size_t k) const { return num_[k] / static_cast<double>(den_[k]); }
  std::size_t count(std::size_t k) const { return den_[k]; }

 private:
  std::vector<double> sum_;
  std::vector<std::size_t> cnt_;
  std::vector<double> num_;
  std::vector<std::size_t> den_;
  std::vector<std::size_t> touched_;
};

std::size_t skill_bound(const SkillSets& sets) {
  int m = -1;
  for (const auto& s : sets) {
    for (int k : s) {
      if (k < 0) throw ValidationError("negative cluster id in skill sets");
      m = std::max(m, k);
    }
  }
  return static_cast<std::size_t>(m + 1);
}

}  // namespace

std::map<int, RewardResult> compute_rewards(const MatchingStudy& study, const SkillSets& study_sets) {
  RewardAccumulator acc(skill_bound(study_sets));
  acc.run(study, study_sets, nullptr);
  std::map<int, RewardResult> out;
  for (std::size_t k = 0; k < skill_bound(study_sets); ++k) {
    if (!acc.has(k)) continue;
    RewardResult r;
    r.skill = static_cast<int>(k);
    r.reward = acc.reward(k);
    r.count = acc.count(k);
    out.emplace(r.skill, r);
  }
  return out;
}

void permutation_test(const MatchingStudy& study, const SkillSets& study_sets,
                      std::map<int, RewardResult>& observed, const PermutationConfig& config) {
  if (config.replicates == 0) throw ValidationError("permutation test needs at least one replicate");
  if (study_sets.size() != study.size()) throw ValidationError("skill sets do not match the matching study");
  const std::size_t n_skills = skill_bound(study_sets);
  if (observed.empty() || n_skills == 0) return;

  std::vector<double> obs(n_skills, 0.0);
  std::vector<char> tested(n_skills, 0);
  for (const auto& [skill, r] : observed) {
    if (static_cast<std::size_t>(skill) >= n_skills) continue;
    obs[static_cast<std::size_t>(skill)] = std::fabs(r.reward);
    tested[static_cast<std::size_t>(skill)] = 1;
  }

  std::size_t threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, config.replicates);
  std::vector<std::vector<std::size_t>> exceed(threads, std::vector<std::size_t>(n_skills, 0));
  std::vector<std::vector<std::size_t>> valid(threads, std::vector<std::size_t>(n_skills, 0));

  auto worker = [&](std::size_t t) {
    RewardAccumulator acc(n_skills);
    std::vector<std::size_t> order(study.size());
    for (std::size_t r = t; r < config.replicates; r += threads) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng(substream_seed(config.seed, r));
      rng.shuffle(std::span<std::size_t>(order));
      acc.run(study, study_sets, &order);
      for (std::size_t k = 0; k < n_skills; ++k) {
        if (!tested[k] || !acc.has(k)) continue;
        valid[t][k]++;
        if (std::fabs(acc.reward(k)) >= obs[k]) exceed[t][k]++;
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker, t);
  }

  for (auto& [skill, r] : observed) {
    const auto k = static_cast<std::size_t>(skill);
    if (k >= n_skills) continue;
    std::size_t e = 0, v = 0;
    for (std::size_t t = 0; t < threads; ++t) {
      e += exceed[t][k];
      v += valid[t][k];
    }
    if (v == 0) continue;
    r.p_value = static_cast<double>(e) / static_cast<double>(v);
    r.significance = significance_of(*r.p_value);
  }
}

std::optional<double> permutation_p_value(const MatchingStudy& study, const SkillSets& study_sets, int skill,
                                          const PermutationConfig& config) {
  auto all = compute_rewards(study, study_sets);
  auto it = all.find(skill);
  if (it == all.end()) return std::nullopt;
  std::map<int, RewardResult> one{{skill, it->second}};
  permutation_test(study, study_sets, one, config);
  return one.at(skill).p_value;
}

std::vector<SalaryBand> default_salary_bands() {
  return {{0, 20000}, {20000, 40000}, {40000, 60000}, {60000, 80000}};
}

std::vector<SalaryBand> parse_band_edges(std::string_view edges) {
  std::vector<double> e;
  for (const auto& f : split(edges, ',')) {
    auto v = parse_double(f);
    if (!v) throw ValidationError("bad salary band edge '" + f + "'");
    e.push_back(*v);
  }
  if (e.size() < 2) throw ValidationError("salary bands need at least two edges");
  std::vector<SalaryBand> out;
  for (std::size_t i = 1; i < e.size(); ++i) {
    if (!(e[i] > e[i - 1])) throw ValidationError("salary band edges must increase");
    out.push_back({e[i - 1], e[i]});
  }
  return out;
}

SalaryBandReport skills_by_salary_band(const std::vector<corpus::JobAd>& ads, const SkillSets& corpus_sets,
                                       const std::vector<SalaryBand>& bands, std::size_t bootstrap_replicates,
                                       std::uint64_t seed) {
  std::vector<std::vector<double>> counts(bands.size());
  for (std::size_t i = 0; i < ads.size(); ++i) {
    auto s = corpus::salary_point(ads[i]);
    if (!s) continue;
    for (std::size_t b = 0; b < bands.size(); ++b) {
      if (*s > bands[b].low && *s <= bands[b].high) {
        counts[b].push_back(static_cast<double>(corpus_sets.at(i).size()));
        break;
      }
    }
  }
  SalaryBandReport out;
  for (std::size_t b = 0; b < bands.size(); ++b) {
    SalaryBandSummary s{bands[b], counts[b].size(), std::nullopt};
    if (!counts[b].empty()) {
      s.mean_skills = stats::bootstrap_mean_ci(counts[b], bootstrap_replicates, substream_seed(seed, b));
    }
    out.bands.push_back(s);
  }
  for (std::size_t a = 0; a < bands.size(); ++a) {
    for (std::size_t b = a + 1; b < bands.size(); ++b) {
      BandComparison c{a, b, std::nullopt};
      if (counts[a].size() >= 2 && counts[b].size() >= 2) c.welch = stats::welch_t_test(counts[a], counts[b]);
      out.comparisons.push_back(c);
    }
  }
  return out;
}

}  // namespace softskills::matching
