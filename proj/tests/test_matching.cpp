#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <optional>

#include "errors.hpp"
#include "matching.hpp"
#include "rng.hpp"
#include "text.hpp"

using namespace softskills;
using namespace softskills::matching;
using corpus::JobAd;

namespace {

StopwordList stopwords() {
  return StopwordList::load(std::filesystem::path(SOFTSKILLS_DATA_DIR) / "stopwords.txt");
}

JobAd ad(std::string id, std::string category, std::string title, std::optional<double> salary) {
  JobAd a;
  a.id = std::move(id);
  a.category = std::move(category);
  a.title = std::move(title);
  a.description = "text";
  if (salary) a.salary = corpus::SalaryRange{*salary, *salary};
  return a;
}

MatchedGroup cell(int skill, std::vector<double> with, std::vector<double> without) {
  return {skill, "c", "t", std::move(with), std::move(without)};
}

// Naive reward for one skill straight from (group, salary, skills) rows.
struct Row {
  std::size_t group;
  double salary;
  std::vector<int> skills;
};

std::optional<std::pair<double, std::size_t>> naive_reward(const std::vector<Row>& rows, int skill) {
  std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> g;
  for (const auto& r : rows) {
    const bool has = std::find(r.skills.begin(), r.skills.end(), skill) != r.skills.end();
    (has ? g[r.group].first : g[r.group].second).push_back(r.salary);
  }
  double num = 0;
  std::size_t den = 0;
  for (const auto& [k, sides] : g) {
    const auto& [w, wo] = sides;
    if (w.empty() || wo.empty()) continue;
    const double m = std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
    const double mb = std::accumulate(wo.begin(), wo.end(), 0.0) / static_cast<double>(wo.size());
    const std::size_t weight = std::min(w.size(), wo.size());
    num += (m - mb) / mb * 100 * static_cast<double>(weight);
    den += weight;
  }
  if (!den) return std::nullopt;
  return std::make_pair(num / static_cast<double>(den), den);
}

struct Synthetic {
  std::vector<JobAd> ads;
  SkillSets sets;
};

// Random corpus over a few (category, title) groups. Skill 0 multiplies the
// salary by `effect`; skills 1..3 are independent of salary.
Synthetic synthetic(Rng& rng, std::size_t n, double effect) {
  Synthetic s;
  const std::vector<std::string> cats{"IT Jobs", "Sales Jobs", "Teaching Jobs"};
  const std::vector<std::string> titles{"Developer", "Manager", "Assistant", "Analyst"};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> skills;
    for (int k = 0; k < 4; ++k) {
      if (rng.uniform() < 0.4) skills.push_back(k);
    }
    double salary = 20000 + 10000 * rng.uniform();
    if (!skills.empty() && skills.front() == 0) salary *= effect;
    s.ads.push_back(ad(std::to_string(i), cats[rng.below(cats.size())], titles[rng.below(titles.size())], salary));
    s.sets.push_back(skills);
  }
  return s;
}

}  // namespace

TEST_SUITE("matching") {
  TEST_CASE("reward cell") {
    CHECK(reward_cell(46536, 43170) == doctest::Approx(7.797081306462822).epsilon(1e-12));
    CHECK(reward_cell(110, 100) == doctest::Approx(10.0));
    CHECK(reward_cell(100, 100) == 0);
    CHECK(reward_cell(cell(1, {100, 120}, {100})) == doctest::Approx(10.0));
    CHECK_THROWS_AS(reward_cell(1, 0), ValidationError);
    CHECK_THROWS_AS(reward_cell(cell(1, {}, {100})), ValidationError);
  }

  TEST_CASE("reward cell scaling is exact, shifting is not") {
    Rng rng(12);
    for (int n = 0; n < 500; ++n) {
      std::vector<double> w(1 + rng.below(5)), wo(1 + rng.below(5));
      for (auto& x : w) x = static_cast<double>(10000 + rng.below(50000));
      for (auto& x : wo) x = static_cast<double>(10000 + rng.below(50000));
      const double r = reward_cell(cell(0, w, wo));
      auto w2 = w, wo2 = wo;
      for (auto& x : w2) x *= 2;
      for (auto& x : wo2) x *= 2;
      CHECK(reward_cell(cell(0, w2, wo2)) == r);
      if (r != 0) {
        for (auto& x : w) x += 1000;
        for (auto& x : wo) x += 1000;
        CHECK(reward_cell(cell(0, w, wo)) != r);
      }
    }
  }

  TEST_CASE("aggregate") {
    std::vector<MatchedGroup> cells{cell(4, std::vector<double>(5, 110), std::vector<double>(5, 100)),
                                    cell(4, std::vector<double>(15, 98), std::vector<double>(20, 100))};
    auto r = reward_aggregate(cells);
    REQUIRE(r);
    CHECK(r->reward == doctest::Approx(1.0));
    CHECK(r->count == 20);
    CHECK(r->skill == 4);
    auto single = reward_aggregate({cells[0]});
    CHECK(single->reward == doctest::Approx(10.0));
    CHECK_FALSE(reward_aggregate({}).has_value());
  }

  TEST_CASE("aggregate lies between the cell rewards") {
    Rng rng(19);
    for (int n = 0; n < 500; ++n) {
      std::vector<MatchedGroup> cells;
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t k = 0, len = 1 + rng.below(6); k < len; ++k) {
        std::vector<double> w(1 + rng.below(4)), wo(1 + rng.below(4));
        for (auto& x : w) x = 1000 + 1000 * rng.uniform();
        for (auto& x : wo) x = 1000 + 1000 * rng.uniform();
        cells.push_back(cell(0, w, wo));
        lo = std::min(lo, reward_cell(cells.back()));
        hi = std::max(hi, reward_cell(cells.back()));
      }
      const double r = reward_aggregate(cells)->reward;
      CHECK(r >= lo - 1e-9);
      CHECK(r <= hi + 1e-9);
    }
  }

  TEST_CASE("matched groups from a hand fixture") {
    const auto sw = stopwords();
    std::vector<JobAd> ads{
        ad("1", "IT Jobs", "Java Developer", 30000), ad("2", "IT Jobs", "Developer, Java", 34000),
        ad("3", "IT Jobs", "java developer", 26000), ad("4", "IT Jobs", "Java Developer", 30000),
        ad("5", "IT Jobs", "Tester", 25000),  // title occurs once
        ad("6", "Sales Jobs", "Java Developer", 40000),  // different category, single
        ad("7", "IT Jobs", "Java Developer", std::nullopt),  // no salary
        ad("8", "", "Java Developer", 30000),  // no category
        ad("9", "Teaching Jobs", "Teacher", 20000), ad("10", "Teaching Jobs", "Teacher", 22000),
    };
    SkillSets sets{{1, 2}, {1, 2}, {2}, {2}, {1}, {1}, {1}, {1}, {2}, {2}};
    auto cells = build_matched_groups(ads, sets, sw);
    REQUIRE(cells.size() == 1);
    const auto& c = cells.begin()->second;
    CHECK(c.skill == 1);
    CHECK(c.category == "IT Jobs");
    CHECK(c.title_key == "developer java");
    CHECK(c.treated() == 2);
    CHECK(c.control() == 2);
    CHECK(stats::mean(c.with_salaries) == 32000);
    CHECK(stats::mean(c.without_salaries) == 28000);

    auto study = prepare_study(ads, sw);
    CHECK(study.groups.size() == 2);
    CHECK(study.size() == 6);
    auto rewards = compute_rewards(study, study_skill_sets(study, sets));
    REQUIRE(rewards.count(1));
    CHECK_FALSE(rewards.count(2));
    CHECK(rewards.at(1).reward == doctest::Approx(reward_cell(32000, 28000)));
    CHECK(rewards.at(1).count == 2);

    auto strict = prepare_study(ads, sw, 5);
    CHECK(strict.groups.empty());
  }

  TEST_CASE("one-pass rewards equal the per-cell aggregate and a naive recount") {
    const auto sw = stopwords();
    Rng rng(41);
    for (int n = 0; n < 60; ++n) {
      auto syn = synthetic(rng, 20 + rng.below(200), 1.0 + rng.uniform());
      auto study = prepare_study(syn.ads, sw);
      auto sets = study_skill_sets(study, syn.sets);
      auto fast = compute_rewards(study, sets);
      auto cells = build_matched_groups(syn.ads, syn.sets, sw);

      std::vector<Row> rows;
      for (std::size_t g = 0; g < study.groups.size(); ++g) {
        for (auto m : study.groups[g].members) rows.push_back({g, study.salaries[m], sets[m]});
      }
      for (int skill = 0; skill < 4; ++skill) {
        std::vector<MatchedGroup> mine;
        for (const auto& [key, c] : cells) {
          if (std::get<0>(key) == skill) mine.push_back(c);
        }
        auto agg = reward_aggregate(mine);
        auto naive = naive_reward(rows, skill);
        REQUIRE(agg.has_value() == naive.has_value());
        REQUIRE(agg.has_value() == (fast.count(skill) == 1));
        if (!agg) continue;
        CHECK(fast.at(skill).reward == doctest::Approx(agg->reward).epsilon(1e-9));
        CHECK(fast.at(skill).count == agg->count);
        CHECK(naive->first == doctest::Approx(agg->reward).epsilon(1e-9));
        CHECK(naive->second == agg->count);
      }
    }
  }

  TEST_CASE("permutation p-value agrees with exact enumeration") {
    // Six study ads in two title groups: 720 permutations can be enumerated.
    const auto sw = stopwords();
    std::vector<JobAd> ads{ad("1", "IT Jobs", "Developer", 30000), ad("2", "IT Jobs", "Developer", 36000),
                           ad("3", "IT Jobs", "Developer", 27000), ad("4", "Sales Jobs", "Manager", 41000),
                           ad("5", "Sales Jobs", "Manager", 39000), ad("6", "Sales Jobs", "Manager", 52000)};
    SkillSets sets{{0}, {0, 1}, {}, {1}, {}, {0}};
    auto study = prepare_study(ads, sw);
    auto ssets = study_skill_sets(study, sets);
    auto observed = compute_rewards(study, ssets);

    for (int skill : {0, 1}) {
      std::vector<std::size_t> perm(ssets.size());
      std::iota(perm.begin(), perm.end(), 0);
      const double obs = observed.at(skill).reward;
      std::size_t exceed = 0, valid = 0;
      do {
        std::vector<Row> rows;
        for (std::size_t g = 0; g < study.groups.size(); ++g) {
          for (auto m : study.groups[g].members) rows.push_back({g, study.salaries[m], ssets[perm[m]]});
        }
        auto r = naive_reward(rows, skill);
        if (!r) continue;
        valid++;
        if (std::abs(r->first) >= std::abs(obs) - 1e-9) exceed++;
      } while (std::next_permutation(perm.begin(), perm.end()));
      const double exact = static_cast<double>(exceed) / static_cast<double>(valid);
      auto p = permutation_p_value(study, ssets, skill, {20000, 5, 4});
      REQUIRE(p);
      CAPTURE(skill);
      CHECK(*p == doctest::Approx(exact).epsilon(0.02).scale(1));
    }
  }

  TEST_CASE("permutation results are reproducible and thread independent") {
    const auto sw = stopwords();
    Rng rng(77);
    auto syn = synthetic(rng, 400, 1.3);
    auto study = prepare_study(syn.ads, sw);
    auto sets = study_skill_sets(study, syn.sets);
    auto base = compute_rewards(study, sets);
    permutation_test(study, sets, base, {300, 11, 1});
    for (std::size_t threads : {2u, 5u, 16u}) {
      auto again = compute_rewards(study, sets);
      permutation_test(study, sets, again, {300, 11, threads});
      for (const auto& [k, r] : base) CHECK(again.at(k).p_value == r.p_value);
    }
    CHECK(base.at(0).p_value.value() <= 0.01);
    CHECK(base.at(0).significance == Significance::P01);
    auto other = compute_rewards(study, sets);
    permutation_test(study, sets, other, {300, 12, 1});
    bool differs = false;
    for (const auto& [k, r] : base) differs |= other.at(k).p_value != r.p_value;
    CHECK(differs);
  }

  TEST_CASE("p-value does not depend on ad order or ids") {
    const auto sw = stopwords();
    Rng rng(5);
    auto syn = synthetic(rng, 150, 1.0);
    auto study = prepare_study(syn.ads, sw);
    auto p = permutation_p_value(study, study_skill_sets(study, syn.sets), 1, {200, 3, 1});

    // Relabel ids; the study is keyed by (category, title) so order within the
    // corpus is preserved and the p-value must be identical.
    auto relabeled = syn.ads;
    for (auto& a : relabeled) a.id = "x" + a.id;
    auto study2 = prepare_study(relabeled, sw);
    CHECK(permutation_p_value(study2, study_skill_sets(study2, syn.sets), 1, {200, 3, 1}) == p);
  }

  TEST_CASE("permutation boundaries") {
    const auto sw = stopwords();
    std::vector<JobAd> ads{ad("1", "IT Jobs", "Developer", 30000), ad("2", "IT Jobs", "Developer", 30000),
                           ad("3", "IT Jobs", "Developer", 30000)};
    SkillSets sets{{0}, {}, {}};
    auto study = prepare_study(ads, sw);
    auto ssets = study_skill_sets(study, sets);
    CHECK(permutation_p_value(study, ssets, 0, {1, 9, 1}).value() == 1.0);
    CHECK_FALSE(permutation_p_value(study, ssets, 3, {10, 9, 1}).has_value());
    auto obs = compute_rewards(study, ssets);
    CHECK_THROWS_AS(permutation_test(study, ssets, obs, {0, 9, 1}), ValidationError);
  }

  TEST_CASE("significance stars") {
    CHECK(stars(significance_of(0.01)) == "**");
    CHECK(stars(significance_of(0.0100001)) == "*");
    CHECK(stars(significance_of(0.05)) == "*");
    CHECK(stars(significance_of(0.051)) == "");
  }

  TEST_CASE("band edges") {
    auto d = parse_band_edges("0,20000,40000");
    REQUIRE(d.size() == 2);
    CHECK(d[1].low == 20000);
    CHECK(d[1].high == 40000);
    CHECK(default_salary_bands().size() == 4);
    CHECK_THROWS_AS(parse_band_edges("0,20000,20000"), ValidationError);
    CHECK_THROWS_AS(parse_band_edges("0"), ValidationError);
    CHECK_THROWS_AS(parse_band_edges("0,abc"), ValidationError);
  }

  TEST_CASE("salary bands") {
    std::vector<JobAd> ads{ad("1", "c", "t", 15000), ad("2", "c", "t", 20000), ad("3", "c", "t", 20001),
                           ad("4", "c", "t", 39000), ad("5", "c", "t", 90000), ad("6", "c", "t", std::nullopt)};
    SkillSets sets{{1, 2, 3}, {1, 2, 3}, {1}, {1, 2}, {1}, {1}};
    auto rep = skills_by_salary_band(ads, sets, parse_band_edges("0,20000,40000,60000"), 100, 4);
    REQUIRE(rep.bands.size() == 3);
    CHECK(rep.bands[0].ads == 2);
    CHECK(rep.bands[0].mean_skills->estimate == 3);
    CHECK(rep.bands[0].mean_skills->low == 3);
    CHECK(rep.bands[0].mean_skills->high == 3);
    CHECK(rep.bands[1].ads == 2);
    CHECK(rep.bands[1].mean_skills->estimate == 1.5);
    CHECK(rep.bands[1].mean_skills->low <= 1.5);
    CHECK(rep.bands[1].mean_skills->high >= 1.5);
    CHECK(rep.bands[2].ads == 0);
    CHECK_FALSE(rep.bands[2].mean_skills.has_value());
    REQUIRE(rep.comparisons.size() == 3);
    CHECK(rep.comparisons[0].welch.has_value());
    CHECK_FALSE(rep.comparisons[1].welch.has_value());

    auto again = skills_by_salary_band(ads, sets, parse_band_edges("0,20000,40000,60000"), 100, 4);
    CHECK(again.bands[1].mean_skills->low == rep.bands[1].mean_skills->low);

    std::vector<JobAd> twin{ad("1", "c", "t", 100), ad("2", "c", "t", 200), ad("3", "c", "t", 300),
                            ad("4", "c", "t", 400)};
    auto same = skills_by_salary_band(twin, {{1}, {1, 2}, {1}, {1, 2}}, parse_band_edges("0,250,500"), 50, 1);
    CHECK(same.comparisons[0].welch->t == 0);
    CHECK(same.comparisons[0].welch->p == doctest::Approx(1.0));
  }
}
