#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "detection.hpp"
#include "errors.hpp"
#include "oracles.hpp"
#include "rng.hpp"
#include "text.hpp"

using namespace softskills;
using namespace softskills::detection;
using lexicon::CompetencePolicy;
using lexicon::LexiconEntry;

namespace {

StopwordList stopwords() {
  return StopwordList::load(std::filesystem::path(SOFTSKILLS_DATA_DIR) / "stopwords.txt");
}

LexiconEntry entry(std::string phrase, int cluster, CompetencePolicy policy = CompetencePolicy::Auto,
                   std::vector<std::string> essential = {}) {
  LexiconEntry e;
  e.skill = lexicon::SkillPhrase::from_text(phrase);
  e.skill.competence = policy;
  e.skill.essential_stopwords = std::move(essential);
  e.cluster_id = cluster;
  return e;
}

SkillPattern pattern(std::vector<std::string> tokens, int cluster) {
  SkillPattern p;
  p.cluster_id = cluster;
  p.tokens = std::move(tokens);
  p.phrase = join(p.tokens);
  return p;
}

Matcher matcher_for(const std::vector<LexiconEntry>& entries, std::size_t max_gap = 2) {
  const auto sw = stopwords();
  return Matcher(compile_patterns(entries, default_competence_terms(), sw), sw, max_gap);
}

corpus::JobAd ad(std::string id, std::string text, std::string category = "") {
  corpus::JobAd a;
  a.id = std::move(id);
  a.description = std::move(text);
  a.category = std::move(category);
  return a;
}

}  // namespace

TEST_SUITE("detection") {
  TEST_CASE("pattern compilation policies") {
    const auto sw = stopwords();
    const auto terms = default_competence_terms();
    auto ps = compile_patterns({entry("communication skills", 0), entry("ability to work in a team", 1),
                                entry("leadership skills", 2, CompetencePolicy::Keep),
                                entry("ability to lead", 3, CompetencePolicy::Strip),
                                entry("work in a team", 4, CompetencePolicy::Auto, {"in"})},
                               terms, sw);
    CHECK(ps[0].tokens == std::vector<std::string>{"communication", "skills"});
    CHECK_FALSE(ps[0].competence_removed);
    CHECK(ps[1].tokens == std::vector<std::string>{"work", "team"});
    CHECK(ps[1].competence_removed);
    CHECK(ps[2].tokens == std::vector<std::string>{"leadership", "skills"});
    CHECK(ps[3].tokens == std::vector<std::string>{"lead"});
    CHECK(ps[4].tokens == std::vector<std::string>{"work", "in", "team"});

    LexiconEntry no_cluster = entry("empathy", 0);
    no_cluster.cluster_id.reset();
    CHECK_THROWS_AS(compile_patterns({no_cluster}, terms, sw), ValidationError);
    CHECK_THROWS_AS(compile_patterns({entry("the", 0)}, terms, sw), ValidationError);
    CHECK_THROWS_AS(compile_patterns({entry("skills", 0, CompetencePolicy::Strip)}, terms, sw), ValidationError);
  }

  TEST_CASE("matcher examples") {
    auto m = matcher_for({entry("team player", 1), entry("communication skills", 2), entry("ability to work in a team", 3)});
    CHECK(m.detect("You must be a team player.").clusters == std::vector<int>{1});
    CHECK(m.detect("A team and player").clusters == std::vector<int>{1});
    CHECK(m.detect("A team, reliable, punctual player").clusters == std::vector<int>{1});
    CHECK(m.detect("A team, reliable, punctual, calm player").clusters.empty());
    CHECK(m.detect("Strong communication and writing skills").clusters == std::vector<int>{2});
    CHECK(m.detect("You can work well in a team").clusters == std::vector<int>{3});
    CHECK(m.detect("Player team").clusters.empty());
    CHECK(m.detect("").clusters.empty());

    auto strict = matcher_for({entry("team player", 1)}, 0);
    CHECK(strict.detect("a team of the player").clusters == std::vector<int>{1});
    CHECK(strict.detect("a team good player").clusters.empty());
  }

  TEST_CASE("matcher agrees with the brute-force oracle") {
    const auto sw = stopwords();
    const std::vector<std::string> vocab{"team", "player", "work", "lead", "calm", "the", "of", "and", "a", "to"};
    Rng rng(2024);
    for (int n = 0; n < 3000; ++n) {
      std::vector<std::string> text;
      for (std::size_t k = 0, len = rng.below(31); k < len; ++k) text.push_back(vocab[rng.below(vocab.size())]);
      std::vector<SkillPattern> patterns;
      std::vector<std::vector<std::string>> raw;
      for (std::size_t p = 0, np = 1 + rng.below(4); p < np; ++p) {
        std::vector<std::string> toks;
        for (std::size_t k = 0, len = 1 + rng.below(3); k < len; ++k) toks.push_back(vocab[rng.below(5)]);
        raw.push_back(toks);
        patterns.push_back(pattern(toks, static_cast<int>(p)));
      }
      const std::size_t gap = rng.below(3);
      Matcher m(patterns, sw, gap);
      auto got = m.detect(join(text));
      std::vector<oracle::Occurrence> mine;
      for (const auto& o : got.occurrences) mine.push_back({o.pattern, o.start, o.end});
      std::sort(mine.begin(), mine.end());
      std::vector<bool> is_stop;
      for (const auto& t : text) is_stop.push_back(sw.contains(t));
      CAPTURE(join(text));
      CAPTURE(gap);
      CHECK(mine == oracle::brute_force_matches(text, is_stop, raw, gap));
    }
  }

  TEST_CASE("detection is monotone in max_gap") {
    const auto sw = stopwords();
    const std::vector<std::string> vocab{"team", "player", "work", "lead", "calm", "the", "of"};
    Rng rng(9);
    for (int n = 0; n < 500; ++n) {
      std::string text;
      for (std::size_t k = 0, len = rng.below(25); k < len; ++k) text += vocab[rng.below(vocab.size())] + " ";
      std::vector<SkillPattern> ps{pattern({"team", "player"}, 0), pattern({"lead", "work", "calm"}, 1)};
      auto narrow = Matcher(ps, sw, 0).detect(text).clusters;
      auto wide = Matcher(ps, sw, 2).detect(text).clusters;
      CHECK(std::includes(wide.begin(), wide.end(), narrow.begin(), narrow.end()));
    }
  }

  TEST_CASE("corpus detection does not depend on the thread count") {
    auto m = matcher_for({entry("team player", 1), entry("leadership", 2), entry("patience", 3)});
    Rng rng(6);
    const std::vector<std::string> vocab{"team", "player", "leadership", "patience", "a", "the", "busy"};
    std::vector<corpus::JobAd> ads;
    for (int i = 0; i < 1000; ++i) {
      std::string text;
      for (std::size_t k = 0, len = rng.below(15); k < len; ++k) text += vocab[rng.below(vocab.size())] + " ";
      ads.push_back(ad(std::to_string(i), text));
    }
    auto one = detect_corpus(ads, m, 1);
    for (std::size_t t : {2u, 3u, 8u, 0u}) {
      auto many = detect_corpus(ads, m, t);
      CHECK(many.clusters == one.clusters);
      CHECK(serialize_detections(many) == serialize_detections(one));
    }
  }

  TEST_CASE("detections file") {
    std::vector<corpus::JobAd> ads{ad("a", "team player"), ad("b", "nothing"), ad("c", "leadership")};
    auto m = matcher_for({entry("team player", 1), entry("leadership", 2)});
    auto det = detect_corpus(ads, m, 1);
    CHECK(det.summary.ads == 3);
    CHECK(det.summary.with_any == 2);
    CHECK(det.summary.with_three == 0);
    auto back = parse_detections(serialize_detections(det), ads);
    CHECK(back.clusters == det.clusters);

    CHECK_THROWS_AS(parse_detections("ad_id\tclusters\na\t1\nb\t\n", ads), ValidationError);
    CHECK_THROWS_AS(parse_detections("ad_id\tclusters\na\t1\na\t1\nb\t\nc\t2\n", ads), ValidationError);
    CHECK_THROWS_AS(parse_detections("ad_id\tclusters\na\t1\nb\t\nc\t2\nz\t1\n", ads), ValidationError);
    CHECK_THROWS_AS(parse_detections("ad_id\tclusters\na\tx\nb\t\nc\t2\n", ads), ParseError);
  }

  TEST_CASE("coverage of an empty corpus") {
    auto s = summarize({});
    CHECK(s.ads == 0);
    CHECK(s.fraction_any() == 0);
  }

  TEST_CASE("distinctiveness") {
    std::vector<corpus::JobAd> ads{ad("1", "x", "IT Jobs"), ad("2", "x", "IT Jobs"), ad("3", "x", "Teaching Jobs"),
                                   ad("4", "x", "Teaching Jobs")};
    CorpusDetections det;
    det.clusters = {{1, 2}, {1}, {2}, {2, 3}};
    auto rows = distinctiveness(det, ads, "IT Jobs");
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].cluster_id == 1);
    CHECK(rows[0].pct_in_category == 100);
    CHECK(rows[0].pct_overall == 50);
    CHECK(rows[0].delta == 50);
    CHECK(rows[1].cluster_id == 2);
    CHECK(rows[1].delta == doctest::Approx(50 - 75));
    CHECK(rows[2].cluster_id == 3);
    CHECK(rows[2].delta == -25);
    CHECK_THROWS_AS(distinctiveness(det, ads, "Sales Jobs"), ValidationError);
  }
}
