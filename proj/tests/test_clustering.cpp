#include <doctest.h>

#include <filesystem>
#include <map>

#include "clustering.hpp"
#include "errors.hpp"
#include "oracles.hpp"
#include "rng.hpp"
#include "table_io.hpp"
#include "text.hpp"

using namespace softskills;
using namespace softskills::clustering;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = SOFTSKILLS_FIXTURE_DIR;
const fs::path kTmp = SOFTSKILLS_TEST_TMP;

StopwordList stopwords() { return StopwordList::load(fs::path(SOFTSKILLS_DATA_DIR) / "stopwords.txt"); }

std::vector<std::vector<double>> random_points(Rng& rng, std::size_t n, std::size_t dim) {
  std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
  for (auto& p : pts) {
    for (auto& x : p) x = rng.normal();
  }
  return pts;
}

// Two assignments describe the same partition when they induce the same
// equivalence relation on the points.
bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) {
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    }
  }
  return true;
}

PhraseVector pv(std::string phrase, std::vector<double> v) { return {std::move(phrase), std::move(v), 1}; }

}  // namespace

TEST_SUITE("clustering") {
  TEST_CASE("text embeddings") {
    auto e = parse_embeddings_text("3 4\nteam 1 0 0 0\nplayer 0 1 0 0\nlead 0 0 1 0.5\n");
    CHECK(e.table.dimension() == 4);
    CHECK(e.table.size() == 3);
    CHECK(e.table.lookup("lead")[3] == 0.5f);
    CHECK(e.table.lookup("absent").empty());

    try {
      parse_embeddings_text("2 4\nteam 1 0 0 0\nplayer 0 1 0\n");
      FAIL("expected ParseError");
    } catch (const ParseError& err) {
      CHECK(std::string(err.what()).find("3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_embeddings_text("x y\n"), ParseError);
    CHECK_THROWS_AS(parse_embeddings_text("1 2\nbad 1 nan\n"), ParseError);

    auto dup = parse_embeddings_text("2 2\nteam 1 0\nteam 0 1\n");
    CHECK(dup.table.size() == 1);
    CHECK(dup.report.duplicates == 1);
    CHECK(dup.table.lookup("team")[0] == 1.0f);
  }

  TEST_CASE("fixture embeddings give exact floats") {
    auto e = load_embeddings(kFixtures / "embeddings.txt");
    CHECK(e.table.size() == 19);
    CHECK(e.table.dimension() == 4);
    const auto v = e.table.lookup("patience");
    REQUIRE(v.size() == 4);
    CHECK(v[0] == -0.4f);
    CHECK(v[3] == 0.9f);
    CHECK(e.table.lookup("independently")[2] == 0.6f);
    CHECK_THROWS_AS(load_embeddings(kFixtures / "missing.txt"), IoError);
  }

  TEST_CASE("binary embeddings round trip") {
    auto text = load_embeddings(kFixtures / "embeddings.txt");
    const auto bin_path = kTmp / "embeddings.bin";
    write_file(bin_path, serialize_embeddings_binary(text.table));
    auto bin = load_embeddings(bin_path);
    REQUIRE(bin.table.size() == text.table.size());
    for (const auto& tok : text.table.tokens()) {
      const auto a = text.table.lookup(tok), b = bin.table.lookup(tok);
      CHECK(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
    auto again = parse_embeddings_text(serialize_embeddings_text(text.table));
    CHECK(again.table.tokens() == text.table.tokens());

    auto truncated = serialize_embeddings_binary(text.table);
    truncated.resize(truncated.size() / 2);
    CHECK_THROWS_AS(parse_embeddings_binary(truncated), ParseError);
  }

  TEST_CASE("phrase embedding") {
    const auto sw = stopwords();
    auto e = parse_embeddings_text("4 3\ncreative 0.5 -1 2\nability 1 0 0\nwork 0 1 0\nteam 0 0 1\n");
    auto one = embed_phrase("creative", e.table, sw);
    REQUIRE(one);
    CHECK(one->vector == std::vector<double>{0.5, -1, 2});

    auto three = embed_phrase("ability to work in a team", e.table, sw);
    REQUIRE(three);
    CHECK(three->covered_tokens == 3);
    for (double x : three->vector) CHECK(x == doctest::Approx(1.0 / 3));

    CHECK_FALSE(embed_phrase("unheard of words", e.table, sw).has_value());
  }

  TEST_CASE("agglomeration matches the naive average-linkage oracle") {
    Rng rng(101);
    for (int n = 0; n < 500; ++n) {
      const std::size_t count = 1 + rng.below(8), dim = 2 + rng.below(4);
      const auto pts = random_points(rng, count, dim);
      const std::size_t target = 1 + rng.below(count);
      const auto got = agglomerate_points(pts, target);
      const auto want = oracle::average_linkage(pts, target);
      CAPTURE(n);
      CHECK(got.assignment == want);
    }
  }

  TEST_CASE("identity and bounds") {
    Rng rng(3);
    const auto pts = random_points(rng, 6, 3);
    auto id = agglomerate_points(pts, 6);
    CHECK(id.merges.empty());
    for (std::size_t i = 0; i < 6; ++i) CHECK(id.assignment[i] == i);
    CHECK_THROWS_AS(agglomerate_points(pts, 7), ValidationError);
    CHECK_THROWS_AS(agglomerate_points(pts, 0), ValidationError);
  }

  TEST_CASE("merge heights never decrease") {
    Rng rng(55);
    for (int n = 0; n < 200; ++n) {
      const auto pts = random_points(rng, 2 + rng.below(20), 3);
      auto agg = agglomerate_points(pts, 1);
      for (std::size_t k = 1; k < agg.merges.size(); ++k) {
        CHECK(agg.merges[k].height >= agg.merges[k - 1].height - 1e-12);
      }
    }
  }

  TEST_CASE("clustering is invariant to positive rescaling of vectors") {
    Rng rng(77);
    for (int n = 0; n < 200; ++n) {
      auto pts = random_points(rng, 2 + rng.below(12), 4);
      const std::size_t target = 1 + rng.below(pts.size());
      auto base = agglomerate_points(pts, target);
      for (auto& p : pts) {
        const double s = 0.1 + 10 * rng.uniform();
        for (auto& x : p) x *= s;
      }
      CHECK(same_partition(base.assignment, agglomerate_points(pts, target).assignment));
    }
  }

  TEST_CASE("cluster set ids, labels and unembedded singletons") {
    std::vector<PhraseVector> vs{pv("team player", {1, 0.1}), pv("leadership", {0, 1}), pv("teamwork", {1, 0}),
                                 pv("leader", {0.05, 1})};
    auto set = agglomerate(vs, 2, {"polite"});
    REQUIRE(set.clusters.size() == 3);
    CHECK(set.clusters[0].id == 0);
    CHECK(set.clusters[0].members == std::vector<std::string>{"team player", "teamwork"});
    CHECK(set.clusters[1].members == std::vector<std::string>{"leadership", "leader"});
    CHECK(set.clusters[2].members == std::vector<std::string>{"polite"});
    CHECK(set.clusters[2].label == "polite");
    CHECK(set.phrase_count() == 5);
    CHECK_NOTHROW(check_partition(set));

    auto back = parse_clusters(serialize_clusters(set));
    REQUIRE(back.clusters.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(back.clusters[i].id == set.clusters[i].id);
      CHECK(back.clusters[i].label == set.clusters[i].label);
      CHECK(back.clusters[i].members == set.clusters[i].members);
    }
  }

  TEST_CASE("edit scripts") {
    ClusterSet set;
    set.clusters = {{0, "team player", {"team player", "teamwork", "leadership"}},
                    {1, "empathy", {"empathy"}},
                    {2, "patience", {"patience"}}};
    auto script = parse_cluster_edits(
        "# refine\n"
        "split 0 : team player, teamwork | leadership\n"
        "merge 1 2\n"
        "move teamwork -> 3\n"
        "label 1 caring\n");
    REQUIRE(script.size() == 4);
    auto out = apply_cluster_edits(set, script);
    const auto& c = out.clusters;
    REQUIRE(c.clusters.size() == 3);
    CHECK(c.find(0)->members == std::vector<std::string>{"team player"});
    CHECK(c.find(1)->members == std::vector<std::string>{"empathy", "patience"});
    CHECK(c.find(1)->label == "caring");
    CHECK(c.find(3)->members == std::vector<std::string>{"leadership", "teamwork"});
    CHECK_FALSE(c.find(2));
    CHECK(out.log.back() == "clusters before: 3, after: 3");

    try {
      apply_cluster_edits(set, parse_cluster_edits("label 0 ok\nmerge 0 9\n"));
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("#2") != std::string::npos);
    }
    CHECK_THROWS_AS(apply_cluster_edits(set, parse_cluster_edits("split 0 : team player | leadership\n")),
                    ValidationError);
    CHECK_THROWS_AS(apply_cluster_edits(set, parse_cluster_edits("move absent -> 1\n")), ValidationError);
    CHECK_THROWS_AS(parse_cluster_edits("split 0 : a\n"), ParseError);
    CHECK_THROWS_AS(parse_cluster_edits("merge 1\n"), ParseError);
    CHECK_THROWS_AS(parse_cluster_edits("explode 1\n"), ParseError);
  }

  TEST_CASE("partition check") {
    ClusterSet bad;
    bad.clusters = {{0, "a", {"a"}}, {1, "b", {"a"}}};
    CHECK_THROWS_AS(check_partition(bad), ValidationError);
    bad.clusters = {{0, "a", {"a"}}, {0, "b", {"b"}}};
    CHECK_THROWS_AS(check_partition(bad), ValidationError);
    bad.clusters = {{0, "a", {}}};
    CHECK_THROWS_AS(check_partition(bad), ValidationError);
  }
}
