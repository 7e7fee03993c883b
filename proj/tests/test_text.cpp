#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <set>

#include "errors.hpp"
#include "rng.hpp"
#include "table_io.hpp"
#include "text.hpp"

using namespace softskills;
using Words = std::vector<std::string>;

TEST_SUITE("text") {
  TEST_CASE("tokenize lowercases and splits on punctuation") {
    CHECK(tokenize_words("Excellent Communication-Skills, please!") ==
          Words{"excellent", "communication", "skills", "please"});
    CHECK(tokenize_words("  team   player ") == Words{"team", "player"});
    CHECK(tokenize_words("").empty());
    CHECK(tokenize_words("--- !!").empty());
  }

  TEST_CASE("apostrophes survive only inside words") {
    CHECK(tokenize_words("don't 'quoted' it's") == Words{"don't", "quoted", "it's"});
    CHECK(tokenize_words("workers' rights") == Words{"workers", "rights"});
  }

  TEST_CASE("non-ascii bytes are delimiters") {
    CHECK(tokenize_words("caf\xc3\xa9 \xc2\xa3" "20k") == Words{"caf", "20k"});
  }

  TEST_CASE("token offsets point into the source") {
    const std::string text = "Be a TEAM player.";
    auto seq = tokenize(text);
    REQUIRE(seq.size() == 4);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      CHECK(to_lower(text.substr(seq.origin_offsets[i], seq.tokens[i].size())) == seq.tokens[i]);
    }
  }

  TEST_CASE("tokenize is idempotent through join") {
    Rng rng(7);
    const std::string alphabet = "abAB9 -',.\t";
    for (int n = 0; n < 500; ++n) {
      std::string s;
      for (std::size_t k = 0, len = rng.below(30); k < len; ++k) s += alphabet[rng.below(alphabet.size())];
      auto once = tokenize_words(s);
      CHECK(tokenize_words(join(once)) == once);
    }
  }

  TEST_CASE("trim split join") {
    CHECK(trim("  a b \n") == "a b");
    CHECK(trim("   ").empty());
    CHECK(split("a,,b", ',') == Words{"a", "", "b"});
    CHECK(join(Words{"x", "y"}, "-") == "x-y");
  }

  TEST_CASE("edit distance with limit") {
    CHECK(edit_distance("skils", "skills", 1) == 1);
    CHECK(edit_distance("comunication", "communication", 1) == 1);
    CHECK(edit_distance("same", "same", 1) == 0);
    CHECK(edit_distance("abc", "xyz", 1) > 1);
    CHECK(edit_distance("ab", "abcd", 1) > 1);
  }

  TEST_CASE("stopword list loading") {
    auto sw = StopwordList::load(std::filesystem::path(SOFTSKILLS_DATA_DIR) / "stopwords.txt");
    CHECK(sw.contains("the"));
    CHECK(sw.contains("with"));
    CHECK_FALSE(sw.contains("team"));
    CHECK_THROWS_AS(StopwordList::load("/nonexistent/stopwords.txt"), IoError);

    const auto tmp = std::filesystem::path(SOFTSKILLS_TEST_TMP) / "bad_stopwords.txt";
    write_file(tmp, "# only a few\nthe\na\n");
    CHECK_THROWS_AS(StopwordList::load(tmp), ValidationError);
  }

  TEST_CASE("csv parsing handles quotes, embedded newlines and BOM") {
    auto t = parse_csv("\xEF\xBB\xBFId,Text\n1,\"a, \"\"b\"\"\nc\"\n2,plain\n");
    REQUIRE(t.header == Words{"Id", "Text"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "a, \"b\"\nc");
    CHECK(t.line_numbers[0] == 2);
    CHECK(t.line_numbers[1] == 4);
    CHECK(t.rows[1][1] == "plain");
  }

  TEST_CASE("csv row round trip") {
    Words fields{"plain", "with,comma", "with \"quote\"", "multi\nline", ""};
    auto t = parse_csv("h1,h2,h3,h4,h5\n" + csv_row(fields) + "\n");
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0] == fields);
  }

  TEST_CASE("tsv skips comments and blank lines") {
    auto t = parse_tsv("# header comment\n\na\tb\n# inner\n1\t2\n");
    CHECK(t.header == Words{"a", "b"});
    REQUIRE(t.rows.size() == 1);
    CHECK(t.line_numbers[0] == 5);
    CHECK_THROWS_AS(t.require_column("c", "test"), ParseError);
  }

  TEST_CASE("number formatting round trips") {
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
      const double v = (rng.uniform() - 0.5) * std::pow(10.0, static_cast<double>(rng.below(20)) - 10);
      CHECK(parse_double(format_double(v)).value() == v);
    }
    CHECK(format_fixed(7.797081306462822, 2) == "7.80");
    CHECK_FALSE(parse_double("12abc").has_value());
    CHECK_FALSE(parse_int("1.5").has_value());
    CHECK(parse_int(" 42 ").value() == 42);
  }

  TEST_CASE("substream seeds are distinct and rng is reproducible") {
    std::set<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 1000; ++i) seeds.insert(substream_seed(42, i));
    CHECK(seeds.size() == 1000);
    Rng a(substream_seed(1, 2)), b(substream_seed(1, 2));
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Rng c(9);
    for (int i = 0; i < 10000; ++i) {
      auto x = c.below(7);
      CHECK(x < 7);
    }
  }
}
