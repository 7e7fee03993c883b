#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "softskills/softskills.h"

namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = SOFTSKILLS_FIXTURE_DIR;
const fs::path kData = SOFTSKILLS_DATA_DIR;
const fs::path kTmp = SOFTSKILLS_TEST_TMP;

struct Config {
  ss_config* c = nullptr;
  Config() { REQUIRE(ss_config_create(&c) == SS_OK); }
  ~Config() { ss_config_destroy(c); }
  std::string get(const char* key) const {
    char buf[512];
    size_t needed = 0;
    REQUIRE(ss_config_get(c, key, buf, sizeof buf, &needed) == SS_OK);
    return buf;
  }
  std::string digest() const {
    char out[65];
    REQUIRE(ss_config_digest(c, out) == SS_OK);
    return out;
  }
};

void fixture_paths(ss_config* c, const fs::path& out) {
  REQUIRE(ss_config_load(c, (kFixtures / "config.json").c_str()) == SS_OK);
  for (const char* key : {"submissions", "annotations", "curation", "embeddings", "corpus", "stereotype_map",
                          "cluster_edits"}) {
    char buf[512];
    size_t needed = 0;
    REQUIRE(ss_config_get(c, key, buf, sizeof buf, &needed) == SS_OK);
    REQUIRE(ss_config_set(c, key, (kFixtures / buf).c_str()) == SS_OK);
  }
  REQUIRE(ss_config_set(c, "stopwords", (kData / "stopwords.txt").c_str()) == SS_OK);
  REQUIRE(ss_config_set(c, "gender_map", (kData / "gender_map.tsv").c_str()) == SS_OK);
  REQUIRE(ss_config_set(c, "competence_terms", (kData / "competence_terms.txt").c_str()) == SS_OK);
  fs::remove_all(out);
  REQUIRE(ss_config_set(c, "out_dir", out.c_str()) == SS_OK);
}

}  // namespace

TEST_SUITE("c_api") {
  TEST_CASE("status strings and version") {
    CHECK(std::strlen(ss_version()) > 0);
    CHECK(std::string(ss_status_string(SS_OK)) != std::string(ss_status_string(SS_ERR_IO)));
    CHECK(std::strlen(ss_status_string(static_cast<ss_status>(1234))) > 0);
  }

  TEST_CASE("config handle") {
    Config cfg;
    CHECK(cfg.get("max_gap") == "2");
    CHECK(cfg.get("seed") == "");
    CHECK(ss_config_set(cfg.c, "max_gap", "3") == SS_OK);
    CHECK(cfg.get("max_gap") == "3");

    CHECK(ss_config_set(cfg.c, "max_gap", "-3") == SS_ERR_VALIDATION);
    CHECK(std::string(ss_last_error_message()).find("max_gap") != std::string::npos);
    CHECK(ss_config_set(cfg.c, "bogus", "1") == SS_ERR_VALIDATION);
    CHECK(ss_config_set(nullptr, "max_gap", "1") == SS_ERR_INVALID_ARGUMENT);
    CHECK(ss_config_set(cfg.c, nullptr, "1") == SS_ERR_INVALID_ARGUMENT);
    CHECK(ss_config_load(cfg.c, (kTmp / "absent.json").c_str()) == SS_ERR_IO);

    fs::create_directories(kTmp);
    {
      FILE* f = std::fopen((kTmp / "broken.json").c_str(), "w");
      std::fputs("{\"max_gap\": ", f);
      std::fclose(f);
    }
    CHECK(ss_config_load(cfg.c, (kTmp / "broken.json").c_str()) == SS_ERR_PARSE);

    char small[2];
    size_t needed = 0;
    CHECK(ss_config_get(cfg.c, "bands", small, sizeof small, &needed) == SS_ERR_INVALID_ARGUMENT);
    CHECK(needed == std::strlen("0,20000,40000,60000,80000") + 1);

    bool found = false;
    for (size_t i = 0; i < ss_config_key_count(); ++i) found = found || std::string(ss_config_key_name(i)) == "seed";
    CHECK(found);
    CHECK(ss_config_key_name(ss_config_key_count()) == nullptr);
  }

  TEST_CASE("digest ignores threads") {
    Config a, b;
    CHECK(a.digest().size() == 64);
    CHECK(ss_config_set(b.c, "threads", "3") == SS_OK);
    CHECK(a.digest() == b.digest());
    CHECK(ss_config_set(b.c, "seed", "3") == SS_OK);
    CHECK(a.digest() != b.digest());
  }

  TEST_CASE("pipeline and detector through the C interface") {
    Config cfg;
    const auto out = kTmp / "c_api_run";
    fixture_paths(cfg.c, out);
    CHECK(ss_run_detect(cfg.c) == SS_ERR_IO);
    REQUIRE(ss_run_build_lexicon(cfg.c) == SS_OK);
    REQUIRE(ss_run_detect(cfg.c) == SS_OK);
    REQUIRE(ss_run_analyze(cfg.c) == SS_OK);

    char* text = nullptr;
    REQUIRE(ss_render_report((out / "rewards.tsv").c_str(), &text) == SS_OK);
    CHECK(std::string(text).find("leadership") != std::string::npos);
    ss_string_free(text);
    CHECK(ss_render_report((out / "none.tsv").c_str(), &text) == SS_ERR_IO);

    ss_detector* det = nullptr;
    REQUIRE(ss_detector_open((out / "lexicon.tsv").c_str(), (kData / "stopwords.txt").c_str(), nullptr, 2, &det) ==
            SS_OK);
    int32_t ids[16];
    size_t count = 0;
    REQUIRE(ss_detector_detect(det, "We need leadership and a real team player.", ids, 16, &count) == SS_OK);
    CHECK(count == 2);
    CHECK(ids[0] < ids[1]);
    CHECK(ss_detector_detect(det, "leadership, team player", ids, 1, &count) == SS_ERR_INVALID_ARGUMENT);
    CHECK(count == 2);
    CHECK(ss_detector_detect(det, "nothing relevant", ids, 16, &count) == SS_OK);
    CHECK(count == 0);
    ss_detector_close(det);

    CHECK(ss_detector_open((out / "nope.tsv").c_str(), (kData / "stopwords.txt").c_str(), nullptr, 2, &det) ==
          SS_ERR_IO);
  }

  TEST_CASE("statistics") {
    double v = 0;
    REQUIRE(ss_reward_cell(46536, 43170, &v) == SS_OK);
    CHECK(v == doctest::Approx(7.797081306462822));
    CHECK(ss_reward_cell(1, 0, &v) != SS_OK);
    CHECK(ss_reward_cell(1, 2, nullptr) == SS_ERR_INVALID_ARGUMENT);

    const double trusts[] = {1, 0.5, 0.9, 0.6};
    const int cand[] = {1, 0, 1, 1};
    REQUIRE(ss_compute_confidence(trusts, cand, 4, &v) == SS_OK);
    CHECK(v == doctest::Approx(2.5 / 3.0));
    CHECK(ss_compute_confidence(trusts, cand, 0, &v) != SS_OK);

    REQUIRE(ss_relative_difference(0.94, 0.12, &v) == SS_OK);
    CHECK(v == doctest::Approx(87.2340425531915));
    CHECK(ss_relative_difference(0, 0, &v) == SS_ERR_NO_DATA);

    const double a[] = {2.1, 3.5, 1.9, 4.4, 3.0, 2.8}, b[] = {4.0, 5.2, 3.9, 6.1};
    ss_t_test_result r{};
    REQUIRE(ss_welch_t_test(a, 6, b, 4, &r) == SS_OK);
    CHECK(r.t == doctest::Approx(-2.8654346465614107));
    CHECK(r.p == doctest::Approx(0.02889934667728875));
    REQUIRE(ss_equal_var_t_test(b, 4, a, 6, 1, &r) == SS_OK);
    CHECK(r.p == doctest::Approx(0.009224035557265052));
    CHECK(ss_welch_t_test(a, 1, b, 4, &r) == SS_ERR_VALIDATION);
  }
}
