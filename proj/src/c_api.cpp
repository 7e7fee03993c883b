#include "softskills/softskills.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "detection.hpp"
#include "errors.hpp"
#include "gender.hpp"
#include "lexicon.hpp"
#include "matching.hpp"
#include "pipeline.hpp"
#include "stats.hpp"

struct ss_config {
  softskills::pipeline::Config config;
};

struct ss_detector {
  std::unique_ptr<softskills::detection::Matcher> matcher;
};

namespace {

thread_local std::string last_error;

ss_status fail(ss_status s, std::string message) {
  last_error = std::move(message);
  return s;
}

/// Runs `f`, mapping exceptions onto status codes.
template <typename F>
ss_status guarded(F&& f) {
  last_error.clear();
  try {
    return f();
  } catch (const softskills::ParseError& e) {
    return fail(SS_ERR_PARSE, e.what());
  } catch (const softskills::ValidationError& e) {
    return fail(SS_ERR_VALIDATION, e.what());
  } catch (const softskills::IoError& e) {
    return fail(SS_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SS_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SS_ERR_INTERNAL, "unknown error");
  }
}

ss_status null_arg(const char* what) { return fail(SS_ERR_INVALID_ARGUMENT, std::string(what) + " is null"); }

void fill(const softskills::stats::TTestResult& r, ss_t_test_result* out) {
  out->t = r.t;
  out->df = r.df;
  out->p = r.p;
  out->degenerate_variance = r.degenerate_variance ? 1 : 0;
}

}  // namespace

extern "C" {

const char* ss_version(void) { return "1.0.0"; }

const char* ss_status_string(ss_status status) {
  switch (status) {
    case SS_OK: return "ok";
    case SS_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SS_ERR_VALIDATION: return "validation error";
    case SS_ERR_PARSE: return "parse error";
    case SS_ERR_IO: return "i/o error";
    case SS_ERR_NO_DATA: return "no data";
    case SS_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* ss_last_error_message(void) { return last_error.c_str(); }

ss_status ss_config_create(ss_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new ss_config{};
    return SS_OK;
  });
}

void ss_config_destroy(ss_config* config) { delete config; }

ss_status ss_config_load(ss_config* config, const char* path) {
  if (!config) return null_arg("config");
  if (!path) return null_arg("path");
  return guarded([&] {
    config->config.load_file(path);
    return SS_OK;
  });
}

ss_status ss_config_set(ss_config* config, const char* key, const char* value) {
  if (!config) return null_arg("config");
  if (!key) return null_arg("key");
  if (!value) return null_arg("value");
  return guarded([&] {
    config->config.set(key, value);
    return SS_OK;
  });
}

ss_status ss_config_get(const ss_config* config, const char* key, char* buf, size_t capacity, size_t* needed) {
  if (!config) return null_arg("config");
  if (!key) return null_arg("key");
  return guarded([&] {
    const auto v = config->config.get(key);
    if (needed) *needed = v.size() + 1;
    if (!buf || capacity < v.size() + 1) return fail(SS_ERR_INVALID_ARGUMENT, "buffer too small");
    std::memcpy(buf, v.c_str(), v.size() + 1);
    return SS_OK;
  });
}

size_t ss_config_key_count(void) { return softskills::pipeline::Config::keys().size(); }

const char* ss_config_key_name(size_t index) {
  static const std::vector<std::string> names = softskills::pipeline::Config::keys();
  return index < names.size() ? names[index].c_str() : nullptr;
}

ss_status ss_config_digest(const ss_config* config, char out[65]) {
  if (!config) return null_arg("config");
  if (!out) return null_arg("out");
  return guarded([&] {
    const auto d = config->config.digest();
    std::memcpy(out, d.c_str(), 65);
    return SS_OK;
  });
}

#define SS_RUN(fn, stage)                                  \
  ss_status fn(const ss_config* config) {                  \
    if (!config) return null_arg("config");                \
    return guarded([&] {                                   \
      softskills::pipeline::stage(config->config);         \
      return SS_OK;                                        \
    });                                                    \
  }

SS_RUN(ss_run_build_lexicon, run_build_lexicon)
SS_RUN(ss_run_snippets, run_snippets)
SS_RUN(ss_run_detect, run_detect)
SS_RUN(ss_run_analyze, run_analyze)

#undef SS_RUN

ss_status ss_render_report(const char* path, char** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] {
    const auto s = softskills::pipeline::render_report(path);
    *out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!*out) throw std::bad_alloc();
    std::memcpy(*out, s.c_str(), s.size() + 1);
    return SS_OK;
  });
}

void ss_string_free(char* s) { std::free(s); }

ss_status ss_detector_open(const char* lexicon_path, const char* stopwords_path, const char* competence_terms_path,
                           uint32_t max_gap, ss_detector** out) {
  if (!lexicon_path) return null_arg("lexicon_path");
  if (!stopwords_path) return null_arg("stopwords_path");
  if (!out) return null_arg("out");
  return guarded([&] {
    namespace d = softskills::detection;
    if (!std::filesystem::exists(lexicon_path)) {
      throw softskills::IoError(std::string("lexicon not found: ") + lexicon_path);
    }
    const auto stop = softskills::StopwordList::load(stopwords_path);
    auto terms = d::default_competence_terms();
    if (competence_terms_path) {
      terms.clear();
      for (const auto& line : softskills::split(softskills::read_file(competence_terms_path), '\n')) {
        const auto t = softskills::trim(line);
        if (!t.empty() && !softskills::starts_with_comment(t)) terms.insert(softskills::to_lower(t));
      }
    }
    auto patterns = d::compile_patterns(softskills::lexicon::load_lexicon(lexicon_path), terms, stop);
    auto det = std::make_unique<ss_detector>();
    det->matcher = std::make_unique<d::Matcher>(std::move(patterns), stop, max_gap);
    *out = det.release();
    return SS_OK;
  });
}

void ss_detector_close(ss_detector* detector) { delete detector; }

ss_status ss_detector_detect(const ss_detector* detector, const char* text, int32_t* out_ids, size_t capacity,
                             size_t* count) {
  if (!detector) return null_arg("detector");
  if (!text) return null_arg("text");
  if (!count) return null_arg("count");
  return guarded([&] {
    const auto found = detector->matcher->detect(std::string_view(text)).clusters;
    *count = found.size();
    if (found.size() > capacity || (!out_ids && !found.empty())) {
      return fail(SS_ERR_INVALID_ARGUMENT, "output buffer holds " + std::to_string(capacity) + " ids, " +
                                               std::to_string(found.size()) + " needed");
    }
    for (std::size_t i = 0; i < found.size(); ++i) out_ids[i] = found[i];
    return SS_OK;
  });
}

ss_status ss_reward_cell(double treated_mean, double control_mean, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = softskills::matching::reward_cell(treated_mean, control_mean);
    return SS_OK;
  });
}

ss_status ss_compute_confidence(const double* trusts, const int* is_candidate, size_t n, double* out) {
  if (!out) return null_arg("out");
  if (n && (!trusts || !is_candidate)) return null_arg("trusts/is_candidate");
  return guarded([&] {
    std::vector<softskills::lexicon::AnnotationRecord> records(n);
    for (size_t i = 0; i < n; ++i) {
      if (!(trusts[i] > 0 && trusts[i] <= 1)) {
        throw softskills::ValidationError("trust must lie in (0, 1]");
      }
      records[i].trust = trusts[i];
      records[i].vote = is_candidate[i] ? softskills::lexicon::Vote::Candidate : softskills::lexicon::Vote::Other;
    }
    *out = softskills::lexicon::compute_confidence(records);
    return SS_OK;
  });
}

ss_status ss_relative_difference(double p_f, double p_m, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    auto v = softskills::gender::relative_difference(p_f, p_m);
    if (!v) return fail(SS_ERR_NO_DATA, "both prevalences are zero");
    *out = *v;
    return SS_OK;
  });
}

ss_status ss_welch_t_test(const double* a, size_t na, const double* b, size_t nb, ss_t_test_result* out) {
  if (!out) return null_arg("out");
  if ((na && !a) || (nb && !b)) return null_arg("sample");
  return guarded([&] {
    fill(softskills::stats::welch_t_test({a, na}, {b, nb}), out);
    return SS_OK;
  });
}

ss_status ss_equal_var_t_test(const double* a, size_t na, const double* b, size_t nb, int one_tailed,
                              ss_t_test_result* out) {
  if (!out) return null_arg("out");
  if ((na && !a) || (nb && !b)) return null_arg("sample");
  return guarded([&] {
    fill(softskills::stats::equal_var_t_test({a, na}, {b, nb}, one_tailed != 0), out);
    return SS_OK;
  });
}

}  // extern "C"
