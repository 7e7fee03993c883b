#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include <openssl/evp.h>

#include "clustering.hpp"
#include "corpus.hpp"
#include "detection.hpp"
#include "errors.hpp"
#include "gender.hpp"
#include "lexicon.hpp"
#include "matching.hpp"
#include "rng.hpp"
#include "table_io.hpp"
#include "text.hpp"

namespace softskills::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum class KeyType { Path, Text, Number, Integer, Seed };

struct KeySpec {
  const char* name;
  KeyType type;
  json fallback;
  double min = 0;
  double max = 0;
  std::vector<std::string> choices = {};
};

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      {"submissions", KeyType::Path, nullptr},
      {"annotations", KeyType::Path, nullptr},
      {"embeddings", KeyType::Path, nullptr},
      {"embedding_format", KeyType::Text, "auto", 0, 0, {"auto", "text", "binary"}},
      {"lexicon", KeyType::Path, nullptr},
      {"clusters", KeyType::Path, nullptr},
      {"curation", KeyType::Path, nullptr},
      {"cluster_edits", KeyType::Path, nullptr},
      {"corpus", KeyType::Path, nullptr},
      {"corpus_format", KeyType::Text, "canonical", 0, 0, {"canonical", "adzuna"}},
      {"gender_map", KeyType::Path, nullptr},
      {"stereotype_map", KeyType::Path, nullptr},
      {"stopwords", KeyType::Path, nullptr},
      {"competence_terms", KeyType::Path, nullptr},
      {"whitelist", KeyType::Path, nullptr},
      {"adjectives", KeyType::Path, nullptr},
      {"out_dir", KeyType::Path, "out"},
      {"confidence_threshold", KeyType::Number, 0.7, 0, 1},
      {"max_gap", KeyType::Integer, 2, 0, 100},
      {"min_title_count", KeyType::Integer, 2, 1, 1e9},
      {"min_count", KeyType::Integer, 50, 0, 1e12},
      {"min_skills", KeyType::Integer, 3, 0, 1e6},
      {"female_min_share", KeyType::Number, 60, 0, 100},
      {"male_max_share", KeyType::Number, 40, 0, 100},
      {"target_clusters", KeyType::Integer, 190, 1, 1e9},
      {"snippets_per_skill", KeyType::Integer, 10, 1, 1e9},
      {"snippet_context", KeyType::Integer, 25, 0, 1e6},
      {"replicates", KeyType::Integer, 1000, 1, 1e9},
      {"bootstrap_replicates", KeyType::Integer, 1000, 1, 1e9},
      {"seed", KeyType::Seed, nullptr},
      {"bands", KeyType::Text, "0,20000,40000,60000,80000"},
      {"threads", KeyType::Integer, 0, 0, 4096},
  };
  return specs;
}

const KeySpec& spec_of(std::string_view key) {
  for (const auto& s : key_specs()) {
    if (key == s.name) return s;
  }
  throw ValidationError("unknown config key '" + std::string(key) + "'");
}

json parse_value(const KeySpec& spec, std::string_view raw) {
  const std::string text(trim(raw));
  switch (spec.type) {
    case KeyType::Path:
    case KeyType::Text:
      return text;
    case KeyType::Number: {
      auto v = parse_double(text);
      if (!v) throw ValidationError("config key '" + std::string(spec.name) + "' needs a number, got '" + text + "'");
      return *v;
    }
    case KeyType::Integer:
    case KeyType::Seed: {
      auto v = parse_int(text);
      if (!v) throw ValidationError("config key '" + std::string(spec.name) + "' needs an integer, got '" + text + "'");
      return *v;
    }
  }
  return nullptr;
}

}  // namespace

Config::Config() : values_(json::object()) {
  for (const auto& s : key_specs()) {
    values_[s.name] = s.type == KeyType::Number ? json(s.fallback.get<double>()) : s.fallback;
  }
}

bool Config::known_key(std::string_view key) {
  return std::any_of(key_specs().begin(), key_specs().end(), [&](const KeySpec& s) { return key == s.name; });
}

std::vector<std::string> Config::keys() {
  std::vector<std::string> out;
  for (const auto& s : key_specs()) out.emplace_back(s.name);
  return out;
}

void Config::assign(const std::string& key, const json& value) {
  const auto& spec = spec_of(key);
  const std::string where = "config key '" + key + "'";
  if (value.is_null()) {
    if (spec.type != KeyType::Path && spec.type != KeyType::Seed) throw ValidationError(where + " cannot be null");
    values_[key] = nullptr;
    return;
  }
  switch (spec.type) {
    case KeyType::Path:
    case KeyType::Text: {
      if (!value.is_string()) throw ValidationError(where + " needs a string");
      const auto s = value.get<std::string>();
      if (!spec.choices.empty() && std::find(spec.choices.begin(), spec.choices.end(), s) == spec.choices.end()) {
        throw ValidationError(where + " has unsupported value '" + s + "'");
      }
      if (key == "bands") matching::parse_band_edges(s);
      values_[key] = s;
      return;
    }
    case KeyType::Number: {
      if (!value.is_number()) throw ValidationError(where + " needs a number");
      const double v = value.get<double>();
      if (!(v >= spec.min && v <= spec.max)) {
        throw ValidationError(where + " must lie in [" + format_double(spec.min) + ", " + format_double(spec.max) +
                              "], got " + format_double(v));
      }
      values_[key] = v;
      return;
    }
    case KeyType::Integer: {
      if (!value.is_number_integer()) throw ValidationError(where + " needs an integer");
      const auto v = value.get<std::int64_t>();
      if (!(static_cast<double>(v) >= spec.min && static_cast<double>(v) <= spec.max)) {
        throw ValidationError(where + " must lie in [" + format_double(spec.min) + ", " + format_double(spec.max) +
                              "], got " + std::to_string(v));
      }
      values_[key] = v;
      return;
    }
    case KeyType::Seed: {
      if (!value.is_number_integer() || value.get<std::int64_t>() < 0) {
        throw ValidationError(where + " needs a non-negative integer");
      }
      values_[key] = value.get<std::uint64_t>();
      return;
    }
  }
}

void Config::merge_json(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) assign(key, value);
}

void Config::load_file(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("config file not found: " + path.string());
  merge_json(read_file(path));
}

void Config::set(std::string_view key, std::string_view value) {
  const auto& spec = spec_of(key);
  assign(spec.name, parse_value(spec, value));
}

std::string Config::get(std::string_view key) const {
  const auto& v = values_.at(spec_of(key).name);
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

bool Config::is_set(std::string_view key) const { return !values_.at(spec_of(key).name).is_null(); }

std::string Config::text(std::string_view key) const { return values_.at(spec_of(key).name).get<std::string>(); }
double Config::number(std::string_view key) const { return values_.at(spec_of(key).name).get<double>(); }
std::int64_t Config::integer(std::string_view key) const {
  return values_.at(spec_of(key).name).get<std::int64_t>();
}

std::optional<std::uint64_t> Config::seed() const {
  const auto& v = values_.at("seed");
  if (v.is_null()) return std::nullopt;
  return v.get<std::uint64_t>();
}

fs::path Config::require_path(std::string_view key, std::string_view stage) const {
  auto p = optional_path(key);
  if (!p) throw ValidationError("config key '" + std::string(key) + "' is required for " + std::string(stage));
  return *p;
}

std::optional<fs::path> Config::optional_path(std::string_view key) const {
  const auto& v = values_.at(spec_of(key).name);
  if (v.is_null() || v.get<std::string>().empty()) return std::nullopt;
  return fs::path(v.get<std::string>());
}

fs::path Config::out_dir() const { return fs::path(text("out_dir")); }

json Config::snapshot() const {
  json s = values_;
  s.erase("threads");
  return s;
}

std::string Config::digest() const { return sha256_hex(snapshot().dump()); }

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string na_or(const std::optional<double>& v, int digits = 6) { return v ? format_fixed(*v, digits) : "NA"; }


/// Tracks inputs, outputs and timings of one command and writes manifest.json.
class StageRun {
 public:
  StageRun(const Config& config, std::string stage) : config_(config), stage_(std::move(stage)), t0_(Clock::now()) {}

  void input(std::string_view key, const fs::path& path) {
    inputs_[std::string(key)] = {{"path", path.string()}, {"sha256", sha256_hex(read_file(path))}};
  }

  std::string header(std::string_view report, bool stochastic = false) const {
    std::string h = "# softskills " + std::string(report) + " config_digest=" + config_.digest();
    if (stochastic) h += " seed=" + std::to_string(*config_.seed());
    return h + "\n";
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = config_.out_dir() / name;
    write_file(path, content);
    outputs_[name] = sha256_hex(content);
    result_.outputs.push_back(path);
  }

  void time(const std::string& step, Clock::time_point t0) { timings_[step] = seconds_since(t0); }
  void note(std::string n) { result_.notes.push_back(std::move(n)); }

  StageResult finish() {
    timings_["total"] = seconds_since(t0_);
    const auto path = config_.out_dir() / "manifest.json";
    json manifest = json::object();
    if (fs::exists(path)) {
      try {
        manifest = json::parse(read_file(path));
      } catch (const json::parse_error&) {
        manifest = json::object();
      }
      if (!manifest.is_object()) manifest = json::object();
    }
    json entry;
    entry["config"] = config_.snapshot();
    entry["config_digest"] = config_.digest();
    entry["inputs"] = inputs_;
    entry["outputs"] = outputs_;
    entry["timings_seconds"] = timings_;
    entry["notes"] = result_.notes;
    manifest["stages"][stage_] = entry;
    write_file(path, manifest.dump(2) + "\n");
    result_.outputs.push_back(path);
    return result_;
  }

 private:
  const Config& config_;
  std::string stage_;
  Clock::time_point t0_;
  json inputs_ = json::object();
  json outputs_ = json::object();
  json timings_ = json::object();
  StageResult result_;
};

std::vector<std::string> read_word_list(const fs::path& path) {
  std::vector<std::string> out;
  for (const auto& line : split(read_file(path), '\n')) {
    const auto t = trim(line);
    if (t.empty() || starts_with_comment(t)) continue;
    out.push_back(to_lower(t));
  }
  return out;
}

StopwordList load_stopwords(const Config& config, StageRun& run, std::string_view stage) {
  const auto path = config.require_path("stopwords", stage);
  auto list = StopwordList::load(path);
  run.input("stopwords", path);
  return list;
}

corpus::LoadedCorpus load_corpus(const Config& config, StageRun& run, std::string_view stage) {
  const auto path = config.require_path("corpus", stage);
  auto loaded = corpus::load_ads(path, corpus::parse_corpus_format(config.text("corpus_format")));
  run.input("corpus", path);
  if (auto dup = corpus::find_duplicate_id(loaded.ads)) throw ValidationError("duplicate ad id '" + *dup + "'");
  return loaded;
}

/// Phrases after cleaning and curation, plus bookkeeping for the report.
struct CleanedSubmissions {
  lexicon::CurationResult curated;
  std::vector<std::pair<std::string, std::string>> rejected;  // raw text, reason
  std::vector<std::pair<std::string, std::string>> review;    // phrase, reason
  std::vector<std::pair<std::string, std::string>> corrected;  // from, to
  std::vector<std::vector<std::string>> skills_per_ad;
  std::size_t submissions = 0;
};

CleanedSubmissions clean_submissions(const Config& config, StageRun& run, std::string_view stage) {
  const auto sub_path = config.require_path("submissions", stage);
  auto subs = lexicon::load_submissions(sub_path);
  run.input("submissions", sub_path);
  if (subs.empty()) throw ValidationError("no submissions in " + sub_path.string());

  auto adjectives = lexicon::default_superfluous_adjectives();
  if (auto p = config.optional_path("adjectives")) {
    adjectives = read_word_list(*p);
    run.input("adjectives", *p);
  }
  std::set<std::string> whitelist;
  if (auto p = config.optional_path("whitelist")) {
    for (const auto& w : read_word_list(*p)) whitelist.insert(w);
    run.input("whitelist", *p);
  }

  CleanedSubmissions out;
  out.submissions = subs.size();
  std::vector<lexicon::CurationCandidate> candidates;
  std::map<std::string, std::size_t> candidate_index;
  std::map<std::string, std::size_t> ad_index;
  for (const auto& s : subs) {
    auto r = lexicon::clean_phrase(s.text, adjectives, whitelist);
    if (!r.usable()) {
      out.rejected.emplace_back(s.text, r.reason);
      continue;
    }
    auto [it, fresh] = candidate_index.emplace(r.phrase, candidates.size());
    if (fresh) candidates.push_back({r.phrase, false});
    if (r.status == lexicon::CleanStatus::NeedsReview) {
      if (!candidates[it->second].needs_review) out.review.emplace_back(r.phrase, r.reason);
      candidates[it->second].needs_review = true;
    }
    for (const auto& c : r.corrections) out.corrected.push_back(c);
    auto [ad, new_ad] = ad_index.emplace(s.source_ad, out.skills_per_ad.size());
    if (new_ad) out.skills_per_ad.emplace_back();
    out.skills_per_ad[ad->second].push_back(r.phrase);
  }

  std::vector<lexicon::CurationDirective> script;
  if (auto p = config.optional_path("curation")) {
    script = lexicon::parse_curation_script(read_file(*p));
    run.input("curation", *p);
  }
  out.curated = lexicon::apply_curation(std::move(candidates), script);
  return out;
}

json pairs_json(const std::vector<std::pair<std::string, std::string>>& pairs, const char* a, const char* b) {
  json arr = json::array();
  for (const auto& [x, y] : pairs) arr.push_back({{a, x}, {b, y}});
  return arr;
}

std::map<int, std::string> cluster_labels(const clustering::ClusterSet& set) {
  std::map<int, std::string> out;
  for (const auto& c : set.clusters) out[c.id] = c.label;
  return out;
}

std::string label_of(const std::map<int, std::string>& labels, int id) {
  auto it = labels.find(id);
  return it == labels.end() ? "NA" : it->second;
}

}  // namespace

StageResult run_build_lexicon(const Config& config) {
  StageRun run(config, "build-lexicon");
  auto t = Clock::now();
  auto cleaned = clean_submissions(config, run, "build-lexicon");
  run.time("clean", t);

  t = Clock::now();
  const auto ann_path = config.require_path("annotations", "build-lexicon");
  auto annotations = lexicon::load_annotations(ann_path);
  run.input("annotations", ann_path);
  const auto confidence = lexicon::confidence_by_skill(annotations);
  std::vector<lexicon::SkillPhrase> skills;
  for (const auto& phrase : cleaned.curated.phrases) {
    auto s = lexicon::SkillPhrase::from_text(phrase);
    if (auto it = confidence.find(s.phrase); it != confidence.end()) s.confidence = it->second;
    skills.push_back(std::move(s));
  }
  const auto filtered = lexicon::filter_lexicon(skills, config.number("confidence_threshold"));
  run.time("filter", t);

  t = Clock::now();
  const auto stopwords = load_stopwords(config, run, "build-lexicon");
  const auto emb_path = config.require_path("embeddings", "build-lexicon");
  const auto emb = clustering::load_embeddings(emb_path, clustering::parse_embedding_format(config.text("embedding_format")));
  run.input("embeddings", emb_path);
  std::vector<clustering::PhraseVector> vectors;
  std::vector<std::string> unembedded;
  for (const auto& s : filtered.kept) {
    if (auto v = clustering::embed_phrase(s.phrase, emb.table, stopwords)) {
      vectors.push_back(std::move(*v));
    } else {
      unembedded.push_back(s.phrase);
    }
  }
  const auto target = std::min<std::size_t>(static_cast<std::size_t>(config.integer("target_clusters")),
                                            std::max<std::size_t>(vectors.size(), 1));
  auto clusters = clustering::agglomerate(vectors, target, unembedded);
  std::vector<std::string> edit_log;
  if (auto p = config.optional_path("cluster_edits")) {
    auto outcome = clustering::apply_cluster_edits(std::move(clusters), clustering::parse_cluster_edits(read_file(*p)));
    run.input("cluster_edits", *p);
    clusters = std::move(outcome.clusters);
    edit_log = std::move(outcome.log);
  }
  run.time("cluster", t);

  std::map<std::string, int> cluster_of;
  for (const auto& c : clusters.clusters) {
    for (const auto& m : c.members) cluster_of[m] = c.id;
  }
  std::vector<lexicon::LexiconEntry> entries;
  for (const auto& s : filtered.kept) {
    auto it = cluster_of.find(s.phrase);
    if (it == cluster_of.end()) throw ValidationError("phrase '" + s.phrase + "' lost its cluster during editing");
    entries.push_back({s, it->second});
  }

  run.write("lexicon.tsv", run.header("lexicon") + lexicon::serialize_lexicon(entries));
  run.write("clusters.tsv", run.header("clusters") + clustering::serialize_clusters(clusters));
  std::string curve = run.header("discovery_curve") + "ads,distinct_skills\n";
  for (const auto& p : lexicon::discovery_curve(cleaned.skills_per_ad)) {
    curve += std::to_string(p.ads) + "," + std::to_string(p.distinct_skills) + "\n";
  }
  run.write("discovery_curve.csv", curve);

  json report;
  report["config_digest"] = config.digest();
  report["submissions"] = cleaned.submissions;
  report["rejected"] = pairs_json(cleaned.rejected, "text", "reason");
  report["flagged_for_review"] = pairs_json(cleaned.review, "phrase", "reason");
  report["corrections"] = pairs_json(cleaned.corrected, "from", "to");
  report["unresolved_review"] = cleaned.curated.unresolved;
  report["curation_log"] = cleaned.curated.log;
  report["curated_phrases"] = cleaned.curated.phrases.size();
  report["annotation_records"] = annotations.size();
  report["confidence_threshold"] = config.number("confidence_threshold");
  report["scored"] = filtered.scored;
  report["scored_kept"] = filtered.scored_kept;
  report["retention_fraction"] = filtered.scored ? json(filtered.retention_fraction()) : json(nullptr);
  report["unscored_short_dropped"] = filtered.unscored_short;
  report["lexicon_phrases"] = entries.size();
  report["embeddings"] = {{"declared", emb.report.declared},
                          {"loaded", emb.report.loaded},
                          {"duplicates_ignored", emb.report.duplicates}};
  report["unembedded_phrases"] = unembedded;
  report["target_clusters"] = target;
  report["clusters"] = clusters.clusters.size();
  report["cluster_edit_log"] = edit_log;
  run.write("lexicon_report.json", report.dump(2) + "\n");
  return run.finish();
}

StageResult run_snippets(const Config& config) {
  StageRun run(config, "snippets");
  const auto seed = config.seed();
  if (!seed) throw ValidationError("config key 'seed' is required for snippets");
  auto cleaned = clean_submissions(config, run, "snippets");
  const auto loaded = load_corpus(config, run, "snippets");
  const auto n = static_cast<std::size_t>(config.integer("snippets_per_skill"));
  const auto context = static_cast<std::size_t>(config.integer("snippet_context"));

  std::string out = run.header("snippets", true) + "skill\tsnippet_id\tad_id\twindow\n";
  std::size_t skill_index = 0;
  for (const auto& phrase : cleaned.curated.phrases) {
    auto skill = lexicon::SkillPhrase::from_text(phrase);
    const auto stream = substream_seed(*seed, skill_index++);
    if (skill.token_count > 3) continue;
    for (const auto& s : lexicon::extract_snippets(skill, loaded.ads, n, stream, context)) {
      std::string window = s.window;
      std::replace_if(window.begin(), window.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
      out += s.skill + "\t" + s.snippet_id() + "\t" + s.ad_id + "\t" + window + "\n";
    }
  }
  run.write("snippets.tsv", out);
  return run.finish();
}

StageResult run_detect(const Config& config) {
  StageRun run(config, "detect");
  auto t = Clock::now();
  const auto lex_path = config.optional_path("lexicon").value_or(config.out_dir() / "lexicon.tsv");
  if (!fs::exists(lex_path)) {
    throw IoError("lexicon not found: " + lex_path.string() + " (run build-lexicon or set 'lexicon')");
  }
  const auto entries = lexicon::load_lexicon(lex_path);
  run.input("lexicon", lex_path);
  const auto stopwords = load_stopwords(config, run, "detect");
  auto terms = detection::default_competence_terms();
  if (auto p = config.optional_path("competence_terms")) {
    const auto words = read_word_list(*p);
    terms = std::set<std::string>(words.begin(), words.end());
    run.input("competence_terms", *p);
  }
  auto patterns = detection::compile_patterns(entries, terms, stopwords);
  const std::size_t stripped = static_cast<std::size_t>(
      std::count_if(patterns.begin(), patterns.end(), [](const auto& p) { return p.competence_removed; }));
  const auto loaded = load_corpus(config, run, "detect");
  run.time("load", t);

  t = Clock::now();
  const detection::Matcher matcher(std::move(patterns), stopwords, static_cast<std::size_t>(config.integer("max_gap")));
  const auto det = detection::detect_corpus(loaded.ads, matcher, static_cast<std::size_t>(config.integer("threads")));
  run.time("match", t);

  run.write("detections.tsv", run.header("detections") + detection::serialize_detections(det));
  const auto& s = det.summary;
  json cov;
  cov["config_digest"] = config.digest();
  cov["ads"] = s.ads;
  cov["ads_with_any_skill"] = s.with_any;
  cov["ads_with_three_or_more"] = s.with_three;
  cov["fraction_any"] = s.ads ? json(s.fraction_any()) : json(nullptr);
  cov["fraction_three_or_more"] = s.ads ? json(s.fraction_three()) : json(nullptr);
  cov["patterns"] = matcher.patterns().size();
  cov["patterns_competence_stripped"] = stripped;
  cov["max_gap"] = matcher.max_gap();
  cov["corpus"] = {{"accepted", loaded.report.accepted},
                   {"rejected", loaded.report.rejected},
                   {"salary_absent", loaded.report.salary_absent},
                   {"category_absent", loaded.report.category_absent}};
  run.write("coverage.json", cov.dump(2) + "\n");
  if (!s.ads) run.note("empty corpus: coverage reported as no-data");
  return run.finish();
}

StageResult run_analyze(const Config& config) {
  StageRun run(config, "analyze");
  const auto seed = config.seed();
  if (!seed) throw ValidationError("config key 'seed' is required for analyze");
  const auto split = gender::DominanceSplit{config.number("female_min_share"), config.number("male_max_share")};
  split.validate();
  const auto bands = matching::parse_band_edges(config.text("bands"));

  auto t = Clock::now();
  const auto loaded = load_corpus(config, run, "analyze");
  const auto& ads = loaded.ads;
  const auto det_path = config.out_dir() / "detections.tsv";
  if (!fs::exists(det_path)) throw IoError("detections not found: " + det_path.string() + " (run detect first)");
  const auto det = detection::parse_detections(read_file(det_path), ads);
  run.input("detections", det_path);
  const auto stopwords = load_stopwords(config, run, "analyze");

  std::optional<clustering::ClusterSet> clusters;
  {
    auto p = config.optional_path("clusters");
    if (!p && fs::exists(config.out_dir() / "clusters.tsv")) p = config.out_dir() / "clusters.tsv";
    if (p) {
      clusters = clustering::load_clusters(*p);
      run.input("clusters", *p);
    }
  }
  const auto labels = clusters ? cluster_labels(*clusters) : std::map<int, std::string>{};
  run.time("load", t);

  // Matching study.
  t = Clock::now();
  const auto min_count = static_cast<std::size_t>(config.integer("min_count"));
  const auto study = matching::prepare_study(ads, stopwords, static_cast<std::size_t>(config.integer("min_title_count")));
  const auto sets = matching::study_skill_sets(study, det.clusters);
  auto rewards = matching::compute_rewards(study, sets);
  matching::PermutationConfig perm;
  perm.replicates = static_cast<std::size_t>(config.integer("replicates"));
  perm.seed = substream_seed(*seed, 0);
  perm.threads = static_cast<std::size_t>(config.integer("threads"));
  matching::permutation_test(study, sets, rewards, perm);
  run.time("rewards", t);

  std::vector<const matching::RewardResult*> shown;
  for (const auto& [id, r] : rewards) {
    if (r.count >= min_count) shown.push_back(&r);
  }
  std::stable_sort(shown.begin(), shown.end(), [](const auto* a, const auto* b) { return a->reward > b->reward; });
  std::string rw = run.header("rewards", true);
  rw += "# study_ads=" + std::to_string(study.size()) + " title_groups=" + std::to_string(study.groups.size()) +
        " replicates=" + std::to_string(perm.replicates) + " min_count=" + std::to_string(min_count) + "\n";
  rw += "cluster_id\tlabel\treward\tcount\tp_value\tstars\n";
  for (const auto* r : shown) {
    rw += std::to_string(r->skill) + "\t" + label_of(labels, r->skill) + "\t" + format_fixed(r->reward, 6) + "\t" +
          std::to_string(r->count) + "\t" + na_or(r->p_value) + "\t" + matching::stars(r->significance) + "\n";
  }
  run.write("rewards.tsv", rw);

  // Salary bands.
  t = Clock::now();
  const auto boot_replicates = static_cast<std::size_t>(config.integer("bootstrap_replicates"));
  const auto band_report =
      matching::skills_by_salary_band(ads, det.clusters, bands, boot_replicates, substream_seed(*seed, 1));
  json bj;
  bj["config_digest"] = config.digest();
  bj["seed"] = *seed;
  bj["bootstrap_replicates"] = boot_replicates;
  bj["confidence_level"] = 0.95;
  bj["bands"] = json::array();
  for (const auto& b : band_report.bands) {
    json e = {{"low_exclusive", b.band.low}, {"high_inclusive", b.band.high}, {"ads", b.ads}};
    if (b.mean_skills) {
      e["mean_skills"] = b.mean_skills->estimate;
      e["ci_low"] = b.mean_skills->low;
      e["ci_high"] = b.mean_skills->high;
    } else {
      e["mean_skills"] = nullptr;
      e["ci_low"] = nullptr;
      e["ci_high"] = nullptr;
    }
    bj["bands"].push_back(e);
  }
  bj["welch_tests"] = json::array();
  for (const auto& c : band_report.comparisons) {
    json e = {{"band_a", c.a}, {"band_b", c.b}};
    if (c.welch) {
      e["t"] = std::isfinite(c.welch->t) ? json(c.welch->t) : json(c.welch->t > 0 ? "inf" : "-inf");
      e["df"] = c.welch->df;
      e["p"] = c.welch->p;
      e["degenerate_variance"] = c.welch->degenerate_variance;
    } else {
      e["t"] = nullptr;
      e["df"] = nullptr;
      e["p"] = nullptr;
      e["degenerate_variance"] = nullptr;
    }
    bj["welch_tests"].push_back(e);
  }
  run.write("salary_bands.json", bj.dump(2) + "\n");
  run.time("salary_bands", t);

  // Female-share regression.
  t = Clock::now();
  const auto gm_path = config.require_path("gender_map", "analyze");
  const auto gmap = gender::load_gender_map(gm_path);
  run.input("gender_map", gm_path);
  const auto shares = gender::attach_female_share(ads, gmap);
  const auto min_skills = static_cast<std::size_t>(config.integer("min_skills"));
  const auto reg = gender::fit_female_share(det.clusters, shares.shares, min_skills);
  const auto& fit = reg.fit;
  const auto reg_header = [&](std::string_view name) {
    return run.header(name) + "# model: female_share ~ intercept + cluster indicators (intercept included)\n" +
           "# n_observations=" + std::to_string(fit.n_observations) + " r_squared=" + format_fixed(fit.r_squared, 6) +
           " rank=" + std::to_string(fit.rank) + " rank_deficient=" + (fit.rank_deficient ? "true" : "false") +
           " min_skills=" + std::to_string(min_skills) + " excluded_na=" + std::to_string(shares.excluded_na) +
           " excluded_no_category=" + std::to_string(shares.excluded_no_category) + "\n";
  };
  std::string rg = reg_header("regression") + "# shown: count>=" + std::to_string(min_count) + " and p<0.01\n";
  rg += "cluster_id\tlabel\tcoefficient\tp_value\treward\treward_stars\tcount\n";
  for (const auto& row : gender::significant_predictors(reg, rewards, min_count, 0.01)) {
    rg += std::to_string(row.cluster_id) + "\t" + label_of(labels, row.cluster_id) + "\t" +
          format_fixed(row.coefficient, 6) + "\t" + format_double(row.p_value) + "\t" +
          (row.reward ? format_fixed(row.reward->reward, 6) : "NA") + "\t" +
          (row.reward ? matching::stars(row.reward->significance) : "") + "\t" + std::to_string(row.count) + "\n";
  }
  run.write("regression.tsv", rg);
  std::string rc = reg_header("regression_coefficients");
  rc += "term\tlabel\tcoefficient\tstd_error\tp_value\taliased\tcount\n";
  for (std::size_t j = 0; j < fit.coefficients.size(); ++j) {
    const bool icpt = j == 0;
    const auto fmt = [](double v) { return std::isnan(v) ? std::string("NA") : format_double(v); };
    rc += fit.names[j] + "\t" + (icpt ? "NA" : label_of(labels, reg.cluster_ids[j - 1])) + "\t" +
          format_fixed(fit.coefficients[j], 6) + "\t" + fmt(fit.std_errors[j]) + "\t" + fmt(fit.p_values[j]) + "\t" +
          (fit.aliased[j] ? "true" : "false") + "\t" + (icpt ? std::string("NA") : std::to_string(reg.occurrences[j - 1])) +
          "\n";
  }
  run.write("regression_coefficients.tsv", rc);
  run.time("regression", t);

  // Stereotype prevalence and rewards.
  t = Clock::now();
  const auto sm_path = config.require_path("stereotype_map", "analyze");
  if (!clusters) throw ValidationError("the stereotype map needs a cluster file (set 'clusters' or run build-lexicon)");
  const auto entries = gender::load_stereotype_map(sm_path, *clusters);
  run.input("stereotype_map", sm_path);
  std::vector<int> ids;
  for (const auto& e : entries) ids.push_back(e.cluster_id);
  const auto prevalence = gender::stereotype_prevalence(det.clusters, shares.shares, ids, split);
  const auto groups = gender::count_dominance(shares.shares, split);
  std::vector<gender::StereotypeRow> rows;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    gender::StereotypeRow row{entries[i], prevalence[i], std::nullopt};
    if (auto it = rewards.find(entries[i].cluster_id); it != rewards.end()) row.reward = it->second;
    rows.push_back(std::move(row));
  }
  std::string st = run.header("stereotypes", true);
  st += "# dominance split is a configured choice, not an observed fact: female-dominated share>=" +
        format_double(split.female_min) + ", male-dominated share<=" + format_double(split.male_max) + "\n";
  st += "# female_dominated_ads=" + std::to_string(groups.female_ads) +
        " male_dominated_ads=" + std::to_string(groups.male_ads) + "\n";
  st += "gender\tbem_trait\tcluster_id\tlabel\treward\tstars\tp_f\tp_m\trel_diff\n";
  std::vector<double> fem, masc;
  for (auto g : {gender::Stereotype::Feminine, gender::Stereotype::Masculine}) {
    const auto gname = std::string(gender::stereotype_name(g));
    for (const auto& row : rows) {
      if (row.entry.gender != g) continue;
      const auto reward = row.reward ? std::optional<double>(row.reward->reward) : std::nullopt;
      if (reward) (g == gender::Stereotype::Feminine ? fem : masc).push_back(*reward);
      st += gname + "\t" + row.entry.trait + "\t" + std::to_string(row.entry.cluster_id) + "\t" +
            row.entry.cluster_label + "\t" + na_or(reward) + "\t" +
            (row.reward ? matching::stars(row.reward->significance) : "") + "\t" + na_or(row.prevalence.p_f) + "\t" +
            na_or(row.prevalence.p_m) + "\t" + na_or(row.prevalence.rel_diff) + "\n";
    }
    const auto avg = gender::average_rows(rows, g);
    st += gname + "\taverage\tNA\tNA\t" + na_or(avg.reward) + "\t\t" + na_or(avg.p_f) + "\t" + na_or(avg.p_m) + "\t" +
          na_or(avg.rel_diff) + "\n";
  }
  if (fem.size() >= 2 && masc.size() >= 2) {
    const auto cmp = gender::stereotype_reward_comparison(fem, masc);
    st += "# reward comparison (pooled-variance t-test, one-tailed, masculine > feminine): feminine_mean=" +
          format_fixed(cmp.feminine_mean, 6) + " masculine_mean=" + format_fixed(cmp.masculine_mean, 6) +
          " t=" + format_double(cmp.test.t) + " df=" + format_double(cmp.test.df) + " p=" + format_double(cmp.test.p) +
          "\n";
  } else {
    st += "# reward comparison: no-data (fewer than 2 rewarded skills in a group)\n";
    run.note("stereotype reward comparison skipped: too few rewarded skills");
  }
  run.write("stereotypes.tsv", st);
  run.time("stereotypes", t);

  // Distinctive skills per category.
  t = Clock::now();
  std::set<std::string> categories;
  for (const auto& ad : ads) {
    if (ad.has_category()) categories.insert(ad.category);
  }
  std::string ds = run.header("distinctiveness") + "category\trank\tcluster_id\tlabel\tpct_in_category\tpct_overall\tdelta\n";
  for (const auto& cat : categories) {
    std::size_t rank = 0;
    for (const auto& r : detection::distinctiveness(det, ads, cat)) {
      ds += cat + "\t" + std::to_string(++rank) + "\t" + std::to_string(r.cluster_id) + "\t" +
            label_of(labels, r.cluster_id) + "\t" + format_fixed(r.pct_in_category, 6) + "\t" +
            format_fixed(r.pct_overall, 6) + "\t" + format_fixed(r.delta, 6) + "\n";
    }
  }
  run.write("distinctiveness.tsv", ds);
  run.time("distinctiveness", t);
  return run.finish();
}

std::string render_report(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("report not found: " + path.string());
  const auto content = read_file(path);
  if (path.extension() == ".json") {
    try {
      return json::parse(content).dump(2) + "\n";
    } catch (const json::parse_error& e) {
      throw ParseError(path.string() + ": " + e.what());
    }
  }
  const char sep = path.extension() == ".csv" ? ',' : '\t';
  std::vector<std::string> comments;
  std::vector<std::vector<std::string>> cells;
  for (const auto& line : split(content, '\n')) {
    if (line.empty()) continue;
    if (starts_with_comment(line)) {
      comments.push_back(line);
      continue;
    }
    cells.push_back(split(line, sep));
  }
  std::vector<std::size_t> width;
  for (const auto& row : cells) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  std::string out;
  for (const auto& c : comments) out += c + "\n";
  for (std::size_t r = 0; r < cells.size(); ++r) {
    std::string line;
    for (std::size_t i = 0; i < cells[r].size(); ++i) {
      if (i) line += "  ";
      line += cells[r][i];
      if (i + 1 < cells[r].size()) line.append(width[i] - cells[r][i].size(), ' ');
    }
    out += line + "\n";
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t i = 0; i < width.size(); ++i) total += width[i] + (i ? 2 : 0);
      out += std::string(total, '-') + "\n";
    }
  }
  return out;
}

}  // namespace softskills::pipeline
