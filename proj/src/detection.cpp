#include "detection.hpp"

#include <algorithm>
#include <map>
#include <thread>

#include "errors.hpp"
#include "table_io.hpp"

namespace softskills::detection {

std::set<std::string> default_competence_terms() {
  return {"able", "ability", "abilities", "capable", "capability", "capabilities", "skill", "skills"};
}

std::vector<SkillPattern> compile_patterns(const std::vector<lexicon::LexiconEntry>& entries,
                                           const std::set<std::string>& competence_terms,
                                           const StopwordList& stopwords) {
  std::vector<SkillPattern> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    const auto& phrase = e.skill.phrase;
    if (!e.cluster_id) throw ValidationError("lexicon phrase '" + phrase + "' has no cluster");
    const auto& essential = e.skill.essential_stopwords;
    std::vector<std::string> content;
    for (auto& tok : tokenize_words(phrase)) {
      bool keep_stop = std::find(essential.begin(), essential.end(), tok) != essential.end();
      if (!stopwords.contains(tok) || keep_stop) content.push_back(std::move(tok));
    }
    if (content.empty()) throw ValidationError("lexicon phrase '" + phrase + "' has only stopwords");

    std::vector<std::string> stripped;
    for (const auto& tok : content) {
      if (!competence_terms.contains(tok)) stripped.push_back(tok);
    }
    const bool has_competence = stripped.size() != content.size();
    bool strip = false;
    switch (e.skill.competence) {
      case lexicon::CompetencePolicy::Keep: strip = false; break;
      case lexicon::CompetencePolicy::Strip: strip = has_competence; break;
      case lexicon::CompetencePolicy::Auto: strip = has_competence && stripped.size() >= 2; break;
    }
    if (strip && stripped.empty()) {
      throw ValidationError("lexicon phrase '" + phrase + "' is empty after removing competence terms");
    }
    SkillPattern p;
    p.cluster_id = *e.cluster_id;
    p.phrase = phrase;
    p.competence_removed = strip;
    p.tokens = strip ? std::move(stripped) : std::move(content);
    out.push_back(std::move(p));
  }
  return out;
}

Matcher::Matcher(std::vector<SkillPattern> patterns, const StopwordList& stopwords, std::size_t max_gap)
    : patterns_(std::move(patterns)), stopwords_(stopwords), max_gap_(max_gap) {
  for (std::size_t i = 0; i < patterns_.size(); ++i) {
    if (patterns_[i].tokens.empty()) throw ValidationError("pattern '" + patterns_[i].phrase + "' has no tokens");
    first_token_[patterns_[i].tokens.front()].push_back(i);
  }
}

bool Matcher::extend(const std::vector<std::string>& tokens, const std::vector<char>& is_stop,
                     const SkillPattern& pattern, std::size_t j, std::size_t pos, std::size_t& last) const {
  if (j == pattern.tokens.size()) {
    last = pos;
    return true;
  }
  const auto& want = pattern.tokens[j];
  std::size_t gap = 0;
  for (std::size_t q = pos + 1; q < tokens.size(); ++q) {
    if (tokens[q] == want && extend(tokens, is_stop, pattern, j + 1, q, last)) return true;
    if (!is_stop[q] && ++gap > max_gap_) break;
  }
  return false;
}

AdDetection Matcher::detect(const TokenSequence& text) const {
  AdDetection out;
  const auto& toks = text.tokens;
  std::vector<char> is_stop(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) is_stop[i] = stopwords_.contains(toks[i]);

  std::set<int> clusters;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    auto it = first_token_.find(toks[i]);
    if (it == first_token_.end()) continue;
    for (std::size_t p : it->second) {
      std::size_t last = i;
      if (extend(toks, is_stop, patterns_[p], 1, i, last)) {
        out.occurrences.push_back({patterns_[p].cluster_id, p, i, last});
        clusters.insert(patterns_[p].cluster_id);
      }
    }
  }
  out.clusters.assign(clusters.begin(), clusters.end());
  return out;
}

CoverageSummary summarize(const std::vector<std::vector<int>>& clusters) {
  CoverageSummary s;
  s.ads = clusters.size();
  for (const auto& c : clusters) {
    if (!c.empty()) s.with_any++;
    if (c.size() >= 3) s.with_three++;
  }
  return s;
}

CorpusDetections detect_corpus(const std::vector<corpus::JobAd>& ads, const Matcher& matcher, std::size_t threads) {
  CorpusDetections out;
  out.ad_ids.reserve(ads.size());
  for (const auto& ad : ads) out.ad_ids.push_back(ad.id);
  out.clusters.resize(ads.size());

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(1, ads.size() / 64));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out.clusters[i] = matcher.detect(ads[i].description).clusters;
  };
  if (threads <= 1) {
    work(0, ads.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (ads.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk, e = std::min(ads.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  out.summary = summarize(out.clusters);
  return out;
}

std::string serialize_detections(const CorpusDetections& d) {
  std::string out = "ad_id\tclusters\n";
  for (std::size_t i = 0; i < d.ad_ids.size(); ++i) {
    out += d.ad_ids[i] + "\t";
    for (std::size_t k = 0; k < d.clusters[i].size(); ++k) {
      if (k) out += ',';
      out += std::to_string(d.clusters[i][k]);
    }
    out += "\n";
  }
  return out;
}

CorpusDetections parse_detections(std::string_view tsv, const std::vector<corpus::JobAd>& ads) {
  Table t = parse_tsv(tsv);
  const auto c_id = t.require_column("ad_id", "detections");
  const auto c_cl = t.require_column("clusters", "detections");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ads.size(); ++i) index.emplace(ads[i].id, i);

  CorpusDetections out;
  out.clusters.resize(ads.size());
  std::vector<char> seen(ads.size(), 0);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto line = t.line_numbers[r];
    const std::string id(trim(row[c_id]));
    auto it = index.find(id);
    if (it == index.end()) throw ValidationError("detections: ad '" + id + "' is not in the corpus");
    if (seen[it->second]) throw ValidationError("detections: ad '" + id + "' listed twice");
    seen[it->second] = 1;
    std::set<int> cl;
    if (c_cl < row.size()) {
      for (const auto& f : split(row[c_cl], ',')) {
        if (trim(f).empty()) continue;
        auto v = parse_int(f);
        if (!v || *v < 0) throw ParseError("detections: bad cluster id '" + f + "'", line);
        cl.insert(static_cast<int>(*v));
      }
    }
    out.clusters[it->second].assign(cl.begin(), cl.end());
  }
  for (std::size_t i = 0; i < ads.size(); ++i) {
    if (!seen[i]) throw ValidationError("detections do not cover ad '" + ads[i].id + "'; rerun detect");
    out.ad_ids.push_back(ads[i].id);
  }
  out.summary = summarize(out.clusters);
  return out;
}

std::vector<DistinctivenessRow> distinctiveness(const CorpusDetections& detections,
                                                const std::vector<corpus::JobAd>& ads, std::string_view category) {
  std::map<int, std::pair<std::size_t, std::size_t>> counts;  // cluster -> (in category, overall)
  std::size_t in_category = 0;
  for (std::size_t i = 0; i < ads.size(); ++i) {
    const bool in = ads[i].category == category;
    if (in) in_category++;
    for (int c : detections.clusters[i]) {
      auto& [cat, all] = counts[c];
      all++;
      if (in) cat++;
    }
  }
  if (in_category == 0) throw ValidationError("category '" + std::string(category) + "' not found in corpus");
  std::vector<DistinctivenessRow> rows;
  for (const auto& [cluster, cnt] : counts) {
    DistinctivenessRow r;
    r.cluster_id = cluster;
    r.category = std::string(category);
    r.pct_in_category = 100.0 * static_cast<double>(cnt.first) / static_cast<double>(in_category);
    r.pct_overall = 100.0 * static_cast<double>(cnt.second) / static_cast<double>(ads.size());
    r.delta = r.pct_in_category - r.pct_overall;
    rows.push_back(r);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.delta > b.delta; });
  return rows;
}

}  // namespace softskills::detection
