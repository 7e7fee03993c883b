#include "lexicon.hpp"

#include <algorithm>
#include <unordered_map>

#include "errors.hpp"
#include "rng.hpp"
#include "table_io.hpp"
#include "text.hpp"

namespace softskills::lexicon {

std::string_view competence_policy_name(CompetencePolicy p) {
  switch (p) {
    case CompetencePolicy::Keep: return "keep";
    case CompetencePolicy::Strip: return "strip";
    case CompetencePolicy::Auto: break;
  }
  return "auto";
}

CompetencePolicy parse_competence_policy(std::string_view s) {
  auto t = to_lower(trim(s));
  if (t.empty() || t == "auto") return CompetencePolicy::Auto;
  if (t == "keep" || t == "1" || t == "yes" || t == "true") return CompetencePolicy::Keep;
  if (t == "strip" || t == "0" || t == "no" || t == "false") return CompetencePolicy::Strip;
  throw ValidationError("bad keep_competence value '" + std::string(s) + "'");
}

SkillPhrase SkillPhrase::from_text(std::string_view text) {
  SkillPhrase s;
  auto toks = tokenize_words(text);
  s.phrase = join(toks);
  s.token_count = toks.size();
  return s;
}

std::vector<std::string> default_superfluous_adjectives() {
  return {"excellent", "highly", "very good", "good", "strong", "high"};
}

CleanResult clean_phrase(std::string_view raw, const std::vector<std::string>& adjectives,
                         const std::set<std::string>& whitelist) {
  CleanResult out;
  auto tokens = tokenize_words(raw);

  std::vector<std::vector<std::string>> adj_tokens;
  for (const auto& a : adjectives) {
    auto t = tokenize_words(a);
    if (!t.empty()) adj_tokens.push_back(std::move(t));
  }
  std::sort(adj_tokens.begin(), adj_tokens.end(),
            [](const auto& x, const auto& y) { return x.size() > y.size(); });

  std::size_t start = 0;
  for (bool stripped = true; stripped;) {
    stripped = false;
    for (const auto& adj : adj_tokens) {
      if (tokens.size() - start >= adj.size() && std::equal(adj.begin(), adj.end(), tokens.begin() + start)) {
        start += adj.size();
        stripped = true;
        break;
      }
    }
  }
  tokens.erase(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(start));
  if (tokens.empty()) {
    out.status = CleanStatus::Rejected;
    out.reason = "empty after cleaning";
    return out;
  }

  out.status = CleanStatus::Accepted;
  if (!whitelist.empty()) {
    for (auto& tok : tokens) {
      if (whitelist.contains(tok)) continue;
      std::vector<std::string> candidates;
      for (const auto& w : whitelist) {
        if (edit_distance(tok, w, 1) <= 1) candidates.push_back(w);
      }
      if (candidates.size() == 1) {
        out.corrections.emplace_back(tok, candidates.front());
        tok = candidates.front();
        if (out.status == CleanStatus::Accepted) out.status = CleanStatus::Corrected;
      } else {
        out.status = CleanStatus::NeedsReview;
        if (!out.reason.empty()) out.reason += "; ";
        out.reason += candidates.empty() ? "unknown token '" + tok + "'"
                                         : "ambiguous correction for '" + tok + "'";
      }
    }
  }
  out.phrase = join(tokens);
  return out;
}

std::vector<CurationDirective> parse_curation_script(std::string_view text) {
  std::vector<CurationDirective> out;
  std::size_t line_no = 0;
  for (const auto& raw_line : split(text, '\n')) {
    ++line_no;
    if (starts_with_comment(raw_line)) continue;
    auto line = trim(raw_line);
    auto sp = line.find_first_of(" \t");
    std::string verb = to_lower(line.substr(0, sp));
    std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp));
    CurationDirective d;
    d.line = line_no;
    if (verb == "keep" || verb == "drop") {
      d.kind = verb == "keep" ? CurationDirective::Kind::Keep : CurationDirective::Kind::Drop;
      d.phrase = join(tokenize_words(rest));
    } else if (verb == "rewrite") {
      auto arrow = rest.find("->");
      if (arrow == std::string_view::npos) throw ParseError("rewrite needs '->'", line_no);
      d.kind = CurationDirective::Kind::Rewrite;
      d.phrase = join(tokenize_words(rest.substr(0, arrow)));
      d.target = join(tokenize_words(rest.substr(arrow + 2)));
      if (d.target.empty()) throw ParseError("rewrite target is empty", line_no);
    } else {
      throw ParseError("unknown curation directive '" + verb + "'", line_no);
    }
    if (d.phrase.empty()) throw ParseError("directive without a phrase", line_no);
    out.push_back(std::move(d));
  }
  return out;
}

CurationResult apply_curation(std::vector<CurationCandidate> candidates,
                              const std::vector<CurationDirective>& script) {
  auto find = [&](const std::string& p) {
    return std::find_if(candidates.begin(), candidates.end(), [&](const auto& c) { return c.phrase == p; });
  };
  CurationResult out;
  for (const auto& d : script) {
    auto it = find(d.phrase);
    if (it == candidates.end()) {
      throw ValidationError("curation line " + std::to_string(d.line) + ": no phrase '" + d.phrase + "'");
    }
    switch (d.kind) {
      case CurationDirective::Kind::Keep:
        it->needs_review = false;
        out.log.push_back("keep " + d.phrase);
        break;
      case CurationDirective::Kind::Drop:
        candidates.erase(it);
        out.log.push_back("drop " + d.phrase);
        break;
      case CurationDirective::Kind::Rewrite: {
        auto existing = find(d.target);
        if (existing != candidates.end() && existing != it) {
          existing->needs_review = existing->needs_review && it->needs_review;
          candidates.erase(it);
          out.log.push_back("rewrite " + d.phrase + " -> " + d.target + " (merged)");
        } else {
          it->phrase = d.target;
          out.log.push_back("rewrite " + d.phrase + " -> " + d.target);
        }
        break;
      }
    }
  }
  for (auto& c : candidates) (c.needs_review ? out.unresolved : out.phrases).push_back(std::move(c.phrase));
  return out;
}

Vote parse_vote(std::string_view s) {
  auto t = to_lower(trim(s));
  if (t == "candidate") return Vote::Candidate;
  if (t == "company" || t == "company/company environment" || t == "company environment") return Vote::Company;
  if (t == "other") return Vote::Other;
  throw ValidationError("unknown vote '" + std::string(s) + "'");
}

std::vector<AnnotationRecord> parse_annotations(std::string_view csv) {
  Table t = parse_csv(csv);
  const auto c_skill = t.require_column("skill", "annotations");
  const auto c_snip = t.require_column("snippet_id", "annotations");
  const auto c_worker = t.require_column("worker_id", "annotations");
  const auto c_vote = t.require_column("vote", "annotations");
  const auto c_trust = t.require_column("trust", "annotations");
  std::vector<AnnotationRecord> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto line = t.line_numbers[r];
    if (row.size() != t.header.size()) throw ParseError("annotations: wrong field count", line);
    AnnotationRecord rec;
    rec.skill = join(tokenize_words(row[c_skill]));
    rec.snippet_id = row[c_snip];
    rec.worker_id = row[c_worker];
    try {
      rec.vote = parse_vote(row[c_vote]);
    } catch (const ValidationError& e) {
      throw ParseError(std::string("annotations: ") + e.what(), line);
    }
    auto trust = parse_double(row[c_trust]);
    if (!trust || !(*trust > 0) || *trust > 1) throw ParseError("annotations: trust must be in (0,1]", line);
    rec.trust = *trust;
    if (rec.skill.empty()) throw ParseError("annotations: empty skill", line);
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_file(path));
}

std::vector<RawSkillSubmission> parse_submissions(std::string_view csv) {
  Table t = parse_csv(csv);
  const auto c_text = t.require_column("text", "submissions");
  const auto c_ad = t.require_column("source_ad", "submissions");
  std::vector<RawSkillSubmission> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() != t.header.size()) throw ParseError("submissions: wrong field count", t.line_numbers[r]);
    if (trim(row[c_text]).empty()) continue;
    out.push_back({row[c_text], std::string(trim(row[c_ad]))});
  }
  return out;
}

std::vector<RawSkillSubmission> load_submissions(const std::filesystem::path& path) {
  return parse_submissions(read_file(path));
}

double compute_confidence(const std::vector<AnnotationRecord>& records) {
  if (records.empty()) throw ValidationError("confidence needs at least one annotation");
  double candidate = 0, total = 0;
  for (const auto& r : records) {
    if (!(r.trust > 0)) throw ValidationError("worker trust must be positive");
    total += r.trust;
    if (r.vote == Vote::Candidate) candidate += r.trust;
  }
  return candidate / total;
}

std::map<std::string, double> confidence_by_skill(const std::vector<AnnotationRecord>& records) {
  std::map<std::string, std::vector<AnnotationRecord>> grouped;
  for (const auto& r : records) grouped[r.skill].push_back(r);
  std::map<std::string, double> out;
  for (const auto& [skill, recs] : grouped) out[skill] = compute_confidence(recs);
  return out;
}

FilterResult filter_lexicon(const std::vector<SkillPhrase>& skills, double threshold,
                            std::size_t max_scored_tokens) {
  FilterResult out;
  for (const auto& s : skills) {
    if (s.token_count > max_scored_tokens) {
      out.kept.push_back(s);
      continue;
    }
    if (!s.confidence) {
      out.unscored_short.push_back(s.phrase);
      continue;
    }
    out.scored++;
    if (*s.confidence >= threshold) {
      out.scored_kept++;
      out.kept.push_back(s);
    }
  }
  return out;
}

std::vector<Snippet> extract_snippets(const SkillPhrase& skill, const std::vector<corpus::JobAd>& ads,
                                      std::size_t n, std::uint64_t seed, std::size_t context) {
  const auto pattern = tokenize_words(skill.phrase);
  if (pattern.empty() || n == 0) return {};

  struct Hit {
    std::size_t ad;
    std::size_t token;
  };
  std::vector<Hit> hits;
  std::vector<TokenSequence> tokenized(ads.size());
  for (std::size_t a = 0; a < ads.size(); ++a) {
    tokenized[a] = tokenize(ads[a].description);
    const auto& toks = tokenized[a].tokens;
    if (toks.size() < pattern.size()) continue;
    for (std::size_t i = 0; i + pattern.size() <= toks.size(); ++i) {
      if (std::equal(pattern.begin(), pattern.end(), toks.begin() + static_cast<std::ptrdiff_t>(i))) {
        hits.push_back({a, i});
      }
    }
  }

  std::vector<std::size_t> chosen(hits.size());
  for (std::size_t i = 0; i < chosen.size(); ++i) chosen[i] = i;
  if (hits.size() > n) {
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = i + rng.below(chosen.size() - i);
      std::swap(chosen[i], chosen[j]);
    }
    chosen.resize(n);
    std::sort(chosen.begin(), chosen.end());
  }

  std::vector<Snippet> out;
  for (auto h : chosen) {
    const auto& [a, i] = hits[h];
    const auto& seq = tokenized[a];
    const std::size_t first = i >= context ? i - context : 0;
    const std::size_t last = std::min(seq.size(), i + pattern.size() + context) - 1;
    const std::size_t begin = seq.origin_offsets[first];
    const std::size_t end = seq.origin_offsets[last] + seq.tokens[last].size();
    out.push_back({skill.phrase, ads[a].id, i, ads[a].description.substr(begin, end - begin)});
  }
  return out;
}

std::vector<CurvePoint> discovery_curve(const std::vector<std::vector<std::string>>& skills_per_ad) {
  std::vector<CurvePoint> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < skills_per_ad.size(); ++i) {
    seen.insert(skills_per_ad[i].begin(), skills_per_ad[i].end());
    out.push_back({i + 1, seen.size()});
  }
  return out;
}

std::string serialize_lexicon(const std::vector<LexiconEntry>& entries) {
  std::string out = "phrase\ttoken_count\tconfidence\tcluster_id\tkeep_competence\tessential\n";
  for (const auto& e : entries) {
    out += e.skill.phrase + "\t" + std::to_string(e.skill.token_count) + "\t" +
           (e.skill.confidence ? format_fixed(*e.skill.confidence, 6) : "NA") + "\t" +
           (e.cluster_id ? std::to_string(*e.cluster_id) : "NA") + "\t" +
           std::string(competence_policy_name(e.skill.competence)) + "\t" + join(e.skill.essential_stopwords, ",") +
           "\n";
  }
  return out;
}

std::vector<LexiconEntry> parse_lexicon(std::string_view tsv) {
  Table t = parse_tsv(tsv);
  const auto c_phrase = t.require_column("phrase", "lexicon");
  const auto c_tokens = t.column("token_count");
  const auto c_conf = t.column("confidence");
  const auto c_cluster = t.column("cluster_id");
  const auto c_keep = t.column("keep_competence");
  const auto c_ess = t.column("essential");
  std::vector<LexiconEntry> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto line = t.line_numbers[r];
    auto cell = [&](std::optional<std::size_t> c) -> std::string {
      return c && *c < row.size() ? std::string(trim(row[*c])) : std::string();
    };
    LexiconEntry e;
    e.skill = SkillPhrase::from_text(cell(c_phrase));
    if (e.skill.phrase.empty()) throw ParseError("lexicon: empty phrase", line);
    if (auto tc = cell(c_tokens); !tc.empty()) {
      auto v = parse_int(tc);
      if (!v || static_cast<std::size_t>(*v) != e.skill.token_count) {
        throw ParseError("lexicon: token_count does not match phrase '" + e.skill.phrase + "'", line);
      }
    }
    if (auto cf = cell(c_conf); !cf.empty() && cf != "NA") {
      auto v = parse_double(cf);
      if (!v || *v < 0 || *v > 1) throw ParseError("lexicon: confidence must be in [0,1]", line);
      e.skill.confidence = v;
    }
    if (auto cl = cell(c_cluster); !cl.empty() && cl != "NA") {
      auto v = parse_int(cl);
      if (!v || *v < 0) throw ParseError("lexicon: bad cluster_id '" + cl + "'", line);
      e.cluster_id = static_cast<int>(*v);
    }
    try {
      e.skill.competence = parse_competence_policy(cell(c_keep));
    } catch (const ValidationError& err) {
      throw ParseError(std::string("lexicon: ") + err.what(), line);
    }
    for (const auto& w : split(cell(c_ess), ',')) {
      auto tw = to_lower(trim(w));
      if (!tw.empty()) e.skill.essential_stopwords.push_back(tw);
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<LexiconEntry> load_lexicon(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("lexicon file not found: " + path.string());
  return parse_lexicon(read_file(path));
}

}  // namespace softskills::lexicon
