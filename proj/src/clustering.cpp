#include "clustering.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "errors.hpp"
#include "table_io.hpp"

namespace softskills::clustering {

bool EmbeddingTable::add(std::string token, std::span<const float> vector) {
  if (vector.size() != dimension_) {
    throw ValidationError("embedding for '" + token + "' has " + std::to_string(vector.size()) +
                          " components, expected " + std::to_string(dimension_));
  }
  for (float f : vector) {
    if (!std::isfinite(f)) throw ValidationError("embedding for '" + token + "' has a non-finite component");
  }
  if (index_.contains(token)) return false;
  index_.emplace(token, tokens_.size());
  tokens_.push_back(std::move(token));
  data_.insert(data_.end(), vector.begin(), vector.end());
  return true;
}

std::span<const float> EmbeddingTable::lookup(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return {};
  return std::span<const float>(data_).subspan(it->second * dimension_, dimension_);
}

EmbeddingFormat parse_embedding_format(std::string_view s) {
  if (s.empty() || s == "auto") return EmbeddingFormat::Auto;
  if (s == "text") return EmbeddingFormat::Text;
  if (s == "binary") return EmbeddingFormat::Binary;
  throw ValidationError("unknown embedding format '" + std::string(s) + "'");
}

namespace {

std::pair<std::size_t, std::size_t> parse_header(std::string_view line) {
  std::istringstream in{std::string(line)};
  long long count = -1, dim = -1;
  std::string extra;
  if (!(in >> count >> dim) || (in >> extra) || count < 0 || dim <= 0) {
    throw ParseError("embedding header must be '<count> <dimension>'", 1);
  }
  return {static_cast<std::size_t>(count), static_cast<std::size_t>(dim)};
}

float read_le_float(const char* p) {
  std::uint32_t bits = 0;
  for (int i = 3; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(p[i]);
  return std::bit_cast<float>(bits);
}

void write_le_float(std::string& out, float f) {
  auto bits = std::bit_cast<std::uint32_t>(f);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

}  // namespace

LoadedEmbeddings parse_embeddings_text(std::string_view content) {
  auto nl = content.find('\n');
  auto [count, dim] = parse_header(content.substr(0, nl));
  LoadedEmbeddings out{EmbeddingTable(dim), {}};
  out.report.declared = count;
  std::size_t line_no = 1;
  std::size_t pos = nl == std::string_view::npos ? content.size() : nl + 1;
  std::size_t entries = 0;
  std::vector<float> values;
  while (pos < content.size()) {
    auto end = content.find('\n', pos);
    std::string_view line = content.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    pos = end == std::string_view::npos ? content.size() : end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream in{std::string(line)};
    std::string token;
    in >> token;
    values.clear();
    std::string field;
    while (in >> field) {
      auto v = parse_double(field);
      if (!v) throw ParseError("bad embedding component '" + field + "'", line_no);
      values.push_back(static_cast<float>(*v));
    }
    if (values.size() != dim) {
      throw ParseError("expected " + std::to_string(dim) + " components, found " + std::to_string(values.size()),
                       line_no);
    }
    try {
      if (out.table.add(token, values)) out.report.loaded++;
      else out.report.duplicates++;
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no);
    }
    ++entries;
  }
  if (entries != count) {
    throw ParseError("header declares " + std::to_string(count) + " entries, file has " + std::to_string(entries),
                     line_no);
  }
  return out;
}

LoadedEmbeddings parse_embeddings_binary(std::string_view content) {
  auto nl = content.find('\n');
  if (nl == std::string_view::npos) throw ParseError("binary embeddings: missing header", 1);
  auto [count, dim] = parse_header(content.substr(0, nl));
  LoadedEmbeddings out{EmbeddingTable(dim), {}};
  out.report.declared = count;
  std::size_t pos = nl + 1;
  std::vector<float> values(dim);
  for (std::size_t e = 0; e < count; ++e) {
    while (pos < content.size() && (content[pos] == '\n' || content[pos] == ' ')) ++pos;
    auto sp = content.find(' ', pos);
    if (sp == std::string_view::npos) {
      throw ParseError("binary embeddings: truncated at entry " + std::to_string(e + 1));
    }
    std::string token(content.substr(pos, sp - pos));
    pos = sp + 1;
    if (content.size() - pos < 4 * dim) {
      throw ParseError("binary embeddings: truncated vector at entry " + std::to_string(e + 1));
    }
    for (std::size_t k = 0; k < dim; ++k) values[k] = read_le_float(content.data() + pos + 4 * k);
    pos += 4 * dim;
    try {
      if (out.table.add(token, values)) out.report.loaded++;
      else out.report.duplicates++;
    } catch (const ValidationError& err) {
      throw ParseError(std::string("binary embeddings entry ") + std::to_string(e + 1) + ": " + err.what());
    }
  }
  return out;
}

LoadedEmbeddings load_embeddings(const std::filesystem::path& path, EmbeddingFormat format) {
  if (!std::filesystem::exists(path)) throw IoError("embedding file not found: " + path.string());
  if (format == EmbeddingFormat::Auto) {
    format = path.extension() == ".bin" ? EmbeddingFormat::Binary : EmbeddingFormat::Text;
  }
  auto content = read_file(path);
  return format == EmbeddingFormat::Binary ? parse_embeddings_binary(content) : parse_embeddings_text(content);
}

std::string serialize_embeddings_text(const EmbeddingTable& table) {
  std::string out = std::to_string(table.size()) + " " + std::to_string(table.dimension()) + "\n";
  for (const auto& tok : table.tokens()) {
    out += tok;
    for (float f : table.lookup(tok)) out += " " + format_double(static_cast<double>(f));
    out += "\n";
  }
  return out;
}

std::string serialize_embeddings_binary(const EmbeddingTable& table) {
  std::string out = std::to_string(table.size()) + " " + std::to_string(table.dimension()) + "\n";
  for (const auto& tok : table.tokens()) {
    out += tok;
    out += ' ';
    for (float f : table.lookup(tok)) write_le_float(out, f);
    out += '\n';
  }
  return out;
}

std::optional<PhraseVector> embed_phrase(std::string_view phrase, const EmbeddingTable& table,
                                         const StopwordList& stopwords) {
  PhraseVector pv;
  pv.phrase = std::string(phrase);
  pv.vector.assign(table.dimension(), 0.0);
  for (const auto& tok : tokenize_words(phrase)) {
    if (stopwords.contains(tok)) continue;
    auto v = table.lookup(tok);
    if (v.empty()) continue;
    for (std::size_t k = 0; k < v.size(); ++k) pv.vector[k] += v[k];
    pv.covered_tokens++;
  }
  if (pv.covered_tokens == 0) return std::nullopt;
  for (auto& x : pv.vector) x /= static_cast<double>(pv.covered_tokens);
  return pv;
}

double cosine_distance(std::span<const double> u, std::span<const double> v) {
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dot += u[k] * v[k];
    nu += u[k] * u[k];
    nv += v[k] * v[k];
  }
  if (nu == 0 || nv == 0) return 1.0;
  return 1.0 - dot / (std::sqrt(nu) * std::sqrt(nv));
}

Agglomeration agglomerate_points(const std::vector<std::vector<double>>& points, std::size_t target_clusters) {
  const std::size_t n = points.size();
  if (target_clusters < 1) throw ValidationError("target cluster count must be at least 1");
  if (target_clusters > n) {
    throw ValidationError("cannot form " + std::to_string(target_clusters) + " clusters from " + std::to_string(n) +
                          " vectors");
  }
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist[i * n + j] = dist[j * n + i] = cosine_distance(points[i], points[j]);
    }
  }
  std::vector<std::size_t> sizes(n, 1);
  std::vector<std::size_t> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = i;

  Agglomeration out;
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;

  while (active.size() > target_clusters) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t x = 0; x < active.size(); ++x) {
      const std::size_t i = active[x];
      const double* row = &dist[i * n];
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const std::size_t j = active[y];
        if (row[j] < best) {
          best = row[j];
          bi = x;
          bj = y;
        }
      }
    }
    const std::size_t a = active[bi], b = active[bj];
    const double wa = static_cast<double>(sizes[a]), wb = static_cast<double>(sizes[b]);
    for (std::size_t k : active) {
      if (k == a || k == b) continue;
      const double d = (wa * dist[a * n + k] + wb * dist[b * n + k]) / (wa + wb);
      dist[a * n + k] = dist[k * n + a] = d;
    }
    sizes[a] += sizes[b];
    parent[b] = a;
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    out.merges.push_back({a, b, best});
  }

  out.assignment.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = i;
    while (parent[r] != r) r = parent[r];
    out.assignment[i] = r;
  }
  return out;
}

const Cluster* ClusterSet::find(int id) const {
  for (const auto& c : clusters) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

Cluster* ClusterSet::find(int id) {
  return const_cast<Cluster*>(static_cast<const ClusterSet*>(this)->find(id));
}

std::size_t ClusterSet::phrase_count() const {
  std::size_t n = 0;
  for (const auto& c : clusters) n += c.members.size();
  return n;
}

ClusterSet agglomerate(const std::vector<PhraseVector>& vectors, std::size_t target_clusters,
                       const std::vector<std::string>& unembedded) {
  std::vector<std::vector<double>> points;
  points.reserve(vectors.size());
  for (const auto& v : vectors) points.push_back(v.vector);

  ClusterSet out;
  if (!points.empty()) {
    auto agg = agglomerate_points(points, target_clusters);
    out.merges = agg.merges;
    std::map<std::size_t, std::vector<std::size_t>> groups;  // root id is the smallest member
    for (std::size_t i = 0; i < points.size(); ++i) groups[agg.assignment[i]].push_back(i);
    int next_id = 0;
    for (const auto& [root, members] : groups) {
      Cluster c;
      c.id = next_id++;
      double best_score = -std::numeric_limits<double>::infinity();
      for (std::size_t m : members) {
        c.members.push_back(vectors[m].phrase);
        double score = 0;
        for (std::size_t o : members) {
          if (o != m) score -= cosine_distance(points[m], points[o]);
        }
        if (score > best_score) {
          best_score = score;
          c.label = vectors[m].phrase;
        }
      }
      out.clusters.push_back(std::move(c));
    }
  }
  int next_id = static_cast<int>(out.clusters.size());
  for (const auto& p : unembedded) out.clusters.push_back({next_id++, p, {p}});
  check_partition(out);
  return out;
}

void check_partition(const ClusterSet& set) {
  std::set<int> ids;
  std::set<std::string> seen;
  for (const auto& c : set.clusters) {
    if (c.members.empty()) throw ValidationError("cluster " + std::to_string(c.id) + " is empty");
    if (!ids.insert(c.id).second) throw ValidationError("duplicate cluster id " + std::to_string(c.id));
    for (const auto& m : c.members) {
      if (!seen.insert(m).second) throw ValidationError("phrase '" + m + "' is in more than one cluster");
    }
  }
}

namespace {

int parse_cluster_id(std::string_view s, std::size_t line) {
  auto v = parse_int(s);
  if (!v || *v < 0) throw ParseError("bad cluster id '" + std::string(s) + "'", line);
  return static_cast<int>(*v);
}

std::string normalize_phrase(std::string_view s) { return join(tokenize_words(s)); }

}  // namespace

std::vector<ClusterEdit> parse_cluster_edits(std::string_view text) {
  std::vector<ClusterEdit> out;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    if (starts_with_comment(raw)) continue;
    auto line = trim(raw);
    auto sp = line.find_first_of(" \t");
    std::string verb = to_lower(line.substr(0, sp));
    std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp));
    ClusterEdit e;
    e.line = line_no;
    if (verb == "split") {
      e.kind = ClusterEdit::Kind::Split;
      auto colon = rest.find(':');
      if (colon == std::string_view::npos) throw ParseError("split needs '<id> : parts'", line_no);
      e.cluster = parse_cluster_id(trim(rest.substr(0, colon)), line_no);
      for (const auto& part : split(rest.substr(colon + 1), '|')) {
        std::vector<std::string> phrases;
        for (const auto& p : split(part, ',')) {
          auto np = normalize_phrase(p);
          if (!np.empty()) phrases.push_back(np);
        }
        if (phrases.empty()) throw ParseError("split has an empty part", line_no);
        e.parts.push_back(std::move(phrases));
      }
      if (e.parts.size() < 2) throw ParseError("split needs at least two parts", line_no);
    } else if (verb == "merge") {
      e.kind = ClusterEdit::Kind::Merge;
      std::istringstream in{std::string(rest)};
      std::string id;
      while (in >> id) e.merge_ids.push_back(parse_cluster_id(id, line_no));
      if (e.merge_ids.size() < 2) throw ParseError("merge needs at least two cluster ids", line_no);
    } else if (verb == "move") {
      e.kind = ClusterEdit::Kind::Move;
      auto arrow = rest.find("->");
      if (arrow == std::string_view::npos) throw ParseError("move needs '<phrase> -> <id>'", line_no);
      e.phrase = normalize_phrase(rest.substr(0, arrow));
      e.cluster = parse_cluster_id(trim(rest.substr(arrow + 2)), line_no);
      if (e.phrase.empty()) throw ParseError("move without a phrase", line_no);
    } else if (verb == "label") {
      e.kind = ClusterEdit::Kind::Label;
      auto sp2 = rest.find_first_of(" \t");
      if (sp2 == std::string_view::npos) throw ParseError("label needs '<id> <name>'", line_no);
      e.cluster = parse_cluster_id(rest.substr(0, sp2), line_no);
      e.name = std::string(trim(rest.substr(sp2)));
    } else {
      throw ParseError("unknown cluster directive '" + verb + "'", line_no);
    }
    out.push_back(std::move(e));
  }
  return out;
}

EditOutcome apply_cluster_edits(ClusterSet clusters, const std::vector<ClusterEdit>& script) {
  check_partition(clusters);
  EditOutcome out;
  const std::size_t before = clusters.clusters.size();
  auto fail = [](std::size_t idx, const ClusterEdit& e, const std::string& what) {
    throw ValidationError("cluster edit #" + std::to_string(idx) + " (line " + std::to_string(e.line) + "): " + what);
  };
  auto require = [&](std::size_t idx, const ClusterEdit& e, int id) -> Cluster& {
    Cluster* c = clusters.find(id);
    if (!c) fail(idx, e, "no cluster " + std::to_string(id));
    return *c;
  };
  auto next_id = [&] {
    int m = -1;
    for (const auto& c : clusters.clusters) m = std::max(m, c.id);
    return m + 1;
  };

  for (std::size_t k = 0; k < script.size(); ++k) {
    const auto& e = script[k];
    const std::size_t idx = k + 1;
    switch (e.kind) {
      case ClusterEdit::Kind::Split: {
        Cluster& c = require(idx, e, e.cluster);
        std::multiset<std::string> want(c.members.begin(), c.members.end());
        std::multiset<std::string> got;
        for (const auto& part : e.parts) got.insert(part.begin(), part.end());
        if (want != got) fail(idx, e, "split parts do not partition cluster " + std::to_string(e.cluster));
        const std::string old_label = c.label;
        c.members = e.parts[0];
        if (std::find(c.members.begin(), c.members.end(), old_label) == c.members.end()) c.label = c.members[0];
        int fresh = next_id();
        for (std::size_t p = 1; p < e.parts.size(); ++p) {
          clusters.clusters.push_back({fresh++, e.parts[p][0], e.parts[p]});
        }
        out.log.push_back("split " + std::to_string(e.cluster) + " into " + std::to_string(e.parts.size()) + " parts");
        break;
      }
      case ClusterEdit::Kind::Merge: {
        for (int id : e.merge_ids) require(idx, e, id);
        std::set<int> distinct(e.merge_ids.begin(), e.merge_ids.end());
        if (distinct.size() != e.merge_ids.size()) fail(idx, e, "merge lists a cluster twice");
        Cluster& keep = require(idx, e, e.merge_ids[0]);
        std::vector<std::string> absorbed;
        for (std::size_t m = 1; m < e.merge_ids.size(); ++m) {
          const Cluster& other = require(idx, e, e.merge_ids[m]);
          absorbed.insert(absorbed.end(), other.members.begin(), other.members.end());
        }
        keep.members.insert(keep.members.end(), absorbed.begin(), absorbed.end());
        const int keep_id = keep.id;
        std::erase_if(clusters.clusters, [&](const Cluster& c) {
          return c.id != keep_id && distinct.contains(c.id);
        });
        out.log.push_back("merge into " + std::to_string(keep_id));
        break;
      }
      case ClusterEdit::Kind::Move: {
        Cluster& target = require(idx, e, e.cluster);
        Cluster* source = nullptr;
        for (auto& c : clusters.clusters) {
          if (std::find(c.members.begin(), c.members.end(), e.phrase) != c.members.end()) source = &c;
        }
        if (!source) fail(idx, e, "no phrase '" + e.phrase + "'");
        if (source == &target) break;
        target.members.push_back(e.phrase);
        std::erase(source->members, e.phrase);
        if (source->label == e.phrase && !source->members.empty()) source->label = source->members[0];
        const int src_id = source->id;
        if (source->members.empty()) {
          std::erase_if(clusters.clusters, [&](const Cluster& c) { return c.id == src_id; });
        }
        out.log.push_back("move '" + e.phrase + "' " + std::to_string(src_id) + " -> " + std::to_string(e.cluster));
        break;
      }
      case ClusterEdit::Kind::Label:
        require(idx, e, e.cluster).label = e.name;
        out.log.push_back("label " + std::to_string(e.cluster) + " '" + e.name + "'");
        break;
    }
    check_partition(clusters);
  }
  std::sort(clusters.clusters.begin(), clusters.clusters.end(),
            [](const Cluster& x, const Cluster& y) { return x.id < y.id; });
  out.log.push_back("clusters before: " + std::to_string(before) + ", after: " + std::to_string(clusters.clusters.size()));
  out.clusters = std::move(clusters);
  return out;
}

std::string serialize_clusters(const ClusterSet& set) {
  std::string out = "cluster_id\tlabel\tphrase\n";
  for (const auto& c : set.clusters) {
    for (const auto& m : c.members) out += std::to_string(c.id) + "\t" + c.label + "\t" + m + "\n";
  }
  return out;
}

ClusterSet parse_clusters(std::string_view tsv) {
  Table t = parse_tsv(tsv);
  const auto c_id = t.require_column("cluster_id", "clusters");
  const auto c_label = t.require_column("label", "clusters");
  const auto c_phrase = t.require_column("phrase", "clusters");
  ClusterSet out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (row.size() != t.header.size()) throw ParseError("clusters: wrong field count", t.line_numbers[r]);
    int id = parse_cluster_id(row[c_id], t.line_numbers[r]);
    Cluster* c = out.find(id);
    if (!c) {
      out.clusters.push_back({id, std::string(trim(row[c_label])), {}});
      c = &out.clusters.back();
    }
    c->members.push_back(normalize_phrase(row[c_phrase]));
  }
  check_partition(out);
  return out;
}

ClusterSet load_clusters(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("cluster file not found: " + path.string());
  return parse_clusters(read_file(path));
}

}  // namespace softskills::clustering
