#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "text.hpp"

namespace softskills::clustering {

/// Pretrained word vectors, stored contiguously.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dimension = 0) : dimension_(dimension) {}

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return tokens_.size(); }

  /// Returns false (and leaves the table unchanged) if `token` already exists.
  /// Throws ValidationError on a dimension mismatch or a non-finite component.
  bool add(std::string token, std::span<const float> vector);

  /// Empty span when absent.
  std::span<const float> lookup(std::string_view token) const;
  bool contains(std::string_view token) const { return index_.contains(std::string(token)); }

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::size_t dimension_;
  std::vector<std::string> tokens_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class EmbeddingFormat { Auto, Text, Binary };

EmbeddingFormat parse_embedding_format(std::string_view s);

struct EmbeddingLoadReport {
  std::size_t declared = 0;
  std::size_t loaded = 0;
  std::size_t duplicates = 0;
};

struct LoadedEmbeddings {
  EmbeddingTable table;
  EmbeddingLoadReport report;
};

/// word2vec text ("count dim" header, then "token v1 .. vd" lines) or binary
/// (same header, then per entry: token, one space, dim little-endian float32,
/// optional newline). Auto picks binary for a ".bin" extension. Duplicate
/// tokens keep the first vector. Malformed content throws ParseError with the
/// line (text) or entry number (binary).
LoadedEmbeddings load_embeddings(const std::filesystem::path& path, EmbeddingFormat format = EmbeddingFormat::Auto);
LoadedEmbeddings parse_embeddings_text(std::string_view content);
LoadedEmbeddings parse_embeddings_binary(std::string_view content);

std::string serialize_embeddings_text(const EmbeddingTable& table);
std::string serialize_embeddings_binary(const EmbeddingTable& table);

struct PhraseVector {
  std::string phrase;
  std::vector<double> vector;
  std::size_t covered_tokens = 0;
};

/// Mean of the embeddings of the phrase's non-stopword tokens that are in the
/// table; nullopt when none are.
std::optional<PhraseVector> embed_phrase(std::string_view phrase, const EmbeddingTable& table,
                                         const StopwordList& stopwords);

/// 1 - cos(u, v); 1 when either vector has zero norm.
double cosine_distance(std::span<const double> u, std::span<const double> v);

struct MergeStep {
  std::size_t a = 0;  ///< surviving cluster id (smaller member index)
  std::size_t b = 0;  ///< absorbed cluster id
  double height = 0;
};

/// Average-linkage agglomeration over points. Cluster ids are the smallest
/// point index they contain. Ties on linkage go to the lexicographically
/// smallest (id, id) pair.
struct Agglomeration {
  std::vector<MergeStep> merges;
  /// Per point, the id of its final cluster.
  std::vector<std::size_t> assignment;
};

Agglomeration agglomerate_points(const std::vector<std::vector<double>>& points, std::size_t target_clusters);

struct Cluster {
  int id = 0;
  std::string label;
  std::vector<std::string> members;
};

struct ClusterSet {
  std::vector<Cluster> clusters;
  std::vector<MergeStep> merges;

  const Cluster* find(int id) const;
  Cluster* find(int id);
  std::size_t phrase_count() const;
};

/// Clusters the vectors down to `target_clusters`, renumbers clusters 0..k-1 in
/// order of their first member, labels each with its medoid phrase, and
/// appends `unembedded` phrases as singletons.
ClusterSet agglomerate(const std::vector<PhraseVector>& vectors, std::size_t target_clusters,
                       const std::vector<std::string>& unembedded = {});

/// Throws ValidationError if a cluster is empty, an id repeats or a phrase
/// appears twice.
void check_partition(const ClusterSet& set);

struct ClusterEdit {
  enum class Kind { Split, Merge, Move, Label } kind;
  int cluster = 0;                              ///< split, label, move target
  std::vector<int> merge_ids;                   ///< merge
  std::vector<std::vector<std::string>> parts;  ///< split
  std::string phrase;                           ///< move
  std::string name;                             ///< label
  std::size_t line = 0;
};

/// Grammar, one directive per line ('#' comments allowed):
///   split <id> : <phrase>, <phrase> | <phrase>, ...
///   merge <id> <id> [<id> ...]
///   move <phrase> -> <id>
///   label <id> <name ...>
std::vector<ClusterEdit> parse_cluster_edits(std::string_view text);

struct EditOutcome {
  ClusterSet clusters;
  std::vector<std::string> log;
};

/// Replays the script in order. Split keeps the id for the first part and
/// allocates fresh ids (max + 1) for the rest; merge keeps the first id. A
/// directive referencing a missing id or phrase throws ValidationError naming
/// its 1-based index.
EditOutcome apply_cluster_edits(ClusterSet clusters, const std::vector<ClusterEdit>& script);

/// TSV: cluster_id, label, phrase, one row per member.
std::string serialize_clusters(const ClusterSet& set);
ClusterSet parse_clusters(std::string_view tsv);
ClusterSet load_clusters(const std::filesystem::path& path);

}  // namespace softskills::clustering
