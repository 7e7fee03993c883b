#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace softskills::pipeline {

/// Pipeline settings. Every key has a type, a default and a valid range;
/// unknown keys are rejected. Values are kept as JSON so the snapshot written
/// to reports and manifests is exactly what was validated.
class Config {
 public:
  Config();

  /// Merges a JSON object file over the current values.
  void load_file(const std::filesystem::path& path);
  void merge_json(std::string_view json_text);
  /// Sets one key from its textual form ("0.7", "true", a path, ...).
  void set(std::string_view key, std::string_view value);
  std::string get(std::string_view key) const;
  bool is_set(std::string_view key) const;
  static bool known_key(std::string_view key);
  static std::vector<std::string> keys();

  std::string text(std::string_view key) const;
  double number(std::string_view key) const;
  std::int64_t integer(std::string_view key) const;
  std::optional<std::uint64_t> seed() const;

  /// Required path key; throws ValidationError naming the key and stage.
  std::filesystem::path require_path(std::string_view key, std::string_view stage) const;
  std::optional<std::filesystem::path> optional_path(std::string_view key) const;
  std::filesystem::path out_dir() const;

  /// Canonical JSON of every setting that can change report content (worker
  /// count excluded).
  nlohmann::json snapshot() const;
  std::string digest() const;

 private:
  void assign(const std::string& key, const nlohmann::json& value);
  nlohmann::json values_;
};

std::string sha256_hex(std::string_view data);

struct StageResult {
  std::vector<std::filesystem::path> outputs;
  std::vector<std::string> notes;
};

StageResult run_build_lexicon(const Config& config);
StageResult run_snippets(const Config& config);
StageResult run_detect(const Config& config);
StageResult run_analyze(const Config& config);

/// Human-readable view of a TSV/CSV (aligned columns) or JSON report.
std::string render_report(const std::filesystem::path& path);

}  // namespace softskills::pipeline
