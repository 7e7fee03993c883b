#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace softskills {

/// Lowercased word tokens with the byte offset of each token's first character
/// in the source string.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<std::size_t> origin_offsets;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
};

/// Splits on every byte outside [A-Za-z0-9'] and lowercases ASCII letters.
/// Apostrophes survive only between alphanumerics ("don't"); hyphens always
/// split ("communication-skills" -> communication, skills). Bytes >= 0x80 are
/// delimiters.
TokenSequence tokenize(std::string_view text);

/// Token strings only.
std::vector<std::string> tokenize_words(std::string_view text);

std::string join(std::span<const std::string> parts, std::string_view sep = " ");

std::string_view trim(std::string_view s);

std::string to_lower(std::string_view s);

std::vector<std::string> split(std::string_view s, char sep);

bool starts_with_comment(std::string_view line);

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(std::unordered_set<std::string> words);

  /// One token per line; blank lines and '#' comments ignored. Throws IoError
  /// when the file is missing and ValidationError when the list is empty or
  /// lacks the core English function words.
  static StopwordList load(const std::filesystem::path& path);

  bool contains(std::string_view word) const;
  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }
  const std::unordered_set<std::string>& words() const noexcept { return words_; }

 private:
  std::unordered_set<std::string> words_;
};

/// Levenshtein distance with an early exit once it exceeds `limit`.
std::size_t edit_distance(std::string_view a, std::string_view b, std::size_t limit);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace softskills
