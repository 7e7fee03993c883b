#include "text.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace softskills {

namespace {

bool is_alnum(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char lower(unsigned char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

}  // namespace

TokenSequence tokenize(std::string_view text) {
  TokenSequence out;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    auto c = static_cast<unsigned char>(text[i]);
    if (!is_alnum(c)) {
      ++i;
      continue;
    }
    std::size_t start = i;
    std::string tok;
    while (i < n) {
      auto d = static_cast<unsigned char>(text[i]);
      if (is_alnum(d)) {
        tok.push_back(lower(d));
        ++i;
      } else if (d == '\'' && i + 1 < n && is_alnum(static_cast<unsigned char>(text[i + 1]))) {
        tok.push_back('\'');
        ++i;
      } else {
        break;
      }
    }
    out.tokens.push_back(std::move(tok));
    out.origin_offsets.push_back(start);
  }
  return out;
}

std::vector<std::string> tokenize_words(std::string_view text) { return tokenize(text).tokens; }

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n\f\v";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = lower(static_cast<unsigned char>(c));
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

bool starts_with_comment(std::string_view line) {
  auto t = trim(line);
  return t.empty() || t.front() == '#';
}

StopwordList::StopwordList(std::unordered_set<std::string> words) : words_(std::move(words)) {}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (starts_with_comment(line)) continue;
    words.insert(to_lower(trim(line)));
  }
  static constexpr std::array<const char*, 8> kCore{"the", "a", "an", "of", "to", "in", "and", "with"};
  for (const char* w : kCore) {
    if (!words.contains(w)) {
      throw ValidationError("stopword list " + path.string() + " is missing core word '" + w + "'");
    }
  }
  return StopwordList(std::move(words));
}

bool StopwordList::contains(std::string_view word) const {
  return words_.find(std::string(word)) != words_.end();
}

std::size_t edit_distance(std::string_view a, std::string_view b, std::size_t limit) {
  const std::size_t la = a.size(), lb = b.size();
  if ((la > lb ? la - lb : lb - la) > limit) return limit + 1;
  std::vector<std::size_t> prev(lb + 1), cur(lb + 1);
  for (std::size_t j = 0; j <= lb; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= la; ++i) {
    cur[0] = i;
    std::size_t row_min = cur[0];
    for (std::size_t j = 1; j <= lb; ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
      row_min = std::min(row_min, cur[j]);
    }
    if (row_min > limit) return limit + 1;
    std::swap(prev, cur);
  }
  return prev[lb];
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace softskills
