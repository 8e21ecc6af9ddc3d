#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace autoform::text {

std::string_view trim(std::string_view s);
std::string_view trim_left(std::string_view s);
std::string_view trim_right(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string_view> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Collapses every whitespace run to one space and trims the ends.
std::string normalize_whitespace(std::string_view s);

inline bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '\'';
}

// Position of `word` in `s` at or after `from` with identifier boundaries on
// both sides, or npos.
std::size_t find_word(std::string_view s, std::string_view word, std::size_t from = 0);

// Decodes UTF-8 into code points. Invalid bytes decode as themselves.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

// Substitutes {name} holes. Holes are identifiers in braces; anything else in
// braces is literal text. Substituted values are never rescanned.
// Throws TemplateError when a hole has no binding.
std::string render_holes(std::string_view tmpl, const std::map<std::string, std::string>& bindings);

// Names of all {name} holes in order of first appearance.
std::vector<std::string> hole_names(std::string_view tmpl);

// Levenshtein distance over arbitrary sequences.
template <typename Seq>
std::size_t edit_distance(const Seq& a, const Seq& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t up = row[j];
      std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({sub, row[j] + 1, row[j - 1] + 1});
      diag = up;
    }
  }
  return row[b.size()];
}

}  // namespace autoform::text
