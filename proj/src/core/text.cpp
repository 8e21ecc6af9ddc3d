#include "autoform/core/text.hpp"

#include <algorithm>
#include <cctype>

#include "autoform/core/error.hpp"

namespace autoform::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_hole_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }

bool is_hole_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Returns the hole name starting at tmpl[i] == '{', or empty.
std::string_view hole_at(std::string_view tmpl, std::size_t i) {
  if (tmpl[i] != '{' || i + 1 >= tmpl.size() || !is_hole_start(tmpl[i + 1])) return {};
  std::size_t j = i + 1;
  while (j < tmpl.size() && is_hole_char(tmpl[j])) ++j;
  if (j >= tmpl.size() || tmpl[j] != '}') return {};
  return tmpl.substr(i + 1, j - i - 1);
}

}  // namespace

std::string_view trim_left(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && is_space(s[i])) ++i;
  return s.substr(i);
}

std::string_view trim_right(std::string_view s) {
  std::size_t n = s.size();
  while (n > 0 && is_space(s[n - 1])) --n;
  return s.substr(0, n);
}

std::string_view trim(std::string_view s) { return trim_right(trim_left(s)); }

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(s.substr(start));
      break;
    }
    std::string_view line = s.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  return lines;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : trim(s)) {
    if (is_space(c)) {
      pending = true;
      continue;
    }
    if (pending) out += ' ';
    pending = false;
    out += c;
  }
  return out;
}

std::size_t find_word(std::string_view s, std::string_view word, std::size_t from) {
  while (from <= s.size()) {
    std::size_t pos = s.find(word, from);
    if (pos == std::string_view::npos) return pos;
    bool left_ok = pos == 0 || (!is_ident_char(s[pos - 1]) && s[pos - 1] != '.');
    std::size_t end = pos + word.size();
    bool right_ok = end >= s.size() || !is_ident_char(s[end]);
    if (left_ok && right_ok) return pos;
    from = pos + 1;
  }
  return std::string_view::npos;
}

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto b0 = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = b0;
    if (b0 >= 0xF0 && b0 < 0xF8) {
      extra = 3;
      cp = b0 & 0x07;
    } else if (b0 >= 0xE0) {
      extra = 2;
      cp = b0 & 0x0F;
    } else if (b0 >= 0xC0) {
      extra = 1;
      cp = b0 & 0x1F;
    }
    if (b0 >= 0xF8 || (b0 >= 0x80 && b0 < 0xC0) || (extra > 0 && i + extra >= s.size())) {
      out.push_back(b0);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k <= extra; ++k) {
      auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(b0);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  for (char32_t cp : s) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }
  return out;
}

std::string render_holes(std::string_view tmpl, const std::map<std::string, std::string>& bindings) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    std::string_view name = hole_at(tmpl, i);
    if (name.empty()) {
      out += tmpl[i++];
      continue;
    }
    auto it = bindings.find(std::string(name));
    if (it == bindings.end()) throw TemplateError("unbound template hole {" + std::string(name) + "}");
    out += it->second;
    i += name.size() + 2;
  }
  return out;
}

std::vector<std::string> hole_names(std::string_view tmpl) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    std::string_view name = hole_at(tmpl, i);
    if (name.empty()) continue;
    if (std::find(names.begin(), names.end(), name) == names.end()) names.emplace_back(name);
    i += name.size() + 1;
  }
  return names;
}

}  // namespace autoform::text
