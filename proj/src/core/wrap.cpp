#include "autoform/core/wrap.hpp"

#include <algorithm>
#include <cctype>

#include "autoform/core/error.hpp"
#include "autoform/core/text.hpp"

namespace autoform {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Skips whitespace and Isabelle (* nested *) comments.
std::size_t skip_blank(std::string_view s, std::size_t i) {
  while (i < s.size()) {
    if (is_space(s[i])) {
      ++i;
    } else if (s.compare(i, 2, "(*") == 0) {
      int depth = 0;
      while (i < s.size()) {
        if (s.compare(i, 2, "(*") == 0) {
          ++depth;
          i += 2;
        } else if (s.compare(i, 2, "*)") == 0) {
          --depth;
          i += 2;
          if (depth == 0) break;
        } else {
          ++i;
        }
      }
    } else {
      break;
    }
  }
  return i;
}

struct Token {
  std::string_view raw;
  std::size_t pos;
  std::string value() const {
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') return std::string(raw.substr(1, raw.size() - 2));
    return std::string(raw);
  }
};

std::optional<Token> next_token(std::string_view s, std::size_t& i) {
  i = skip_blank(s, i);
  if (i >= s.size()) return std::nullopt;
  std::size_t start = i;
  if (s[i] == '"') {
    std::size_t close = s.find('"', i + 1);
    i = close == std::string_view::npos ? s.size() : close + 1;
  } else {
    while (i < s.size() && !is_space(s[i]) && s[i] != '"' && s.compare(i, 2, "(*") != 0) ++i;
  }
  return Token{s.substr(start, i - start), start};
}

std::vector<std::string> dedup(std::vector<std::string> names) {
  std::vector<std::string> out;
  for (auto& n : names) {
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(std::move(n));
  }
  return out;
}

std::string_view strip_blank_lines(std::string_view code) {
  std::string_view body = text::trim_right(code);
  while (!body.empty()) {
    std::size_t nl = body.find('\n');
    if (nl == std::string_view::npos || !text::trim(body.substr(0, nl)).empty()) break;
    body.remove_prefix(nl + 1);
  }
  return body;
}

// Lean: offset just past the last leading `import` line, and the names.
std::size_t lean_import_block(std::string_view code, std::vector<std::string>* names) {
  std::size_t pos = 0;
  std::size_t after_last = 0;
  while (pos < code.size()) {
    std::size_t nl = code.find('\n', pos);
    std::size_t line_end = nl == std::string_view::npos ? code.size() : nl;
    std::string_view line = text::trim(code.substr(pos, line_end - pos));
    std::size_t next = nl == std::string_view::npos ? code.size() : nl + 1;
    if (line.empty() || line.starts_with("--")) {
      pos = next;
      continue;
    }
    if (!line.starts_with("import ")) break;
    if (names) {
      std::size_t k = 0;
      std::string_view rest = line.substr(7);
      while (auto tok = next_token(rest, k)) names->push_back(tok->value());
    }
    after_last = next;
    pos = next;
  }
  return after_last;
}

std::string wrap_isabelle(std::string_view code, std::string_view theory_name,
                          const std::vector<std::string>& extra_imports) {
  if (auto header = parse_theory_header(code)) {
    if (!ends_with_end_marker(code)) throw MalformedWrapper("theory '" + header->name + "' has no closing 'end'");
    std::string splice;
    std::vector<std::string> present = header->imports;
    for (const auto& imp : extra_imports) {
      if (std::find(present.begin(), present.end(), imp) != present.end()) continue;
      present.push_back(imp);
      splice += " " + render_isabelle_import(imp);
    }
    if (splice.empty()) return std::string(code);
    if (!header->has_imports_keyword) splice = " imports" + splice;
    std::string out(code);
    out.insert(header->insert_pos, splice);
    return out;
  }
  const auto& t = traits(Language::IsabelleHOL);
  std::vector<std::string> imports = t.default_imports;
  imports.insert(imports.end(), extra_imports.begin(), extra_imports.end());
  std::vector<std::string> rendered;
  for (const auto& imp : dedup(std::move(imports))) rendered.push_back(render_isabelle_import(imp));
  return text::render_holes(t.wrapper_template, {{"theory_name", sanitize_theory_name(theory_name)},
                                                 {"imports", text::join(rendered, " ")},
                                                 {"body", std::string(strip_blank_lines(code))}});
}

std::string wrap_lean(std::string_view code, const std::vector<std::string>& extra_imports,
                      const WrapOptions& options) {
  std::vector<std::string> wanted;
  if (options.lean_mathlib) wanted.emplace_back("Mathlib");
  wanted.insert(wanted.end(), extra_imports.begin(), extra_imports.end());
  std::vector<std::string> present;
  std::size_t block_end = lean_import_block(code, &present);
  std::string lines;
  for (const auto& imp : dedup(std::move(wanted))) {
    if (std::find(present.begin(), present.end(), imp) != present.end()) continue;
    present.push_back(imp);
    lines += "import " + imp + "\n";
  }
  if (lines.empty()) return std::string(code);
  std::string out(code);
  if (block_end == 0) {
    return text::render_holes(traits(Language::Lean4).wrapper_template,
                              {{"imports", lines + "\n"}, {"body", std::string(code)}});
  }
  if (out[block_end - 1] != '\n') lines = "\n" + lines;
  out.insert(block_end, lines);
  return out;
}

bool keyword_at(std::string_view s, std::size_t pos, std::string_view kw) {
  return text::find_word(s, kw, pos) == pos;
}

}  // namespace

std::optional<std::size_t> leading_theory_keyword(std::string_view code) {
  std::size_t i = skip_blank(code, 0);
  if (keyword_at(code, i, "theory")) return i;
  return std::nullopt;
}

std::optional<TheoryHeader> parse_theory_header(std::string_view code) {
  auto start = leading_theory_keyword(code);
  if (!start) return std::nullopt;
  TheoryHeader h;
  h.theory_pos = *start;
  std::size_t i = *start + 6;
  auto name = next_token(code, i);
  if (!name) throw MalformedWrapper("theory header without a name");
  h.name = name->value();
  h.insert_pos = name->pos + name->raw.size();
  bool in_imports = false;
  bool in_other_section = false;
  while (auto tok = next_token(code, i)) {
    if (tok->raw == "begin") {
      h.begin_pos = tok->pos;
      h.body_pos = tok->pos + 5;
      return h;
    }
    if (tok->raw == "imports") {
      in_imports = true;
      in_other_section = false;
      h.has_imports_keyword = true;
      h.insert_pos = tok->pos + tok->raw.size();
      continue;
    }
    if (tok->raw == "keywords" || tok->raw == "abbrevs") {
      in_imports = false;
      in_other_section = true;
      continue;
    }
    if (in_imports && !in_other_section) {
      h.imports.push_back(tok->value());
      h.insert_pos = tok->pos + tok->raw.size();
    }
  }
  throw MalformedWrapper("theory '" + h.name + "' header has no 'begin'");
}

bool ends_with_end_marker(std::string_view code) {
  std::string_view t = text::trim_right(code);
  if (!t.ends_with("end")) return false;
  std::size_t pos = t.size() - 3;
  return pos == 0 || !text::is_ident_char(t[pos - 1]);
}

std::string render_isabelle_import(std::string_view name) {
  bool plain = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) { return text::is_ident_char(c); });
  if (plain) return std::string(name);
  return "\"" + std::string(name) + "\"";
}

std::vector<std::string> declared_imports(std::string_view code, Language language) {
  if (language == Language::IsabelleHOL) {
    try {
      if (auto h = parse_theory_header(code)) return h->imports;
    } catch (const MalformedWrapper&) {
    }
    return {};
  }
  std::vector<std::string> names;
  lean_import_block(code, &names);
  return names;
}

std::string wrap_theory(std::string_view code, Language language, std::string_view theory_name,
                        const std::vector<std::string>& extra_imports, const WrapOptions& options) {
  if (text::trim(code).empty()) throw InvariantViolation("wrap_theory: empty code");
  if (language == Language::IsabelleHOL) return wrap_isabelle(code, theory_name, extra_imports);
  return wrap_lean(code, extra_imports, options);
}

namespace {

std::size_t first_keyword(std::string_view text, Language language) {
  static const std::vector<std::string_view> isabelle_kw{"theory", "definition", "lemma", "theorem"};
  static const std::vector<std::string_view> lean_kw{"import", "theorem", "def", "example"};
  const auto& keywords = language == Language::IsabelleHOL ? isabelle_kw : lean_kw;
  std::size_t first = std::string_view::npos;
  for (auto kw : keywords) first = std::min(first, text::find_word(text, kw));
  return first;
}

std::string from_keyword(std::string_view text, Language language) {
  std::size_t first = first_keyword(text, language);
  if (first != std::string_view::npos) return std::string(text::trim(text.substr(first)));
  return std::string(text);
}

}  // namespace

std::string extract_code_block(std::string_view llm_output, Language language) {
  std::size_t fence = llm_output.find("```");
  if (fence == std::string_view::npos) return from_keyword(llm_output, language);
  std::size_t line_end = llm_output.find('\n', fence);
  std::size_t close =
      line_end == std::string_view::npos ? std::string_view::npos : llm_output.find("```", line_end + 1);
  if (close != std::string_view::npos) {
    std::string_view body = strip_blank_lines(llm_output.substr(line_end + 1, close - line_end - 1));
    if (!text::trim(body).empty()) return std::string(body);
  }
  // A single fence: either an unclosed opening fence or a stray closing one.
  if (line_end != std::string_view::npos && close == std::string_view::npos) {
    std::string_view after = llm_output.substr(line_end + 1);
    if (first_keyword(after, language) != std::string_view::npos) return from_keyword(after, language);
  }
  std::string_view before = llm_output.substr(0, fence);
  if (first_keyword(before, language) != std::string_view::npos) return from_keyword(before, language);
  return from_keyword(llm_output, language);
}

std::string sanitize_theory_name(std::string_view id) {
  std::string out;
  for (char c : id) out += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
  if (out.empty()) return "Formalization";
  if (std::isdigit(static_cast<unsigned char>(out.front()))) out = "T_" + out;
  return out;
}

}  // namespace autoform
