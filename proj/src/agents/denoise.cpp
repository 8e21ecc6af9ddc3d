#include <algorithm>
#include <cctype>
#include <set>

#include "autoform/agents/agents.hpp"
#include "autoform/core/error.hpp"
#include "autoform/core/text.hpp"
#include "autoform/core/wrap.hpp"

namespace autoform::agents {

namespace {

const std::set<std::string, std::less<>> kGoalKeywords{"lemma", "theorem", "corollary", "proposition", "schematic_goal"};

const std::set<std::string, std::less<>> kProofStart{"proof", "by",  "apply",   "using",    "unfolding",
                                                     "sorry", "oops", "done",   "including", "supply",
                                                     "subgoal", "defer", "prefer", "apply_end"};

// Theory-level commands; a goal's proof ends where one starts a line.
const std::set<std::string, std::less<>> kTheoryCommands{
    "end",         "lemma",        "theorem",       "corollary",      "proposition",   "schematic_goal",
    "definition",  "abbreviation", "fun",           "function",       "primrec",       "datatype",
    "codatatype",  "type_synonym", "typedecl",      "record",         "inductive",     "inductive_set",
    "coinductive", "locale",       "context",       "class",          "instantiation", "instance",
    "interpretation", "sublocale", "notation",      "no_notation",    "consts",        "axiomatization",
    "lemmas",      "declare",      "section",       "subsection",     "subsubsection", "chapter",
    "paragraph",   "text",         "ML",            "setup",          "method",        "named_theorems",
    "hide_const",  "hide_fact",    "value",         "term",           "thm",           "typ",
    "export_code", "termination",  "find_theorems", "bundle",         "unbundle",      "nitpick_params"};

struct Word {
  std::size_t begin;
  std::size_t end;
  std::string text;
  bool line_start;
};

bool starts_with_at(std::string_view s, std::size_t i, std::string_view p) { return s.substr(i, p.size()) == p; }

// Words outside comments, strings, cartouches and backquoted facts.
std::vector<Word> scan_words(std::string_view s) {
  std::vector<Word> words;
  std::size_t i = 0;
  bool at_line_start = true;
  auto skip_nested = [&](std::string_view open, std::string_view close) {
    int depth = 0;
    while (i < s.size()) {
      if (starts_with_at(s, i, open)) {
        ++depth;
        i += open.size();
      } else if (starts_with_at(s, i, close)) {
        i += close.size();
        if (--depth == 0) return;
      } else {
        ++i;
      }
    }
  };
  while (i < s.size()) {
    char c = s[i];
    if (c == '\n') {
      at_line_start = true;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    if (starts_with_at(s, i, "(*")) {
      skip_nested("(*", "*)");
    } else if (starts_with_at(s, i, "‹")) {
      skip_nested("‹", "›");
    } else if (starts_with_at(s, i, "\\<open>")) {
      skip_nested("\\<open>", "\\<close>");
    } else if (c == '"' || c == '`') {
      char q = c;
      ++i;
      while (i < s.size() && s[i] != q) i += (s[i] == '\\' && i + 1 < s.size()) ? 2 : 1;
      ++i;
    } else if (text::is_ident_char(c)) {
      std::size_t b = i;
      while (i < s.size() && text::is_ident_char(s[i])) ++i;
      words.push_back({b, i, std::string(s.substr(b, i - b)), at_line_start});
    } else {
      ++i;
    }
    at_line_start = false;
  }
  return words;
}

// Offset just after the last non-blank character before pos.
std::size_t content_end_before(std::string_view s, std::size_t pos) {
  while (pos > 0 && std::isspace(static_cast<unsigned char>(s[pos - 1]))) --pos;
  return pos;
}

// Replaces the proof of every top-level goal with a column-0 `sorry`, and
// adds one where a goal has no proof.
std::string replace_proofs(std::string_view code, std::size_t body_pos) {
  auto words = scan_words(code);
  std::string out;
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& w = words[i];
    if (w.begin < body_pos || !w.line_start || !kGoalKeywords.count(w.text)) continue;
    std::size_t j = i + 1;
    while (j < words.size() && !kProofStart.count(words[j].text) &&
           !(words[j].line_start && kTheoryCommands.count(words[j].text))) {
      ++j;
    }
    std::size_t next_command = words.size();
    std::size_t stmt_end;
    if (j < words.size() && kProofStart.count(words[j].text)) {
      stmt_end = content_end_before(code, words[j].begin);
      std::size_t k = j + 1;
      while (k < words.size() && !(words[k].line_start && kTheoryCommands.count(words[k].text))) ++k;
      next_command = k;
    } else {
      next_command = j;
      stmt_end = content_end_before(code, j < words.size() ? words[j].begin : code.size());
    }
    std::size_t region_end = content_end_before(code, next_command < words.size() ? words[next_command].begin
                                                                                    : code.size());
    region_end = std::max(region_end, stmt_end);
    out.append(code.substr(cursor, stmt_end - cursor));
    out += "\nsorry";
    cursor = region_end;
    i = next_command == 0 ? 0 : next_command - 1;
  }
  out.append(code.substr(cursor));
  return out;
}

std::vector<std::string> dedup(std::vector<std::string> names) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (auto& n : names) {
    if (seen.insert(n).second) out.push_back(std::move(n));
  }
  return out;
}

// The unique lexicon entry within edit distance 2, if any.
std::optional<std::string> repair_name(const std::string& name, const std::vector<std::string>& lexicon) {
  if (std::find(lexicon.begin(), lexicon.end(), name) != lexicon.end()) return std::nullopt;
  std::optional<std::string> found;
  for (const auto& candidate : lexicon) {
    if (text::edit_distance(name, candidate) > 2) continue;
    if (found) return std::nullopt;
    found = candidate;
  }
  return found;
}

std::string repair_isabelle_imports(const std::string& code, const std::vector<std::string>& lexicon) {
  auto header = parse_theory_header(code);
  if (!header) return code;
  std::string head = code.substr(0, header->begin_pos);
  std::string tail = code.substr(header->begin_pos);
  for (const auto& imp : header->imports) {
    auto fixed = repair_name(imp, lexicon);
    if (!fixed) continue;
    auto kw = text::find_word(head, "imports", header->theory_pos);
    if (kw == std::string::npos) continue;
    auto pos = text::find_word(head, imp, kw);
    if (pos == std::string::npos) continue;
    head.replace(pos, imp.size(), *fixed);
  }
  return head + tail;
}

std::string repair_lean_imports(const std::string& code, const std::vector<std::string>& lexicon) {
  std::vector<std::string> lines;
  for (auto line : text::split_lines(code)) {
    std::string l(line);
    auto t = text::trim(l);
    if (t.rfind("import ", 0) == 0) {
      std::vector<std::string> parts;
      std::string rest(t.substr(7));
      std::size_t p = 0;
      while (p < rest.size()) {
        auto q = rest.find(' ', p);
        if (q == std::string::npos) q = rest.size();
        std::string name = rest.substr(p, q - p);
        if (!name.empty()) parts.push_back(repair_name(name, lexicon).value_or(name));
        p = q + 1;
      }
      l = "import " + text::join(parts, " ");
    }
    lines.push_back(std::move(l));
  }
  return text::join(lines, "\n");
}

}  // namespace

std::vector<std::string> builtin_import_lexicon(Language language) {
  if (language == Language::Lean4) {
    return {"Mathlib",
            "Mathlib.Tactic",
            "Mathlib.Data.Real.Basic",
            "Mathlib.Data.Nat.Basic",
            "Mathlib.Data.Int.Basic",
            "Mathlib.Data.Complex.Basic",
            "Mathlib.Data.Finset.Basic",
            "Mathlib.Algebra.Group.Basic",
            "Mathlib.Analysis.SpecialFunctions.Exp",
            "Mathlib.Analysis.SpecialFunctions.Log.Basic",
            "Mathlib.Analysis.SpecialFunctions.Pow.Real",
            "Mathlib.NumberTheory.Divisors",
            "Mathlib.Topology.Basic",
            "Aesop"};
  }
  return {"Main",
          "Complex_Main",
          "HOL.Real",
          "HOL.Complex",
          "HOL.Transcendental",
          "HOL.NthRoot",
          "HOL.Groups",
          "HOL.Rings",
          "HOL.Fields",
          "HOL.Nat",
          "HOL.Int",
          "HOL.Rat",
          "HOL.List",
          "HOL.Set",
          "HOL.Finite_Set",
          "HOL.Power",
          "HOL.Parity",
          "HOL.GCD",
          "HOL.Deriv",
          "HOL.Series",
          "HOL.Limits",
          "HOL.Archimedean_Field",
          "HOL.Real_Vector_Spaces",
          "HOL-Library.Multiset",
          "HOL-Library.Code_Target_Numeral",
          "HOL-Computational_Algebra.Primes",
          "HOL-Number_Theory.Number_Theory",
          "HOL-Analysis.Analysis"};
}

std::vector<std::string> kb_import_lexicon(const std::vector<kb::KbRecord>& records) {
  std::vector<std::string> names;
  for (const auto& r : records) {
    names.insert(names.end(), r.abs_imports.begin(), r.abs_imports.end());
    if (!r.source.empty()) names.push_back(r.source);
  }
  return dedup(std::move(names));
}

std::string denoise_code(std::string_view input, Language language, const DenoiseOptions& options) {
  std::string code = extract_code_block(input, language);
  auto lexicon = builtin_import_lexicon(language);
  lexicon.insert(lexicon.end(), options.lexicon.begin(), options.lexicon.end());
  lexicon = dedup(std::move(lexicon));
  try {
    if (language == Language::Lean4) {
      code = repair_lean_imports(code, lexicon);
    } else {
      code = repair_isabelle_imports(code, lexicon);
      auto header = parse_theory_header(code);
      code = replace_proofs(code, header ? header->body_pos : 0);
      if (header && !ends_with_end_marker(code)) code = std::string(text::trim_right(code)) + "\nend";
    }
    return wrap_theory(code, language, sanitize_theory_name(options.theory_name));
  } catch (const MalformedWrapper&) {
    return code;
  }
}

Formalization denoise(const Formalization& formalization, const DenoiseOptions& options) {
  return formalization.derive(denoise_code(formalization.code(), formalization.language(), options), Origin::Denoised);
}

}  // namespace autoform::agents
