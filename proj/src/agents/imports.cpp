#include <map>
#include <regex>
#include <set>

#include "autoform/agents/agents.hpp"
#include "autoform/core/error.hpp"
#include "autoform/core/text.hpp"
#include "autoform/core/wrap.hpp"

namespace autoform::agents {

namespace {

const std::set<std::string, std::less<>> kIsabelleKeywords{
    "theory", "imports", "begin", "end",  "definition", "lemma",  "theorem", "corollary", "proposition",
    "fun",    "primrec", "where", "fixes", "assumes",   "shows",  "obtains", "and",       "for",
    "let",    "in",      "if",    "then", "else",       "case",   "of",      "proof",     "qed",
    "by",     "sorry",   "using", "unfolding", "apply", "done",   "have",    "show",      "hence",
    "thus",   "from",    "with",  "is",   "abbreviation", "datatype", "type_synonym", "record", "locale",
    "context", "notation", "oops", "next", "simp",      "auto",   "blast",   "fastforce", "add"};

const std::set<std::string, std::less<>> kLeanKeywords{
    "theorem", "lemma", "def",  "example", "import", "open",  "namespace", "section", "end",   "variable",
    "fun",     "by",    "sorry", "have",   "show",   "let",   "in",        "if",      "then",  "else",
    "match",   "with",  "at",   "simp",    "intro",  "exact", "ring",      "norm_num", "linarith", "calc",
    "Type",    "Prop",  "where", "do",     "rfl",    "intros",    "omega",   "decide", "noncomputable"};

}  // namespace

std::string import_query(std::string_view code, Language language, std::string_view diagnostics) {
  const auto& keywords = language == Language::Lean4 ? kLeanKeywords : kIsabelleKeywords;
  std::vector<std::string> terms;
  std::size_t i = 0;
  while (i < code.size()) {
    if (!text::is_ident_char(code[i])) {
      ++i;
      continue;
    }
    std::size_t b = i;
    while (i < code.size() && text::is_ident_char(code[i])) ++i;
    std::string word(code.substr(b, i - b));
    if (!keywords.count(word)) terms.push_back(std::move(word));
  }
  static const std::regex undefined_re(R"re(Undefined[A-Za-z ]*:\s*"([^"]+)")re");
  static const std::regex unknown_re(R"re(unknown (?:identifier|constant) '([^']+)')re");
  std::string diag(diagnostics);
  for (const auto* re : {&undefined_re, &unknown_re}) {
    for (std::sregex_iterator it(diag.begin(), diag.end(), *re), end; it != end; ++it) terms.push_back((*it)[1].str());
  }
  return text::join(terms, " ");
}

std::vector<std::string> retrieve_import_names(std::string_view code, Language language,
                                               const kb::Bm25Index& index,
                                               const std::vector<kb::KbRecord>& records, std::size_t top_n,
                                               std::string_view diagnostics) {
  if (top_n < 1) throw InvariantViolation("import retrieval needs top_n >= 1");
  std::map<std::int64_t, const kb::KbRecord*> by_id;
  for (const auto& r : records) by_id[r.id] = &r;
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& hit : kb::query(index, import_query(code, language, diagnostics), top_n)) {
    auto it = by_id.find(hit.doc_id);
    if (it == by_id.end()) continue;
    for (const auto& imp : it->second->abs_imports) {
      if (seen.insert(imp).second) names.push_back(imp);
    }
  }
  return names;
}

Formalization retrieve_imports(const Formalization& formalization, const kb::Bm25Index& index,
                               const std::vector<kb::KbRecord>& records, std::size_t top_n,
                               std::string_view diagnostics, const std::string& theory_name) {
  auto names = retrieve_import_names(formalization.code(), formalization.language(), index, records, top_n,
                                     diagnostics);
  std::string code;
  try {
    code = wrap_theory(formalization.code(), formalization.language(), sanitize_theory_name(theory_name), names);
  } catch (const MalformedWrapper&) {
    code = formalization.code();
  }
  return formalization.derive(code, Origin::ImportRetrieval);
}

}  // namespace autoform::agents
