#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autoform/core/types.hpp"

namespace autoform {

struct WrapOptions {
  // Lean4 only: prepend `import Mathlib` even with no extra imports.
  bool lean_mathlib = false;
};

// Embeds a bare body into the language's theory wrapper with default and
// extra imports (deduplicated, order-preserving). Already-wrapped code is
// returned unchanged except for missing extra imports, which are appended to
// the import list. Idempotent.
//
// Throws MalformedWrapper for an Isabelle theory header without a closing
// `end`, or a header without `begin`.
std::string wrap_theory(std::string_view code, Language language, std::string_view theory_name,
                        const std::vector<std::string>& extra_imports = {}, const WrapOptions& options = {});

// Pulls formal code out of an LLM reply: the first fenced block, else the
// suffix starting at the first language keyword, else the input. Never
// returns an empty string for non-empty input.
std::string extract_code_block(std::string_view llm_output, Language language);

// Statement id -> Isabelle theory name: non-alphanumerics become `_`, a
// leading digit gets a `T_` prefix.
std::string sanitize_theory_name(std::string_view id);

// Parsed `theory NAME imports A "B.C" begin` header. Offsets index into the
// text the header was parsed from.
struct TheoryHeader {
  std::string name;
  std::vector<std::string> imports;  // unquoted
  std::size_t theory_pos = 0;        // offset of the `theory` keyword
  std::size_t insert_pos = 0;        // where new imports are spliced in
  bool has_imports_keyword = false;
  std::size_t begin_pos = 0;  // offset of `begin`
  std::size_t body_pos = 0;   // first offset after `begin`
};

// Offset of a leading `theory` keyword after whitespace and (* comments *),
// or nullopt when the text does not start with one.
std::optional<std::size_t> leading_theory_keyword(std::string_view code);

// Parses the header when the text starts with `theory`. Returns nullopt when
// it does not start with a theory header; throws MalformedWrapper when the
// header has no `begin`.
std::optional<TheoryHeader> parse_theory_header(std::string_view code);

// True when the trimmed text ends with the token `end`.
bool ends_with_end_marker(std::string_view code);

// Renders one import name for an Isabelle imports list (quoted when it is not
// a plain identifier).
std::string render_isabelle_import(std::string_view name);

// Import names declared by code in either language (Isabelle header imports,
// Lean `import` lines).
std::vector<std::string> declared_imports(std::string_view code, Language language);

}  // namespace autoform
