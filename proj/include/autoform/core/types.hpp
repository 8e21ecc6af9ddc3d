#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace autoform {

enum class Language { IsabelleHOL, Lean4 };

std::string_view to_string(Language language);
// Accepts "isabelle", "isabelle/hol", "IsabelleHOL", "lean", "lean4" (case-insensitive).
Language parse_language(std::string_view text);

// Per-language wrapping data. The wrapper template uses the holes
// {theory_name}, {imports} and {body}; each appears at most once.
struct LanguageTraits {
  std::string_view display_name;
  std::vector<std::string> default_imports;
  std::string_view wrapper_template;
};

const LanguageTraits& traits(Language language);

struct InformalStatement {
  std::string id;
  std::string text;
  std::map<std::string, std::string> metadata;

  // Throws InvariantViolation when text is empty.
  void validate() const;
};

enum class Origin { ZeroShot, FewShot, FormalRefinement, InformalRefinement, Denoised, ImportRetrieval };

std::string_view to_string(Origin origin);
Origin parse_origin(std::string_view text);
bool is_root_origin(Origin origin);

// One formal rendering of a statement. Immutable; derived versions keep a
// shared pointer to their parent so lineage is acyclic by construction.
class Formalization {
 public:
  // A first attempt (ZeroShot or FewShot). Throws InvariantViolation for
  // empty code or a non-root origin.
  static Formalization root(std::string code, Language language, Origin origin);

  // A child of this formalization. `origin` must not be a root origin.
  Formalization derive(std::string code, Origin origin) const;

  const std::string& code() const { return code_; }
  Language language() const { return language_; }
  Origin origin() const { return origin_; }
  const Formalization* parent() const { return parent_.get(); }

  // Number of parent links to the root.
  std::size_t depth() const;

 private:
  Formalization(std::string code, Language language, Origin origin,
                std::shared_ptr<const Formalization> parent);

  std::string code_;
  Language language_;
  Origin origin_;
  std::shared_ptr<const Formalization> parent_;
};

struct ExemplarPair {
  std::string informal;
  std::string formal;
  Language language = Language::IsabelleHOL;

  void validate() const;
};

struct AspectDescription {
  std::string name;
  std::string description;

  void validate() const;
  bool operator==(const AspectDescription&) const = default;
};

// Built-in evaluation aspects.
AspectDescription alignment_faithfulness();
AspectDescription formalization_correctness();
// "AF" or "FC" (case-insensitive); nullopt otherwise.
std::optional<AspectDescription> aspect_preset(std::string_view name);

enum class CritiqueKind { Hard, Soft };

std::string_view to_string(CritiqueKind kind);

struct CritiqueResult {
  CritiqueKind kind = CritiqueKind::Hard;
  bool verdict = false;
  std::string detail;
  std::optional<AspectDescription> aspect;
  // Hard critique only: the prover ran out of time. Not a syntax error.
  bool timed_out = false;
  // Soft critique only: no judgment could be parsed; verdict is false.
  bool unparseable = false;
  // 1-based refinement-loop iteration, 0 outside loops.
  int iteration = 0;

  static CritiqueResult hard(bool passed, std::string detail, bool timed_out = false);
  static CritiqueResult soft(bool verdict, std::string explanation, AspectDescription aspect);
  static CritiqueResult soft_unparseable(std::string raw_reply, AspectDescription aspect);

  void validate() const;
};

struct Attempt {
  Formalization formalization;
  std::vector<CritiqueResult> critiques;
};

struct FormalizationRecord {
  InformalStatement statement;
  std::vector<Attempt> attempts;
  std::size_t final_index = 0;
  std::optional<std::string> error;

  bool completed() const { return !error && !attempts.empty(); }
  const Formalization& final_formalization() const;
  std::size_t refinement_count() const;
};

}  // namespace autoform
