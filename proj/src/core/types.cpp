#include "autoform/core/types.hpp"

#include "autoform/core/error.hpp"
#include "autoform/core/text.hpp"

namespace autoform {

std::string_view to_string(Language language) {
  switch (language) {
    case Language::IsabelleHOL:
      return "IsabelleHOL";
    case Language::Lean4:
      return "Lean4";
  }
  return "?";
}

Language parse_language(std::string_view text) {
  std::string t = text::to_lower(text::trim(text));
  if (t == "isabelle" || t == "isabelle/hol" || t == "isabellehol" || t == "isabelle_hol") {
    return Language::IsabelleHOL;
  }
  if (t == "lean" || t == "lean4") return Language::Lean4;
  throw ConfigError("unknown formal language '" + std::string(text) + "'");
}

const LanguageTraits& traits(Language language) {
  static const LanguageTraits isabelle{
      "Isabelle/HOL", {"Main"}, "theory {theory_name} imports {imports} begin\n{body}\nend"};
  static const LanguageTraits lean{"Lean4", {}, "{imports}{body}"};
  return language == Language::IsabelleHOL ? isabelle : lean;
}

void InformalStatement::validate() const {
  if (text::trim(text).empty()) throw InvariantViolation("informal statement '" + id + "' has empty text");
}

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::ZeroShot:
      return "ZeroShot";
    case Origin::FewShot:
      return "FewShot";
    case Origin::FormalRefinement:
      return "FormalRefinement";
    case Origin::InformalRefinement:
      return "InformalRefinement";
    case Origin::Denoised:
      return "Denoised";
    case Origin::ImportRetrieval:
      return "ImportRetrieval";
  }
  return "?";
}

Origin parse_origin(std::string_view text) {
  for (Origin o : {Origin::ZeroShot, Origin::FewShot, Origin::FormalRefinement, Origin::InformalRefinement,
                   Origin::Denoised, Origin::ImportRetrieval}) {
    if (to_string(o) == text) return o;
  }
  throw InvariantViolation("unknown origin '" + std::string(text) + "'");
}

bool is_root_origin(Origin origin) { return origin == Origin::ZeroShot || origin == Origin::FewShot; }

Formalization::Formalization(std::string code, Language language, Origin origin,
                             std::shared_ptr<const Formalization> parent)
    : code_(std::move(code)), language_(language), origin_(origin), parent_(std::move(parent)) {
  if (text::trim(code_).empty()) throw InvariantViolation("formalization code is empty");
  if (is_root_origin(origin_) != (parent_ == nullptr)) {
    throw InvariantViolation("origin " + std::string(to_string(origin_)) +
                             (parent_ ? " must not have a parent" : " requires a parent"));
  }
}

Formalization Formalization::root(std::string code, Language language, Origin origin) {
  return Formalization(std::move(code), language, origin, nullptr);
}

Formalization Formalization::derive(std::string code, Origin origin) const {
  return Formalization(std::move(code), language_, origin, std::make_shared<const Formalization>(*this));
}

std::size_t Formalization::depth() const {
  std::size_t d = 0;
  for (const Formalization* p = parent(); p != nullptr; p = p->parent()) ++d;
  return d;
}

void ExemplarPair::validate() const {
  if (text::trim(informal).empty() || text::trim(formal).empty()) {
    throw InvariantViolation("exemplar pair with empty side");
  }
}

void AspectDescription::validate() const {
  if (text::trim(description).empty()) throw InvariantViolation("aspect '" + name + "' has empty description");
}

AspectDescription alignment_faithfulness() {
  return {"AF", "Is the formalized code accurately aligned with the intended semantics of natural language statement?"};
}

AspectDescription formalization_correctness() {
  return {"FC", "Is the formalized code alone valid, nature and well-formed?"};
}

std::optional<AspectDescription> aspect_preset(std::string_view name) {
  std::string n = text::to_lower(name);
  if (n == "af") return alignment_faithfulness();
  if (n == "fc") return formalization_correctness();
  return std::nullopt;
}

std::string_view to_string(CritiqueKind kind) { return kind == CritiqueKind::Hard ? "hard" : "soft"; }

CritiqueResult CritiqueResult::hard(bool passed, std::string detail, bool timed_out) {
  CritiqueResult r;
  r.kind = CritiqueKind::Hard;
  r.verdict = passed;
  r.detail = std::move(detail);
  r.timed_out = timed_out;
  r.validate();
  return r;
}

CritiqueResult CritiqueResult::soft(bool verdict, std::string explanation, AspectDescription aspect) {
  CritiqueResult r;
  r.kind = CritiqueKind::Soft;
  r.verdict = verdict;
  r.detail = std::move(explanation);
  r.aspect = std::move(aspect);
  r.validate();
  return r;
}

CritiqueResult CritiqueResult::soft_unparseable(std::string raw_reply, AspectDescription aspect) {
  CritiqueResult r = soft(false, std::move(raw_reply), std::move(aspect));
  r.unparseable = true;
  return r;
}

void CritiqueResult::validate() const {
  if (kind == CritiqueKind::Soft && !aspect) throw InvariantViolation("soft critique without aspect");
  if (kind == CritiqueKind::Hard && aspect) throw InvariantViolation("hard critique with aspect");
  if (kind == CritiqueKind::Hard && verdict && timed_out) throw InvariantViolation("timed-out critique passed");
}

const Formalization& FormalizationRecord::final_formalization() const {
  if (attempts.empty()) throw InvariantViolation("record '" + statement.id + "' has no attempts");
  return attempts.at(final_index).formalization;
}

std::size_t FormalizationRecord::refinement_count() const {
  std::size_t n = 0;
  for (const auto& a : attempts) {
    Origin o = a.formalization.origin();
    if (o == Origin::FormalRefinement || o == Origin::InformalRefinement) ++n;
  }
  return n;
}

}  // namespace autoform
