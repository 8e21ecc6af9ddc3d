#include <regex>

#include "autoform/agents/agents.hpp"
#include "autoform/core/error.hpp"
#include "autoform/core/text.hpp"
#include "autoform/core/wrap.hpp"

namespace autoform::agents {

namespace {

std::string language_name(Language language) { return std::string(traits(language).display_name); }

std::string call(llm::Backend& backend, const llm::GenerationParams& params, const PromptTemplate& tmpl,
                 const std::map<std::string, std::string>& bindings) {
  auto rendered = tmpl.render(bindings);
  return backend.complete({{llm::Role::System, rendered.system}, {llm::Role::User, rendered.user}}, params);
}

std::string extract(const std::string& reply, Language language) {
  if (text::trim(reply).empty()) throw EmptyGeneration("backend returned an empty reply");
  auto code = extract_code_block(reply, language);
  if (text::trim(code).empty()) throw EmptyGeneration("no formal code in the backend reply");
  return code;
}

}  // namespace

Formalization autoformalize(const InformalStatement& informal, const std::vector<ExemplarPair>& exemplars,
                            Language language, llm::Backend& backend, const llm::GenerationParams& params,
                            const PromptLibrary& prompts) {
  informal.validate();
  for (const auto& e : exemplars) {
    e.validate();
    if (e.language != language) throw InvariantViolation("exemplar language does not match the agent language");
  }
  std::map<std::string, std::string> bindings{{"informal", informal.text}, {"formal_language", language_name(language)}};
  const bool few = !exemplars.empty();
  if (few) bindings["exemplars"] = render_exemplars(exemplars);
  auto reply = call(backend, params, prompts.get(few ? "few_shot" : "zero_shot"), bindings);
  return Formalization::root(extract(reply, language), language, few ? Origin::FewShot : Origin::ZeroShot);
}

std::string checkable_code(const Formalization& formalization, const std::string& theory_name) {
  return wrap_theory(formalization.code(), formalization.language(), sanitize_theory_name(theory_name));
}

CritiqueResult hard_critique(const Formalization& formalization, provers::ProverPool& pool,
                             const std::string& theory_name, std::chrono::milliseconds timeout) {
  std::string code;
  try {
    code = checkable_code(formalization, theory_name);
  } catch (const MalformedWrapper& e) {
    return CritiqueResult::hard(false, e.what());
  }
  provers::CheckRequest req{code, formalization.language(), timeout, sanitize_theory_name(theory_name)};
  try {
    auto outcome = pool.check(req);
    return CritiqueResult::hard(outcome.passed, outcome.passed ? "" : outcome.error_text());
  } catch (const ProverTimeout&) {
    return CritiqueResult::hard(false, "timeout", true);
  }
}

Judgment parse_judgment(std::string_view reply) {
  static const std::regex judgment_re(R"((judge?ment|verdict)\s*[:=]\s*([A-Za-z]*))", std::regex::icase);
  static const std::regex explanation_re(R"(^[\s*#_]*explanation[\s*_]*[:=][\s*_]*)", std::regex::icase);
  auto lines = text::split_lines(reply);
  auto clean = [](std::string_view line) {
    std::string out;
    for (char c : line) {
      if (c != '*' && c != '#' && c != '`' && c != '_') out += c;
    }
    return out;
  };
  for (std::size_t i = lines.size(); i-- > 0;) {
    std::string line = clean(lines[i]);
    std::smatch m;
    if (!std::regex_search(line, m, judgment_re)) continue;
    std::string value = text::to_lower(m[2].str());
    Judgment j;
    if (value == "true" || value == "yes") {
      j.verdict = true;
    } else if (value == "false" || value == "no") {
      j.verdict = false;
    } else {
      throw JudgmentUnparseable("judgment line has no true/false value: " + std::string(text::trim(lines[i])));
    }
    std::vector<std::string> before;
    for (std::size_t k = 0; k < i; ++k) before.emplace_back(lines[k]);
    // Text from the last "Explanation:" label onwards, when present.
    for (std::size_t k = before.size(); k-- > 0;) {
      std::smatch em;
      if (std::regex_search(before[k], em, explanation_re)) {
        std::vector<std::string> rest{em.suffix().str()};
        rest.insert(rest.end(), before.begin() + static_cast<std::ptrdiff_t>(k) + 1, before.end());
        before = std::move(rest);
        break;
      }
    }
    j.explanation = std::string(text::trim(text::join(before, "\n")));
    return j;
  }
  throw JudgmentUnparseable("no judgment line in reply");
}

CritiqueResult soft_critique(const InformalStatement& informal, const Formalization& formalization,
                             const AspectDescription& aspect, llm::Backend& backend,
                             const llm::GenerationParams& params, const PromptLibrary& prompts) {
  aspect.validate();
  auto reply = call(backend, params, prompts.get("judge"),
                    {{"informal", informal.text},
                     {"formal_language", language_name(formalization.language())},
                     {"formalization", formalization.code()},
                     {"aspect_description", aspect.description}});
  auto j = parse_judgment(reply);
  return CritiqueResult::soft(j.verdict, j.explanation, aspect);
}

Formalization formal_refine(const InformalStatement& informal, const Formalization& formalization,
                            std::optional<bool> correctness, const std::string& error_details,
                            llm::Backend& backend, const llm::GenerationParams& params,
                            const PromptLibrary& prompts) {
  if (correctness == false && text::trim(error_details).empty()) {
    throw InvariantViolation("formal refinement of failing code needs error details");
  }
  std::string verdict;
  if (correctness) {
    verdict = *correctness ? "The proof assistant accepted this formalization.\n"
                           : "The proof assistant rejected this formalization.\n";
  }
  auto reply = call(backend, params, prompts.get("formal_refine"),
                    {{"informal", informal.text},
                     {"formal_language", language_name(formalization.language())},
                     {"formalization", formalization.code()},
                     {"correctness", verdict},
                     {"error_details", error_details.empty() ? "(none)" : error_details}});
  return formalization.derive(extract(reply, formalization.language()), Origin::FormalRefinement);
}

Formalization informal_refine(const InformalStatement& informal, const Formalization& formalization,
                              const AspectDescription& aspect, const std::string& aspect_evaluation,
                              llm::Backend& backend, const llm::GenerationParams& params,
                              const PromptLibrary& prompts) {
  aspect.validate();
  if (text::trim(aspect_evaluation).empty()) throw InvariantViolation("informal refinement needs an aspect evaluation");
  auto reply = call(backend, params, prompts.get("informal_refine"),
                    {{"informal", informal.text},
                     {"formal_language", language_name(formalization.language())},
                     {"formalization", formalization.code()},
                     {"aspect_description", aspect.description},
                     {"aspect_evaluation", aspect_evaluation}});
  return formalization.derive(extract(reply, formalization.language()), Origin::InformalRefinement);
}

}  // namespace autoform::agents
