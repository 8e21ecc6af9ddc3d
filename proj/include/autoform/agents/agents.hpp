#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "autoform/agents/prompts.hpp"
#include "autoform/core/types.hpp"
#include "autoform/kb/bm25.hpp"
#include "autoform/kb/record.hpp"
#include "autoform/llm/backend.hpp"
#include "autoform/provers/prover.hpp"

namespace autoform::agents {

// Zero-shot when exemplars is empty (origin ZeroShot), else few-shot
// (origin FewShot). One backend call. Throws EmptyGeneration when the reply
// holds no code, InvariantViolation when an exemplar's language differs.
Formalization autoformalize(const InformalStatement& informal, const std::vector<ExemplarPair>& exemplars,
                            Language language, llm::Backend& backend, const llm::GenerationParams& params,
                            const PromptLibrary& prompts = default_prompts());

// Wraps bare bodies with theory_name (sanitized) and default imports, then
// checks. A prover timeout gives verdict false, detail "timeout" and
// timed_out set. Other prover failures propagate.
CritiqueResult hard_critique(const Formalization& formalization, provers::ProverPool& pool,
                             const std::string& theory_name,
                             std::chrono::milliseconds timeout = provers::kDefaultCheckTimeout);

// The code hard_critique submits for a formalization.
std::string checkable_code(const Formalization& formalization, const std::string& theory_name);

struct Judgment {
  bool verdict = false;
  std::string explanation;
};

// The last line matching (judgement|judgment|verdict) followed by ':' or
// '=' decides; its value must be true/yes/false/no (case-insensitive,
// markdown emphasis ignored). The explanation is the text after an
// "Explanation:" label, else the text before the judgment line. Throws
// JudgmentUnparseable otherwise.
Judgment parse_judgment(std::string_view reply);

// Throws JudgmentUnparseable (after one backend call) when the reply carries
// no judgment.
CritiqueResult soft_critique(const InformalStatement& informal, const Formalization& formalization,
                             const AspectDescription& aspect, llm::Backend& backend,
                             const llm::GenerationParams& params, const PromptLibrary& prompts = default_prompts());

// correctness is optional: the single-pass refinement passes the prover
// verdict, the iterative loop passes only the error details.
Formalization formal_refine(const InformalStatement& informal, const Formalization& formalization,
                            std::optional<bool> correctness, const std::string& error_details,
                            llm::Backend& backend, const llm::GenerationParams& params,
                            const PromptLibrary& prompts = default_prompts());

Formalization informal_refine(const InformalStatement& informal, const Formalization& formalization,
                              const AspectDescription& aspect, const std::string& aspect_evaluation,
                              llm::Backend& backend, const llm::GenerationParams& params,
                              const PromptLibrary& prompts = default_prompts());

// Known import names for denoising.
std::vector<std::string> builtin_import_lexicon(Language language);
// abs_imports and sources of every record.
std::vector<std::string> kb_import_lexicon(const std::vector<kb::KbRecord>& records);

struct DenoiseOptions {
  // Extra known import names, added to the built-in lexicon.
  std::vector<std::string> lexicon;
  // Used when the code has no theory header of its own.
  std::string theory_name = "Formalization";
};

// Rule-based cleanup, no LLM call. Never throws for malformed code.
std::string denoise_code(std::string_view code, Language language, const DenoiseOptions& options = {});
Formalization denoise(const Formalization& formalization, const DenoiseOptions& options = {});

// Query text for import retrieval: non-keyword identifiers of the code,
// then names quoted in "Undefined ..." or "unknown identifier" diagnostics.
std::string import_query(std::string_view code, Language language, std::string_view diagnostics = {});

// abs_imports of the top_n records, deduplicated in rank order.
std::vector<std::string> retrieve_import_names(std::string_view code, Language language,
                                               const kb::Bm25Index& index,
                                               const std::vector<kb::KbRecord>& records, std::size_t top_n,
                                               std::string_view diagnostics = {});

// Merges retrieved imports into the wrapper; never removes an import.
Formalization retrieve_imports(const Formalization& formalization, const kb::Bm25Index& index,
                               const std::vector<kb::KbRecord>& records, std::size_t top_n,
                               std::string_view diagnostics = {}, const std::string& theory_name = "Formalization");

}  // namespace autoform::agents
