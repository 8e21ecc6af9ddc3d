#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "autoform/agents/prompts.hpp"
#include "autoform/core/types.hpp"
#include "autoform/kb/bm25.hpp"
#include "autoform/kb/record.hpp"
#include "autoform/llm/backend.hpp"
#include "autoform/metrics/report.hpp"
#include "autoform/pipelines/events.hpp"
#include "autoform/provers/prover.hpp"

namespace autoform::pipelines {

enum class PipelineKind { Hcfr, Scir, Isr, Walkthrough };

std::string_view to_string(PipelineKind kind);
// "hcfr", "scir", "isr", "walkthrough". Throws ConfigError.
PipelineKind parse_pipeline_kind(std::string_view text);

struct KnowledgeBase {
  std::vector<kb::KbRecord> records;
  kb::Bm25Index index;

  static std::shared_ptr<const KnowledgeBase> load(const std::filesystem::path& file);
};

// Metadata key holding an item's ground-truth formalization.
inline constexpr const char* kGroundTruthKey = "ground_truth";

struct PipelineConfig {
  Language language = Language::IsabelleHOL;
  std::vector<ExemplarPair> exemplars;
  AspectDescription aspect = alignment_faithfulness();
  int n_iterations = 3;

  // Roles: autoformalize (m1), judge (m2), refine (m3). The iterative
  // pipeline refines with the autoformalize backend.
  std::shared_ptr<llm::Backend> autoformalizer;
  std::shared_ptr<llm::Backend> judge;
  std::shared_ptr<llm::Backend> refiner;
  llm::GenerationParams params;
  std::shared_ptr<const agents::PromptLibrary> prompts;

  std::shared_ptr<provers::ProverPool> prover;
  std::chrono::milliseconds check_timeout = provers::kDefaultCheckTimeout;

  // Tool steps applied after generation, before the first hard critique.
  bool denoise = false;
  bool import_retrieval = false;
  std::size_t top_n = 1;
  std::shared_ptr<const KnowledgeBase> kb;

  std::size_t workers = 1;
  // Evaluation passes after the algorithm: hard-check every final
  // formalization, and judge it under each listed aspect.
  bool final_check = true;
  std::vector<AspectDescription> final_judges;

  // Throws ConfigError for a missing binding or invalid value.
  void validate(PipelineKind kind) const;
};

// Every item ran to completion or recorded an error. Throws PipelineFailed
// when the dataset is non-empty and no item completed (after logging).
std::vector<FormalizationRecord> run_pipeline(PipelineKind kind, const std::vector<InformalStatement>& dataset,
                                              const PipelineConfig& config, EventLog& log);

std::vector<FormalizationRecord> run_hcfr(const std::vector<InformalStatement>& dataset,
                                          const PipelineConfig& config, EventLog& log);
std::vector<FormalizationRecord> run_scir(const std::vector<InformalStatement>& dataset,
                                          const PipelineConfig& config, EventLog& log);
std::vector<FormalizationRecord> run_isr(const std::vector<InformalStatement>& dataset,
                                         const PipelineConfig& config, EventLog& log);
// Walkthrough sequence: generate, hard critique, import retrieval and
// re-check on failure, formal refinement on failure, soft critique, informal
// refinement guided by the judge's explanation.
std::vector<FormalizationRecord> run_walkthrough(const std::vector<InformalStatement>& dataset,
                                                 const PipelineConfig& config, EventLog& log);

// Everything a report or a replay needs, rebuilt from events alone.
struct RunLog {
  nlohmann::json run_start;
  std::vector<FormalizationRecord> records;
  struct ItemEvaluation {
    std::optional<bool> final_check;
    std::optional<bool> af;
    std::optional<bool> fc;
    bool af_unparseable = false;
    bool fc_unparseable = false;
    std::optional<std::string> ground_truth;
  };
  std::vector<ItemEvaluation> evaluations;
  // Hard-critique verdicts by item and iteration (iterative pipeline).
  std::vector<std::vector<bool>> hard_by_iteration;
  std::size_t llm_calls = 0;
};

// Throws CorruptLog when events are inconsistent (e.g. missing run_start).
RunLog rebuild(const std::vector<Event>& events);
// Final code, ground truth, final-check verdict and final judgments per item.
std::vector<metrics::ReportItem> report_items(const RunLog& log);
metrics::MetricReport report_from_log(const RunLog& log);

// Pass rate after each iteration: items whose hard critique at iteration j
// passed, over all items. Items without a critique at j count as failing.
std::vector<double> iteration_pass_curve(const RunLog& log);

}  // namespace autoform::pipelines
