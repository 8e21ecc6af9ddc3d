#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "autoform/agents/prompts.hpp"
#include "autoform/core/types.hpp"
#include "autoform/llm/backend.hpp"
#include "autoform/metrics/metrics.hpp"

namespace autoform::metrics {

struct ItemScores {
  double bleu4 = 0;
  double chrf = 0;
  double ruby = 0;
};

struct CorpusScores {
  std::vector<ItemScores> items;
  // Pooled n-gram statistics for BLEU-4 and chrF; RUBY is the item mean.
  double bleu4 = 0;
  double chrf = 0;
  double ruby = 0;
};

// candidates[i] is scored against references[i]. Both kernels return
// identical results; the parallel one uses OpenMP over items.
CorpusScores score_corpus_serial(const std::vector<std::string>& candidates,
                                 const std::vector<std::string>& references);
CorpusScores score_corpus_parallel(const std::vector<std::string>& candidates,
                                   const std::vector<std::string>& references);

struct JudgedItem {
  std::string id;
  bool verdict = false;
  bool unparseable = false;
  std::string explanation;
};

struct JudgeAggregate {
  double percentage = 0;
  std::vector<JudgedItem> items;
  std::size_t unparseable = 0;
};

// Judges every completed record's final formalization. Unparseable replies
// count as false and are flagged. Throws EmptyInput without completed records.
JudgeAggregate judge_aggregate(const std::vector<FormalizationRecord>& records, const AspectDescription& aspect,
                               llm::Backend& backend, const llm::GenerationParams& params,
                               const agents::PromptLibrary& prompts = agents::default_prompts());

struct ReportItem {
  std::string id;
  std::string prediction;
  std::optional<std::string> reference;
  std::optional<bool> passed;
  std::optional<bool> af;
  std::optional<bool> fc;
  bool af_unparseable = false;
  bool fc_unparseable = false;
};

struct ItemMetrics {
  std::string id;
  std::optional<bool> passed;
  std::optional<double> bleu4;
  std::optional<double> chrf;
  std::optional<double> ruby;
  std::optional<bool> af;
  std::optional<bool> fc;
  bool judge_unparseable = false;

  bool operator==(const ItemMetrics&) const = default;
};

struct MetricReport {
  // Absent when no item has the corresponding input.
  std::optional<double> bleu4;
  std::optional<double> chrf;
  std::optional<double> ruby;
  std::optional<double> pass_rate;
  std::optional<double> af_pct;
  std::optional<double> fc_pct;
  std::size_t n_items = 0;
  std::size_t judge_unparseable = 0;
  std::string ruby_level;
  std::vector<ItemMetrics> items;

  bool operator==(const MetricReport&) const = default;
};

// Reference metrics over items with a reference, pass rate over items with a
// pass flag, AF/FC over judged items.
MetricReport compute_report(const std::vector<ReportItem>& items, bool parallel = true);

nlohmann::json to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& j);
// Stable serialization: to_json dumped with 2-space indent and a trailing newline.
std::string serialize(const MetricReport& report);

// Plain-text table with the columns BLEU-4, ChrF, RUBY, Pass (and AF/FC when present).
std::string summary_table(const MetricReport& report, const std::string& label);

}  // namespace autoform::metrics
