#include "autoform/metrics/report.hpp"

#include <omp.h>

#include <cstdio>
#include <sstream>

#include "autoform/agents/agents.hpp"
#include "autoform/core/error.hpp"

namespace autoform::metrics {

namespace {

struct ItemStats {
  BleuStats bleu;
  ChrfStats chrf;
  ItemScores scores;
};

ItemStats score_item(const std::string& candidate, const std::string& reference) {
  ItemStats s;
  s.bleu = bleu_stats(tokenize_code(candidate), {tokenize_code(reference)});
  s.chrf = chrf_stats(candidate, reference);
  s.scores = {bleu_from_stats(s.bleu), chrf_from_stats(s.chrf), ruby(candidate, reference)};
  return s;
}

CorpusScores pool(const std::vector<ItemStats>& stats) {
  CorpusScores out;
  BleuStats bleu;
  ChrfStats chr;
  double ruby_sum = 0;
  for (const auto& s : stats) {
    bleu += s.bleu;
    chr += s.chrf;
    ruby_sum += s.scores.ruby;
    out.items.push_back(s.scores);
  }
  out.bleu4 = bleu_from_stats(bleu);
  out.chrf = chrf_from_stats(chr);
  out.ruby = stats.empty() ? 0.0 : ruby_sum / static_cast<double>(stats.size());
  return out;
}

void check_sizes(const std::vector<std::string>& candidates, const std::vector<std::string>& references) {
  if (candidates.size() != references.size()) throw InvariantViolation("candidate and reference counts differ");
  if (candidates.empty()) throw EmptyInput("no items to score");
}

template <class T>
nlohmann::json opt(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
std::optional<T> get_opt(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

std::string cell(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

}  // namespace

CorpusScores score_corpus_serial(const std::vector<std::string>& candidates,
                                 const std::vector<std::string>& references) {
  check_sizes(candidates, references);
  std::vector<ItemStats> stats;
  stats.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) stats.push_back(score_item(candidates[i], references[i]));
  return pool(stats);
}

CorpusScores score_corpus_parallel(const std::vector<std::string>& candidates,
                                   const std::vector<std::string>& references) {
  check_sizes(candidates, references);
  std::vector<ItemStats> stats(candidates.size());
  const auto n = static_cast<std::int64_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < n; ++i) {
    stats[static_cast<std::size_t>(i)] =
        score_item(candidates[static_cast<std::size_t>(i)], references[static_cast<std::size_t>(i)]);
  }
  return pool(stats);
}

JudgeAggregate judge_aggregate(const std::vector<FormalizationRecord>& records, const AspectDescription& aspect,
                               llm::Backend& backend, const llm::GenerationParams& params,
                               const agents::PromptLibrary& prompts) {
  JudgeAggregate out;
  std::size_t passed = 0;
  for (const auto& record : records) {
    if (!record.completed()) continue;
    JudgedItem item{record.statement.id, false, false, {}};
    try {
      auto c = agents::soft_critique(record.statement, record.final_formalization(), aspect, backend, params, prompts);
      item.verdict = c.verdict;
      item.explanation = c.detail;
    } catch (const JudgmentUnparseable& e) {
      item.unparseable = true;
      item.explanation = e.what();
      ++out.unparseable;
    }
    passed += item.verdict ? 1 : 0;
    out.items.push_back(std::move(item));
  }
  if (out.items.empty()) throw EmptyInput("no completed records to judge");
  out.percentage = round2(100.0 * static_cast<double>(passed) / static_cast<double>(out.items.size()));
  return out;
}

MetricReport compute_report(const std::vector<ReportItem>& items, bool parallel) {
  MetricReport report;
  report.n_items = items.size();
  report.ruby_level = RubyChain::standard().levels().back().name;
  std::vector<std::string> candidates, references;
  std::vector<std::size_t> with_reference;
  std::vector<bool> passes;
  std::vector<bool> af, fc;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    ItemMetrics m;
    m.id = item.id;
    m.passed = item.passed;
    m.af = item.af;
    m.fc = item.fc;
    m.judge_unparseable = item.af_unparseable || item.fc_unparseable;
    report.judge_unparseable += (item.af_unparseable ? 1 : 0) + (item.fc_unparseable ? 1 : 0);
    if (item.reference) {
      candidates.push_back(item.prediction);
      references.push_back(*item.reference);
      with_reference.push_back(i);
    }
    if (item.passed) passes.push_back(*item.passed);
    if (item.af) af.push_back(*item.af);
    if (item.fc) fc.push_back(*item.fc);
    report.items.push_back(std::move(m));
  }
  if (!candidates.empty()) {
    auto scores = parallel ? score_corpus_parallel(candidates, references) : score_corpus_serial(candidates, references);
    for (std::size_t k = 0; k < with_reference.size(); ++k) {
      auto& m = report.items[with_reference[k]];
      m.bleu4 = round2(scores.items[k].bleu4);
      m.chrf = round2(scores.items[k].chrf);
      m.ruby = round2(scores.items[k].ruby);
    }
    report.bleu4 = round2(scores.bleu4);
    report.chrf = round2(scores.chrf);
    report.ruby = round2(scores.ruby);
  }
  if (!passes.empty()) report.pass_rate = pass_rate(passes);
  if (!af.empty()) report.af_pct = pass_rate(af);
  if (!fc.empty()) report.fc_pct = pass_rate(fc);
  return report;
}

nlohmann::json to_json(const MetricReport& report) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& m : report.items) {
    items.push_back({{"id", m.id},
                     {"pass", opt(m.passed)},
                     {"bleu4", opt(m.bleu4)},
                     {"chrf", opt(m.chrf)},
                     {"ruby", opt(m.ruby)},
                     {"af", opt(m.af)},
                     {"fc", opt(m.fc)},
                     {"judge_unparseable", m.judge_unparseable}});
  }
  return {{"corpus",
           {{"bleu4", opt(report.bleu4)},
            {"chrf", opt(report.chrf)},
            {"ruby", opt(report.ruby)},
            {"pass_rate", opt(report.pass_rate)},
            {"af_pct", opt(report.af_pct)},
            {"fc_pct", opt(report.fc_pct)},
            {"n_items", report.n_items}}},
          {"items", items},
          {"notes",
           {{"ruby_level", report.ruby_level},
            {"judge_unparseable", report.judge_unparseable},
            {"bleu", "corpus BLEU-4, add-one smoothing on zero-match orders, operator-aware tokens"},
            {"chrf", "corpus chrF, n=1..6, beta=2, whitespace removed"}}}};
}

MetricReport report_from_json(const nlohmann::json& j) {
  try {
    MetricReport r;
    const auto& c = j.at("corpus");
    r.bleu4 = get_opt<double>(c, "bleu4");
    r.chrf = get_opt<double>(c, "chrf");
    r.ruby = get_opt<double>(c, "ruby");
    r.pass_rate = get_opt<double>(c, "pass_rate");
    r.af_pct = get_opt<double>(c, "af_pct");
    r.fc_pct = get_opt<double>(c, "fc_pct");
    r.n_items = c.at("n_items").get<std::size_t>();
    r.ruby_level = j.at("notes").at("ruby_level").get<std::string>();
    r.judge_unparseable = j.at("notes").at("judge_unparseable").get<std::size_t>();
    for (const auto& it : j.at("items")) {
      ItemMetrics m;
      m.id = it.at("id").get<std::string>();
      m.passed = get_opt<bool>(it, "pass");
      m.bleu4 = get_opt<double>(it, "bleu4");
      m.chrf = get_opt<double>(it, "chrf");
      m.ruby = get_opt<double>(it, "ruby");
      m.af = get_opt<bool>(it, "af");
      m.fc = get_opt<bool>(it, "fc");
      m.judge_unparseable = it.value("judge_unparseable", false);
      r.items.push_back(std::move(m));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed metric report: ") + e.what());
  }
}

std::string serialize(const MetricReport& report) { return to_json(report).dump(2) + "\n"; }

std::string summary_table(const MetricReport& report, const std::string& label) {
  bool judged = report.af_pct || report.fc_pct;
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-24s %8s %8s %8s %8s", "System", "BLEU-4", "ChrF", "RUBY", "Pass");
  out << buf;
  if (judged) {
    std::snprintf(buf, sizeof buf, " %8s %8s", "AF", "FC");
    out << buf;
  }
  out << "\n";
  std::snprintf(buf, sizeof buf, "%-24s %8s %8s %8s %8s", label.c_str(), cell(report.bleu4).c_str(),
                cell(report.chrf).c_str(), cell(report.ruby).c_str(), cell(report.pass_rate).c_str());
  out << buf;
  if (judged) {
    std::snprintf(buf, sizeof buf, " %8s %8s", cell(report.af_pct).c_str(), cell(report.fc_pct).c_str());
    out << buf;
  }
  out << "\n" << report.n_items << " items; RUBY level: " << report.ruby_level;
  if (report.judge_unparseable > 0) out << "; unparseable judgments: " << report.judge_unparseable;
  out << "\n";
  return out.str();
}

}  // namespace autoform::metrics
