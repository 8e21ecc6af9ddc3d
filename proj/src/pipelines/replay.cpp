#include <map>

#include "autoform/core/error.hpp"
#include "autoform/pipelines/pipeline.hpp"

namespace autoform::pipelines {

namespace {

AspectDescription aspect_from(const nlohmann::json& j) {
  return {j.at("name").get<std::string>(), j.at("description").get<std::string>()};
}

struct ItemState {
  FormalizationRecord record;
  RunLog::ItemEvaluation evaluation;
  std::map<int, bool> hard_by_iteration;
  bool ended = false;
};

}  // namespace

RunLog rebuild(const std::vector<Event>& events) {
  RunLog log;
  std::vector<ItemState> items;
  std::map<std::string, std::size_t> by_id;
  bool started = false, finished = false;
  Language language = Language::IsabelleHOL;

  for (std::size_t n = 0; n < events.size(); ++n) {
    const auto& e = events[n];
    const auto& p = e.payload;
    auto fail = [&](const std::string& what) { throw CorruptLog(what, n + 1); };
    try {
      if (e.kind == "run_start") {
        if (started) fail("second run_start");
        started = true;
        log.run_start = p;
        language = parse_language(p.at("language").get<std::string>());
        continue;
      }
      if (!started) fail("event before run_start");
      if (e.kind == "run_end") {
        finished = true;
        continue;
      }
      if (e.item.empty()) fail("item event without item id");
      if (e.kind == "item_start") {
        if (by_id.count(e.item)) fail("item '" + e.item + "' started twice");
        by_id[e.item] = items.size();
        ItemState s;
        s.record.statement.id = e.item;
        s.record.statement.text = p.at("informal").get<std::string>();
        s.record.statement.metadata = p.at("metadata").get<std::map<std::string, std::string>>();
        auto gt = s.record.statement.metadata.find(kGroundTruthKey);
        if (gt != s.record.statement.metadata.end()) s.evaluation.ground_truth = gt->second;
        items.push_back(std::move(s));
        continue;
      }
      auto it = by_id.find(e.item);
      if (it == by_id.end()) fail("event for unknown item '" + e.item + "'");
      auto& s = items[it->second];
      if (s.ended) fail("event after item_end for '" + e.item + "'");
      auto& attempts = s.record.attempts;
      auto attempt_at = [&](const nlohmann::json& index) -> Attempt& {
        auto i = index.get<std::size_t>();
        if (i >= attempts.size()) fail("critique of unknown attempt");
        return attempts[i];
      };

      if (e.kind == "generation" || e.kind == "tool" || e.kind == "refinement") {
        if (p.at("index").get<std::size_t>() != attempts.size()) fail("attempt index out of sequence");
        auto origin = parse_origin(p.at("origin").get<std::string>());
        auto code = p.at("code").get<std::string>();
        if (attempts.empty()) {
          attempts.push_back({Formalization::root(code, language, origin), {}});
        } else {
          auto parent = p.at("parent").get<std::size_t>();
          if (parent >= attempts.size()) fail("unknown parent attempt");
          attempts.push_back({attempts[parent].formalization.derive(code, origin), {}});
        }
      } else if (e.kind == "hard_critique") {
        auto c = CritiqueResult::hard(p.at("passed").get<bool>(), p.at("detail").get<std::string>(),
                                      p.at("timed_out").get<bool>());
        c.iteration = p.at("iteration").get<int>();
        attempt_at(p.at("attempt")).critiques.push_back(c);
        if (c.iteration > 0) s.hard_by_iteration[c.iteration] = c.verdict;
      } else if (e.kind == "soft_critique") {
        auto aspect = aspect_from(p.at("aspect"));
        auto c = p.at("unparseable").get<bool>()
                     ? CritiqueResult::soft_unparseable(p.at("detail").get<std::string>(), aspect)
                     : CritiqueResult::soft(p.at("verdict").get<bool>(), p.at("detail").get<std::string>(), aspect);
        c.iteration = p.at("iteration").get<int>();
        attempt_at(p.at("attempt")).critiques.push_back(c);
      } else if (e.kind == "llm_call") {
        ++log.llm_calls;
      } else if (e.kind == "item_error") {
        s.record.error = p.at("message").get<std::string>();
      } else if (e.kind == "final_check") {
        s.evaluation.final_check = p.at("passed").get<bool>();
      } else if (e.kind == "final_judge") {
        auto name = p.at("aspect").at("name").get<std::string>();
        bool verdict = p.at("verdict").get<bool>();
        bool unparseable = p.at("unparseable").get<bool>();
        if (name == alignment_faithfulness().name) {
          s.evaluation.af = verdict;
          s.evaluation.af_unparseable = unparseable;
        } else if (name == formalization_correctness().name) {
          s.evaluation.fc = verdict;
          s.evaluation.fc_unparseable = unparseable;
        }
      } else if (e.kind == "item_end") {
        if (p.at("attempts").get<std::size_t>() != attempts.size()) fail("attempt count mismatch at item_end");
        s.record.final_index = attempts.empty() ? 0 : attempts.size() - 1;
        if (p.at("completed").get<bool>() != s.record.completed()) fail("completion flag mismatch at item_end");
        s.ended = true;
      } else {
        fail("unknown event kind '" + e.kind + "'");
      }
    } catch (const nlohmann::json::exception& ex) {
      throw CorruptLog(std::string("bad payload: ") + ex.what(), n + 1);
    } catch (const InvariantViolation& ex) {
      throw CorruptLog(std::string("inconsistent event: ") + ex.what(), n + 1);
    }
  }
  if (!started) throw CorruptLog("empty event log", 1);
  if (!finished) throw CorruptLog("run did not finish (no run_end)", events.size());
  if (items.size() != log.run_start.at("n_items").get<std::size_t>()) {
    throw CorruptLog("item count differs from run_start", events.size());
  }
  for (auto& s : items) {
    if (!s.ended) throw CorruptLog("item '" + s.record.statement.id + "' has no item_end", events.size());
    std::vector<bool> curve;
    for (const auto& [j, v] : s.hard_by_iteration) {
      curve.resize(static_cast<std::size_t>(j), false);
      curve[static_cast<std::size_t>(j - 1)] = v;
    }
    log.hard_by_iteration.push_back(std::move(curve));
    log.records.push_back(std::move(s.record));
    log.evaluations.push_back(std::move(s.evaluation));
  }
  return log;
}

std::vector<metrics::ReportItem> report_items(const RunLog& log) {
  bool checked = log.run_start.value("final_check", false);
  std::vector<metrics::ReportItem> items;
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const auto& r = log.records[i];
    const auto& ev = log.evaluations[i];
    metrics::ReportItem item;
    item.id = r.statement.id;
    item.prediction = r.completed() ? r.final_formalization().code() : "";
    item.reference = ev.ground_truth;
    if (checked) item.passed = r.completed() && ev.final_check.value_or(false);
    item.af = ev.af;
    item.fc = ev.fc;
    item.af_unparseable = ev.af_unparseable;
    item.fc_unparseable = ev.fc_unparseable;
    items.push_back(std::move(item));
  }
  return items;
}

metrics::MetricReport report_from_log(const RunLog& log) { return metrics::compute_report(report_items(log)); }

std::vector<double> iteration_pass_curve(const RunLog& log) {
  std::size_t n = log.run_start.value("n_iterations", 0);
  std::vector<double> curve;
  if (log.records.empty()) return curve;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<bool> passed;
    for (const auto& item : log.hard_by_iteration) passed.push_back(j < item.size() && item[j]);
    curve.push_back(metrics::pass_rate(passed));
  }
  return curve;
}

}  // namespace autoform::pipelines
