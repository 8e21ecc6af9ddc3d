#include "autoform/pipelines/pipeline.hpp"

#include <atomic>
#include <set>
#include <thread>

#include "autoform/agents/agents.hpp"
#include "autoform/core/error.hpp"
#include "autoform/core/text.hpp"
#include "autoform/core/wrap.hpp"
#include "autoform/llm/scripted.hpp"

namespace autoform::pipelines {

std::string_view to_string(PipelineKind kind) {
  switch (kind) {
    case PipelineKind::Hcfr:
      return "hcfr";
    case PipelineKind::Scir:
      return "scir";
    case PipelineKind::Isr:
      return "isr";
    case PipelineKind::Walkthrough:
      return "walkthrough";
  }
  return "?";
}

PipelineKind parse_pipeline_kind(std::string_view text) {
  auto t = text::to_lower(text);
  if (t == "hcfr") return PipelineKind::Hcfr;
  if (t == "scir") return PipelineKind::Scir;
  if (t == "isr") return PipelineKind::Isr;
  if (t == "walkthrough") return PipelineKind::Walkthrough;
  throw ConfigError("unknown pipeline '" + std::string(text) + "' (expected hcfr, scir, isr or walkthrough)");
}

std::shared_ptr<const KnowledgeBase> KnowledgeBase::load(const std::filesystem::path& file) {
  auto kb = std::make_shared<KnowledgeBase>();
  kb->records = kb::load_kb(file);
  kb->index = kb::build_index(kb->records);
  return kb;
}

void PipelineConfig::validate(PipelineKind kind) const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(autoformalizer != nullptr, "no backend bound to role 'autoformalize'");
  bool needs_prover = kind != PipelineKind::Scir;
  bool needs_judge = kind != PipelineKind::Hcfr || !final_judges.empty();
  bool needs_refiner = kind != PipelineKind::Isr;
  require(!needs_prover || prover != nullptr, "pipeline '" + std::string(to_string(kind)) + "' needs a prover");
  require(!needs_judge || judge != nullptr, "no backend bound to role 'judge'");
  require(!needs_refiner || refiner != nullptr, "no backend bound to role 'refine'");
  require(!final_check || !needs_prover || prover != nullptr, "final check needs a prover");
  require(kind != PipelineKind::Isr || n_iterations >= 1, "n_iterations must be >= 1");
  require(top_n >= 1, "top_n must be >= 1");
  require(workers >= 1, "workers must be >= 1");
  require(check_timeout.count() > 0, "timeout must be positive");
  require(!import_retrieval || kb != nullptr, "import retrieval needs a knowledge base");
  require(kind != PipelineKind::Walkthrough || kb != nullptr, "the walkthrough needs a knowledge base");
  require(!prover || prover->language() == language, "prover language differs from pipeline language");
  for (const auto* b : {autoformalizer.get(), judge.get(), refiner.get()}) {
    auto* scripted = dynamic_cast<const llm::ScriptedBackend*>(b);
    require(!(scripted && scripted->has_ordered_entries() && workers > 1),
            "ordered scripted backend '" + (scripted ? scripted->id() : "") + "' requires workers = 1");
  }
  aspect.validate();
  for (const auto& e : exemplars) {
    e.validate();
    require(e.language == language, "exemplar language differs from pipeline language");
  }
  params.validate();
}

namespace {

nlohmann::json aspect_json(const AspectDescription& a) { return {{"name", a.name}, {"description", a.description}}; }

// State of one item while an algorithm runs on it.
class ItemRun {
 public:
  ItemRun(const InformalStatement& statement, const PipelineConfig& config, EventLog::ItemLog& log)
      : config_(config), log_(log), theory_name_(sanitize_theory_name(statement.id)) {
    record.statement = statement;
  }

  FormalizationRecord record;

  const Formalization& current() const { return record.attempts.back().formalization; }

  void generate() {
    auto& backend = *config_.autoformalizer;
    llm_call("autoformalize", "autoformalize", backend);
    add_attempt(agents::autoformalize(record.statement, config_.exemplars, config_.language, backend,
                                      config_.params, prompts()),
                "generation");
  }

  void tools() {
    if (config_.denoise) {
      agents::DenoiseOptions options{{}, theory_name_};
      if (config_.kb) options.lexicon = agents::kb_import_lexicon(config_.kb->records);
      add_attempt(agents::denoise(current(), options), "tool", "denoise");
    }
    if (config_.import_retrieval) retrieve_imports("");
  }

  void retrieve_imports(const std::string& diagnostics) {
    add_attempt(agents::retrieve_imports(current(), config_.kb->index, config_.kb->records, config_.top_n,
                                         diagnostics, theory_name_),
                "tool", "import_retrieval");
  }

  CritiqueResult hard(int iteration) {
    auto c = agents::hard_critique(current(), *config_.prover, theory_name_, config_.check_timeout);
    c.iteration = iteration;
    log_.emit("hard_critique", {{"attempt", current_index()},
                                {"passed", c.verdict},
                                {"detail", c.detail},
                                {"timed_out", c.timed_out},
                                {"iteration", iteration}});
    record.attempts.back().critiques.push_back(c);
    return c;
  }

  CritiqueResult soft(int iteration) {
    auto c = judge(config_.aspect, "judge");
    c.iteration = iteration;
    log_.emit("soft_critique", {{"attempt", current_index()},
                                {"verdict", c.verdict},
                                {"detail", c.detail},
                                {"aspect", aspect_json(config_.aspect)},
                                {"unparseable", c.unparseable},
                                {"iteration", iteration}});
    record.attempts.back().critiques.push_back(c);
    return c;
  }

  void formal_refine(const char* role, llm::Backend& backend, std::optional<bool> correctness,
                     const std::string& details) {
    llm_call(role, "formal_refine", backend);
    add_attempt(agents::formal_refine(record.statement, current(), correctness, details, backend, config_.params,
                                      prompts()),
                "refinement");
  }

  void informal_refine(const char* role, llm::Backend& backend, const std::string& evaluation) {
    llm_call(role, "informal_refine", backend);
    auto text = text::trim(evaluation).empty() ? std::string("(no explanation given)") : evaluation;
    add_attempt(agents::informal_refine(record.statement, current(), config_.aspect, text, backend, config_.params,
                                        prompts()),
                "refinement");
  }

  void final_evaluation() {
    auto attempt = current_index();
    if (config_.final_check && config_.prover) {
      nlohmann::json payload{{"attempt", attempt}};
      try {
        auto c = agents::hard_critique(current(), *config_.prover, theory_name_, config_.check_timeout);
        payload.update({{"passed", c.verdict}, {"detail", c.detail}, {"timed_out", c.timed_out}});
      } catch (const Error& e) {
        payload.update({{"passed", false}, {"detail", ""}, {"timed_out", false}, {"error", e.what()}});
      }
      log_.emit("final_check", std::move(payload));
    }
    for (const auto& aspect : config_.final_judges) {
      nlohmann::json payload{{"attempt", attempt}, {"aspect", aspect_json(aspect)}};
      try {
        auto c = judge(aspect, "final_judge");
        payload.update({{"verdict", c.verdict}, {"unparseable", c.unparseable}, {"detail", c.detail}});
      } catch (const Error& e) {
        payload.update({{"verdict", false}, {"unparseable", false}, {"detail", ""}, {"error", e.what()}});
      }
      log_.emit("final_judge", std::move(payload));
    }
  }

 private:
  const agents::PromptLibrary& prompts() const {
    return config_.prompts ? *config_.prompts : agents::default_prompts();
  }

  std::size_t current_index() const { return record.attempts.size() - 1; }

  void llm_call(const char* role, const char* agent, const llm::Backend& backend) {
    log_.emit("llm_call", {{"role", role}, {"agent", agent}, {"backend", backend.id()}});
  }

  CritiqueResult judge(const AspectDescription& aspect, const char* agent) {
    auto& backend = *config_.judge;
    llm_call("judge", agent, backend);
    try {
      return agents::soft_critique(record.statement, current(), aspect, backend, config_.params, prompts());
    } catch (const JudgmentUnparseable& e) {
      return CritiqueResult::soft_unparseable(e.what(), aspect);
    }
  }

  void add_attempt(Formalization f, const char* kind, const char* tool = nullptr) {
    nlohmann::json payload{{"index", record.attempts.size()},
                           {"parent", record.attempts.empty() ? nlohmann::json(nullptr)
                                                              : nlohmann::json(current_index())},
                           {"origin", std::string(to_string(f.origin()))},
                           {"code", f.code()}};
    if (tool) payload["tool"] = tool;
    record.attempts.push_back(Attempt{std::move(f), {}});
    record.final_index = current_index();
    log_.emit(kind, std::move(payload));
  }

  const PipelineConfig& config_;
  EventLog::ItemLog& log_;
  std::string theory_name_;
};

nlohmann::json run_start_payload(PipelineKind kind, const PipelineConfig& config, std::size_t n_items) {
  auto id = [](const std::shared_ptr<llm::Backend>& b) { return b ? nlohmann::json(b->id()) : nlohmann::json(); };
  nlohmann::json judges = nlohmann::json::array();
  for (const auto& a : config.final_judges) judges.push_back(aspect_json(a));
  nlohmann::json p{{"pipeline", std::string(to_string(kind))},
                   {"language", std::string(to_string(config.language))},
                   {"n_items", n_items},
                   {"aspect", aspect_json(config.aspect)},
                   {"exemplars", config.exemplars.size()},
                   {"roles", {{"autoformalize", id(config.autoformalizer)},
                              {"judge", id(config.judge)},
                              {"refine", id(config.refiner)}}},
                   {"prover", config.prover != nullptr},
                   {"denoise", config.denoise},
                   {"import_retrieval", config.import_retrieval},
                   {"top_n", config.top_n},
                   {"final_check", config.final_check && config.prover != nullptr},
                   {"final_judges", judges}};
  if (kind == PipelineKind::Isr) p["n_iterations"] = config.n_iterations;
  return p;
}

template <class Algorithm>
std::vector<FormalizationRecord> run_items(PipelineKind kind, const std::vector<InformalStatement>& dataset,
                                           const PipelineConfig& config, EventLog& log, Algorithm algorithm) {
  config.validate(kind);
  std::set<std::string> ids;
  for (const auto& s : dataset) {
    if (!ids.insert(s.id).second) throw DuplicateId("duplicate item id '" + s.id + "'");
  }
  log.run_event("run_start", run_start_payload(kind, config, dataset.size()));
  log.expect_items(dataset.size());

  std::vector<FormalizationRecord> records(dataset.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < dataset.size(); i = next++) {
      const auto& statement = dataset[i];
      auto item_log = log.item(statement.id);
      nlohmann::json metadata(statement.metadata);
      item_log.emit("item_start", {{"index", i}, {"informal", statement.text}, {"metadata", metadata}});
      ItemRun run(statement, config, item_log);
      try {
        statement.validate();
        algorithm(run);
      } catch (const std::exception& e) {
        run.record.error = e.what();
        item_log.emit("item_error", {{"message", e.what()}});
      }
      if (run.record.completed()) run.final_evaluation();
      item_log.emit("item_end", {{"completed", run.record.completed()},
                                 {"attempts", run.record.attempts.size()},
                                 {"final_attempt", run.record.final_index}});
      records[i] = std::move(run.record);
      log.commit(i, std::move(item_log));
    }
  };
  std::size_t n_workers = std::min(config.workers, std::max<std::size_t>(dataset.size(), 1));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < n_workers; ++t) threads.emplace_back(worker);
  }

  std::size_t completed = 0;
  for (const auto& r : records) completed += r.completed() ? 1 : 0;
  log.run_event("run_end", {{"completed", completed}, {"failed", records.size() - completed}});
  if (!dataset.empty() && completed == 0) {
    throw PipelineFailed("no item completed (" + std::to_string(dataset.size()) + " failed)");
  }
  return records;
}

}  // namespace

std::vector<FormalizationRecord> run_hcfr(const std::vector<InformalStatement>& dataset,
                                          const PipelineConfig& config, EventLog& log) {
  return run_items(PipelineKind::Hcfr, dataset, config, log, [&](ItemRun& run) {
    run.generate();
    run.tools();
    auto c = run.hard(0);
    if (!c.verdict && !c.timed_out) run.formal_refine("refine", *config.refiner, false, c.detail);
  });
}

std::vector<FormalizationRecord> run_scir(const std::vector<InformalStatement>& dataset,
                                          const PipelineConfig& config, EventLog& log) {
  return run_items(PipelineKind::Scir, dataset, config, log, [&](ItemRun& run) {
    run.generate();
    auto s = run.soft(0);
    if (!s.verdict && !s.unparseable) run.informal_refine("refine", *config.refiner, s.detail);
  });
}

std::vector<FormalizationRecord> run_isr(const std::vector<InformalStatement>& dataset,
                                         const PipelineConfig& config, EventLog& log) {
  return run_items(PipelineKind::Isr, dataset, config, log, [&](ItemRun& run) {
    run.generate();
    run.tools();
    for (int j = 1; j <= config.n_iterations; ++j) {
      auto c = run.hard(j);
      if (c.timed_out) continue;
      if (!c.verdict) {
        run.formal_refine("autoformalize", *config.autoformalizer, std::nullopt, c.detail);
        continue;
      }
      auto s = run.soft(j);
      if (!s.verdict && !s.unparseable) run.informal_refine("autoformalize", *config.autoformalizer, s.detail);
    }
  });
}

std::vector<FormalizationRecord> run_walkthrough(const std::vector<InformalStatement>& dataset,
                                                 const PipelineConfig& config, EventLog& log) {
  return run_items(PipelineKind::Walkthrough, dataset, config, log, [&](ItemRun& run) {
    run.generate();
    if (config.denoise) run.tools();
    auto c = run.hard(0);
    if (!c.verdict && !c.timed_out) {
      run.retrieve_imports(c.detail);
      c = run.hard(0);
    }
    if (!c.verdict && !c.timed_out) run.formal_refine("refine", *config.refiner, false, c.detail);
    auto s = run.soft(0);
    if (!s.unparseable) run.informal_refine("refine", *config.refiner, s.detail);
  });
}

std::vector<FormalizationRecord> run_pipeline(PipelineKind kind, const std::vector<InformalStatement>& dataset,
                                              const PipelineConfig& config, EventLog& log) {
  switch (kind) {
    case PipelineKind::Hcfr:
      return run_hcfr(dataset, config, log);
    case PipelineKind::Scir:
      return run_scir(dataset, config, log);
    case PipelineKind::Isr:
      return run_isr(dataset, config, log);
    case PipelineKind::Walkthrough:
      return run_walkthrough(dataset, config, log);
  }
  throw InvariantViolation("unknown pipeline kind");
}

}  // namespace autoform::pipelines
