#include "autoform/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>

#include "autoform/agents/agents.hpp"
#include "autoform/cli/dataset.hpp"
#include "autoform/cli/run_config.hpp"
#include "autoform/core/error.hpp"
#include "autoform/core/text.hpp"
#include "autoform/core/wrap.hpp"
#include "autoform/metrics/report.hpp"
#include "autoform/pipelines/pipeline.hpp"

namespace autoform::cli {

namespace fs = std::filesystem;

namespace {

// A usage problem detected after argument parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct RunArgs {
  std::string pipeline, dataset, config, out, language, aspect;
  std::optional<std::size_t> workers, top_n;
  std::optional<double> timeout;
  std::optional<std::string> clock;
  bool force = false;
};

Overrides overrides_from(const std::string& language, std::optional<std::size_t> workers,
                         std::optional<double> timeout, std::optional<std::size_t> top_n, const std::string& aspect) {
  Overrides o;
  if (!language.empty()) o.language = parse_language(language);
  o.workers = workers;
  o.timeout_s = timeout;
  o.top_n = top_n;
  if (!aspect.empty()) o.aspect = aspect;
  return o;
}

int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  auto kind = pipelines::parse_pipeline_kind(a.pipeline);
  fs::path dir(a.out);
  if (fs::exists(dir) && !fs::is_empty(dir)) {
    if (!a.force) throw UsageError("output directory " + dir.string() + " is not empty (use --force)");
    for (const auto* name : {"config.json", "events.jsonl", "exchanges.jsonl", "cache.jsonl", "report.json"}) {
      fs::remove(dir / name);
    }
  }
  fs::create_directories(dir);
  auto config = load_run_config(a.config, overrides_from(a.language, a.workers, a.timeout, a.top_n, a.aspect),
                                RunFiles{dir / "exchanges.jsonl", dir / "cache.jsonl"});
  for (const auto& w : config.warnings) err << "warning: " << w << "\n";
  auto entries = load_dataset(a.dataset, config.pipeline.language);
  auto clock_name = a.clock.value_or(config.clock);
  if (clock_name != "system" && clock_name != "logical") throw UsageError("--clock must be system or logical");

  auto snapshot = config.snapshot;
  snapshot["run"] = {{"pipeline", std::string(pipelines::to_string(kind))},
                     {"dataset", fs::absolute(a.dataset).string()},
                     {"config", fs::absolute(a.config).string()},
                     {"clock", clock_name}};
  write_file(dir / "config.json", snapshot.dump(2) + "\n");

  pipelines::EventLog log(clock_name == "logical" ? pipelines::logical_clock() : pipelines::system_clock(),
                          dir / "events.jsonl");
  int code = kExitOk;
  try {
    pipelines::run_pipeline(kind, to_statements(entries), config.pipeline, log);
  } catch (const PipelineFailed& e) {
    err << "pipeline failed: " << e.what() << "\n";
    code = kExitFailed;
  }
  auto run = pipelines::rebuild(log.events());
  auto report = pipelines::report_from_log(run);
  write_file(dir / "report.json", metrics::serialize(report));
  out << metrics::summary_table(report, std::string(pipelines::to_string(kind)));
  std::size_t completed = 0;
  for (const auto& r : run.records) completed += r.completed() ? 1 : 0;
  out << completed << " of " << run.records.size() << " items completed; run directory " << dir.string() << "\n";
  if (completed == 0) {
    if (entries.empty()) err << "dataset is empty\n";
    code = kExitFailed;
  }
  return code;
}

struct EvalArgs {
  std::string run, predictions, references, config, language, out;
  std::vector<std::string> judges;
  bool fresh_check = false;
  bool no_reference = false;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  if (a.run.empty() == a.predictions.empty()) throw UsageError("give either --run or --predictions");
  if (!a.predictions.empty() && a.references.empty()) throw UsageError("--predictions needs --references");
  if ((a.fresh_check || !a.judges.empty()) && a.config.empty()) {
    throw UsageError("--fresh-check and --judge need --config");
  }
  std::optional<LoadedConfig> config;
  if (!a.config.empty()) {
    config = load_run_config(a.config, overrides_from(a.language, std::nullopt, std::nullopt, std::nullopt, ""));
  }
  Language language = !a.language.empty() ? parse_language(a.language)
                      : config            ? config->pipeline.language
                                          : Language::IsabelleHOL;

  std::vector<metrics::ReportItem> items;
  std::vector<FormalizationRecord> records;
  if (!a.run.empty()) {
    auto run = pipelines::rebuild(pipelines::read_event_log(fs::path(a.run) / "events.jsonl"));
    items = pipelines::report_items(run);
    records = run.records;
    language = parse_language(run.run_start.at("language").get<std::string>());
  } else {
    auto refs = load_dataset(a.references, language);
    std::map<std::string, std::string> predicted;
    std::size_t line = 0;
    auto content = read_file(a.predictions);
    for (const auto& raw : text::split_lines(content)) {
      ++line;
      if (text::trim(raw).empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(raw);
        predicted[j.at("id").get<std::string>()] = j.at("formal").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("prediction: ") + e.what(), line);
      }
    }
    for (const auto& r : refs) {
      metrics::ReportItem item;
      item.id = r.id;
      item.reference = r.ground_truth;
      FormalizationRecord rec;
      rec.statement = {r.id, r.informal, {}};
      auto it = predicted.find(r.id);
      if (it != predicted.end() && !text::trim(it->second).empty()) {
        item.prediction = it->second;
        rec.attempts.push_back({Formalization::root(it->second, language, Origin::ZeroShot), {}});
      } else {
        rec.error = "no prediction";
      }
      items.push_back(std::move(item));
      records.push_back(std::move(rec));
    }
  }

  if (a.no_reference) {
    for (auto& item : items) item.reference.reset();
  } else {
    for (const auto& item : items) {
      if (!item.reference) throw MissingGroundTruth("item '" + item.id + "' has no ground truth (use --no-reference)");
    }
  }

  if (a.fresh_check) {
    if (!config->pipeline.prover) throw UsageError("--fresh-check needs a prover in the config");
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!records[i].completed()) {
        items[i].passed = false;
        continue;
      }
      auto c = agents::hard_critique(records[i].final_formalization(), *config->pipeline.prover,
                                     sanitize_theory_name(items[i].id), config->pipeline.check_timeout);
      items[i].passed = c.verdict;
    }
  }

  for (const auto& spec : a.judges) {
    auto aspect = resolve_aspect(spec);
    bool af = aspect.name == alignment_faithfulness().name;
    if (!af && aspect.name != formalization_correctness().name) {
      throw UsageError("--judge accepts the AF and FC aspects");
    }
    if (!config->pipeline.judge) throw UsageError("--judge needs a judge role in the config");
    auto prompts = config->pipeline.prompts ? *config->pipeline.prompts : agents::default_prompts();
    auto agg = metrics::judge_aggregate(records, aspect, *config->pipeline.judge, config->pipeline.params, prompts);
    std::map<std::string, const metrics::JudgedItem*> by_id;
    for (const auto& j : agg.items) by_id[j.id] = &j;
    for (auto& item : items) {
      auto it = by_id.find(item.id);
      std::optional<bool> verdict = it == by_id.end() ? std::optional<bool>(false) : it->second->verdict;
      bool unparseable = it != by_id.end() && it->second->unparseable;
      (af ? item.af : item.fc) = verdict;
      (af ? item.af_unparseable : item.fc_unparseable) = unparseable;
    }
  }

  auto report = metrics::compute_report(items);
  auto text = metrics::serialize(report);
  fs::path target = !a.out.empty() ? fs::path(a.out) : !a.run.empty() ? fs::path(a.run) / "eval.json" : fs::path();
  if (!target.empty()) write_file(target, text);
  out << metrics::summary_table(report, "eval");
  if (!target.empty()) out << "report written to " << target.string() << "\n";
  (void)err;
  return kExitOk;
}

struct CheckArgs {
  std::string file, language = "isabelle", config, mock_rules, theory;
  bool mock = false;
  std::optional<double> timeout;
};

int cmd_check(const CheckArgs& a, std::ostream& out, std::ostream& err) {
  auto language = parse_language(a.language);
  if (a.mock == !a.config.empty()) throw UsageError("give exactly one of --mock or --config");
  std::shared_ptr<provers::ProverPool> pool;
  auto timeout = provers::kDefaultCheckTimeout;
  if (a.mock) {
    provers::MockProverConfig mc{language, provers::default_mock_rules(), "mock"};
    if (!a.mock_rules.empty()) mc.rules = provers::mock_rules_from_json(nlohmann::json::parse(read_file(a.mock_rules)));
    provers::MockProver mock(mc);
    pool = std::make_shared<provers::ProverPool>(language, mock.factory());
  } else {
    auto config = load_run_config(a.config, overrides_from(a.language, std::nullopt, a.timeout, std::nullopt, ""));
    if (!config.pipeline.prover) throw UsageError("config has no prover");
    pool = config.pipeline.prover;
    timeout = config.pipeline.check_timeout;
  }
  if (a.timeout) timeout = std::chrono::milliseconds(static_cast<long long>(*a.timeout * 1000));

  auto code = read_file(a.file);
  auto theory = sanitize_theory_name(a.theory.empty() ? fs::path(a.file).stem().string() : a.theory);
  auto f = Formalization::root(code, language, Origin::ZeroShot);
  std::string checkable;
  try {
    checkable = agents::checkable_code(f, theory);
  } catch (const MalformedWrapper& e) {
    out << "FAIL\nerror: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  provers::CheckOutcome outcome;
  try {
    outcome = pool->check({checkable, language, timeout, theory});
  } catch (const ProverTimeout& e) {
    out << "FAIL\nerror: timeout: " << e.what() << "\n";
    return kExitCheckFailed;
  } catch (const ProverError& e) {
    err << "prover unavailable: " << e.what() << "\n";
    return kExitFailed;
  }
  out << (outcome.passed ? "PASS" : "FAIL") << "\n";
  for (const auto& d : outcome.diagnostics) {
    out << provers::to_string(d.severity) << ": " << d.message;
    if (d.position) out << " (line " << d.position->line << ", column " << d.position->column << ")";
    out << "\n";
  }
  return outcome.passed ? kExitOk : kExitCheckFailed;
}

struct ReplayArgs {
  std::string dir, out;
};

int cmd_replay(const ReplayArgs& a, std::ostream& out, std::ostream& err) {
  fs::path events = fs::path(a.dir) / "events.jsonl";
  if (!fs::exists(events)) throw UsageError("no events.jsonl in " + a.dir);
  pipelines::RunLog run;
  try {
    run = pipelines::rebuild(pipelines::read_event_log(events));
  } catch (const CorruptLog& e) {
    err << "corrupt event log " << events.string() << ": " << e.what() << "\n";
    return kExitFailed;
  }
  auto text = metrics::serialize(pipelines::report_from_log(run));
  if (a.out.empty()) {
    out << text;
  } else {
    write_file(a.out, text);
    out << metrics::summary_table(pipelines::report_from_log(run), run.run_start.value("pipeline", "replay"));
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Autoformalization runs, evaluation and prover checks", "autoform"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a pipeline over a dataset");
  run_cmd->add_option("--pipeline", run.pipeline, "hcfr, scir, isr or walkthrough")->required();
  run_cmd->add_option("--dataset", run.dataset, "JSON-lines dataset")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--config", run.config, "JSON config")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--out", run.out, "Run directory")->required();
  run_cmd->add_option("--language", run.language, "isabelle or lean4 (default: config)");
  run_cmd->add_option("--workers", run.workers, "Items processed in parallel")->check(CLI::PositiveNumber);
  run_cmd->add_option("--timeout", run.timeout, "Prover timeout in seconds")->check(CLI::PositiveNumber);
  run_cmd->add_option("--top-n", run.top_n, "Records used by import retrieval")->check(CLI::PositiveNumber);
  run_cmd->add_option("--aspect", run.aspect, "AF, FC or a JSON aspect file");
  run_cmd->add_option("--clock", run.clock, "Event timestamps: system or logical");
  run_cmd->add_flag("--force", run.force, "Overwrite an existing run directory");

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Compute metrics for a run or a predictions file");
  eval_cmd->add_option("--run", eval.run, "Run directory")->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--predictions", eval.predictions, "JSON lines {id, formal}")->check(CLI::ExistingFile);
  eval_cmd->add_option("--references", eval.references, "Dataset with ground truth")->check(CLI::ExistingFile);
  eval_cmd->add_option("--config", eval.config, "Config with prover / judge")->check(CLI::ExistingFile);
  eval_cmd->add_option("--language", eval.language, "isabelle or lean4");
  eval_cmd->add_option("--judge", eval.judges, "Judge aspect (AF or FC), repeatable");
  eval_cmd->add_flag("--fresh-check", eval.fresh_check, "Re-check final code with the configured prover");
  eval_cmd->add_flag("--no-reference", eval.no_reference, "Skip BLEU, ChrF and RUBY");
  eval_cmd->add_option("--out", eval.out, "Report path");

  CheckArgs check;
  auto* check_cmd = app.add_subcommand("check", "Check one file with a prover");
  check_cmd->add_option("file", check.file, "Code file")->required()->check(CLI::ExistingFile);
  check_cmd->add_option("--language", check.language, "isabelle or lean4");
  check_cmd->add_flag("--mock", check.mock, "Use the mock prover");
  check_cmd->add_option("--mock-rules", check.mock_rules, "JSON rule list for --mock")->check(CLI::ExistingFile);
  check_cmd->add_option("--config", check.config, "Config with a prover section")->check(CLI::ExistingFile);
  check_cmd->add_option("--timeout", check.timeout, "Seconds")->check(CLI::PositiveNumber);
  check_cmd->add_option("--theory", check.theory, "Theory name for bare code");

  ReplayArgs replay;
  auto* replay_cmd = app.add_subcommand("replay", "Rebuild a run's report from its event log");
  replay_cmd->add_option("dir", replay.dir, "Run directory")->required();
  replay_cmd->add_option("--out", replay.out, "Write the report here instead of standard output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run, out, err);
    if (eval_cmd->parsed()) return cmd_eval(eval, out, err);
    if (check_cmd->parsed()) return cmd_check(check, out, err);
    if (replay_cmd->parsed()) return cmd_replay(replay, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const LocatedError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DuplicateId& e) {
    err << "input error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const MissingGroundTruth& e) {
    err << "missing ground truth: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitUsage;
}

}  // namespace autoform::cli
