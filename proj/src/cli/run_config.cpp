#include "autoform/cli/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "autoform/agents/prompts.hpp"
#include "autoform/cli/dataset.hpp"
#include "autoform/core/error.hpp"
#include "autoform/llm/remote.hpp"
#include "autoform/llm/scripted.hpp"

namespace autoform::cli {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute() || base.empty()) return path;
  return base / path;
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : j.items()) {
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

std::chrono::milliseconds seconds(double s, const std::string& what) {
  if (s <= 0) throw ConfigError(what + " must be positive");
  return std::chrono::milliseconds(static_cast<long long>(s * 1000));
}

struct BackendBuilder {
  const json& specs;
  const std::filesystem::path& base_dir;
  const std::optional<RunFiles>& files;
  std::shared_ptr<llm::ResponseCache> cache;
  std::optional<std::filesystem::path> shared_cache_dir;
  std::map<std::string, std::shared_ptr<llm::Backend>> built;
  std::set<std::string> building;
  bool ordered_script = false;

  std::shared_ptr<llm::ResponseCache> response_cache() {
    if (!cache && files) cache = std::make_shared<llm::ResponseCache>(files->cache, shared_cache_dir);
    return cache;
  }

  std::shared_ptr<llm::Backend> wrap_cache(std::shared_ptr<llm::Backend> inner) {
    auto c = response_cache();
    return c ? std::make_shared<llm::CachedBackend>(std::move(inner), c) : inner;
  }

  std::shared_ptr<llm::Backend> get(const std::string& name) {
    if (auto it = built.find(name); it != built.end()) return it->second;
    if (!specs.contains(name)) throw ConfigError("unknown backend '" + name + "'");
    if (!building.insert(name).second) throw ConfigError("backend '" + name + "' wraps itself");
    const auto& s = specs.at(name);
    std::string where = "backend '" + name + "'";
    auto kind = s.value("kind", "");
    std::shared_ptr<llm::Backend> backend;
    if (kind == "scripted") {
      check_keys(s, where, {"kind", "script", "id", "model"});
      auto script = llm::read_script(resolve(base_dir, s.at("script").get<std::string>()));
      auto id = s.value("id", script.id.value_or(name));
      auto scripted = std::make_shared<llm::ScriptedBackend>(std::move(script.entries), id);
      ordered_script = ordered_script || scripted->has_ordered_entries();
      backend = scripted;
    } else if (kind == "remote") {
      check_keys(s, where,
                 {"kind", "base_url", "api_key_env", "model", "id", "cache", "max_attempts", "timeout_s"});
      llm::RemoteConfig rc;
      rc.base_url = s.value("base_url", rc.base_url);
      rc.id = s.value("id", name);
      rc.max_attempts = s.value("max_attempts", rc.max_attempts);
      if (s.contains("timeout_s")) {
        rc.timeout = std::chrono::seconds(static_cast<long long>(s["timeout_s"].get<double>()));
      }
      if (s.contains("api_key_env")) {
        auto var = s["api_key_env"].get<std::string>();
        const char* key = std::getenv(var.c_str());
        if (!key) throw ConfigError(where + ": environment variable " + var + " is not set");
        rc.api_key = key;
      }
      backend = std::make_shared<llm::RemoteBackend>(rc);
      if (s.value("cache", true)) backend = wrap_cache(backend);
    } else if (kind == "cached") {
      check_keys(s, where, {"kind", "backend", "model"});
      backend = wrap_cache(get(s.at("backend").get<std::string>()));
    } else {
      throw ConfigError(where + ": unknown kind '" + kind + "' (expected remote, scripted or cached)");
    }
    if (s.contains("model")) backend = std::make_shared<ModelBackend>(backend, s["model"].get<std::string>());
    building.erase(name);
    built[name] = backend;
    return backend;
  }
};

}  // namespace

ModelBackend::ModelBackend(std::shared_ptr<llm::Backend> inner, std::string model)
    : inner_(std::move(inner)), model_(std::move(model)) {}

std::string ModelBackend::do_complete(const std::vector<llm::ChatMessage>& messages,
                                      const llm::GenerationParams& params) {
  auto p = params;
  p.model = model_;
  return inner_->complete(messages, p);
}

AspectDescription resolve_aspect(const std::string& spec, const std::filesystem::path& base_dir) {
  if (auto preset = aspect_preset(spec)) return *preset;
  auto path = resolve(base_dir, spec);
  std::ifstream in(path);
  if (!in) throw ConfigError("aspect '" + spec + "' is neither AF, FC nor a readable file");
  try {
    auto j = json::parse(in);
    if (j.is_array()) {
      if (j.empty()) throw ConfigError("aspect file " + path.string() + " is empty");
      j = j.front();
    }
    AspectDescription a{j.at("name").get<std::string>(), j.at("description").get<std::string>()};
    a.validate();
    return a;
  } catch (const json::exception& e) {
    throw ConfigError("aspect file " + path.string() + ": " + e.what());
  } catch (const InvariantViolation& e) {
    throw ConfigError("aspect file " + path.string() + ": " + e.what());
  }
}

LoadedConfig build_run_config(const json& j, const std::filesystem::path& base_dir, const Overrides& overrides,
                              const std::optional<RunFiles>& files) {
  LoadedConfig out;
  auto& pc = out.pipeline;
  try {
    check_keys(j, "config", {"language", "generation", "backends", "roles", "prover", "pipeline", "prompts_dir",
                             "cache_dir", "clock"});
    out.clock = j.value("clock", "system");
    if (out.clock != "system" && out.clock != "logical") throw ConfigError("clock must be 'system' or 'logical'");
    pc.language = overrides.language.value_or(parse_language(j.value("language", "isabelle")));

    if (j.contains("generation")) {
      const auto& g = j["generation"];
      check_keys(g, "generation", {"model", "temperature", "max_tokens", "seed"});
      pc.params.model = g.value("model", "");
      pc.params.temperature = g.value("temperature", 0.0);
      pc.params.max_tokens = g.value("max_tokens", 2048);
      if (g.contains("seed") && !g["seed"].is_null()) pc.params.seed = g["seed"].get<std::int64_t>();
    }

    json specs = j.value("backends", json::object());
    check_keys(j.value("roles", json::object()), "roles", {"autoformalize", "judge", "refine"});
    BackendBuilder builder{specs, base_dir, files, nullptr, std::nullopt, {}, {}};
    if (j.contains("cache_dir")) builder.shared_cache_dir = resolve(base_dir, j["cache_dir"].get<std::string>());
    for (const auto& [name, _] : specs.items()) out.backends[name] = builder.get(name);
    auto role = [&](const char* r) -> std::shared_ptr<llm::Backend> {
      auto roles = j.value("roles", json::object());
      if (!roles.contains(r)) return nullptr;
      return builder.get(roles[r].get<std::string>());
    };
    pc.autoformalizer = role("autoformalize");
    pc.judge = role("judge");
    pc.refiner = role("refine");
    if (files) {
      auto sink = std::make_shared<llm::JsonlExchangeSink>(files->exchanges);
      for (auto* b : {pc.autoformalizer.get(), pc.judge.get(), pc.refiner.get()}) {
        if (b) b->set_exchange_sink(sink);
      }
      builder.response_cache();
    }

    if (j.contains("prover") && !j["prover"].is_null()) {
      auto pj = j["prover"];
      if (!pj.contains("language")) pj["language"] = std::string(to_string(pc.language));
      out.prover = provers::prover_config_from_json(pj, base_dir);
      pc.prover = provers::make_pool(*out.prover);
      pc.check_timeout = out.prover->timeout;
    }

    json p = j.value("pipeline", json::object());
    check_keys(p, "pipeline", {"n_iterations", "aspect", "exemplars", "denoise", "import_retrieval", "top_n", "kb",
                               "workers", "final_check", "final_judges", "timeout_s"});
    pc.n_iterations = p.value("n_iterations", 3);
    if (p.contains("aspect")) {
      const auto& a = p["aspect"];
      pc.aspect = a.is_string() ? resolve_aspect(a.get<std::string>(), base_dir)
                                : AspectDescription{a.at("name").get<std::string>(),
                                                    a.at("description").get<std::string>()};
    }
    if (p.contains("exemplars")) pc.exemplars = load_exemplars(resolve(base_dir, p["exemplars"]), pc.language);
    pc.denoise = p.value("denoise", false);
    pc.import_retrieval = p.value("import_retrieval", false);
    pc.top_n = p.value("top_n", std::size_t{1});
    if (p.contains("kb")) pc.kb = pipelines::KnowledgeBase::load(resolve(base_dir, p["kb"].get<std::string>()));
    pc.workers = p.value("workers", std::size_t{1});
    pc.final_check = p.value("final_check", true);
    for (const auto& a : p.value("final_judges", json::array())) {
      pc.final_judges.push_back(a.is_string() ? resolve_aspect(a.get<std::string>(), base_dir)
                                              : AspectDescription{a.at("name").get<std::string>(),
                                                                  a.at("description").get<std::string>()});
    }
    if (p.contains("timeout_s")) pc.check_timeout = seconds(p["timeout_s"].get<double>(), "pipeline timeout_s");

    if (j.contains("prompts_dir")) {
      auto lib = std::make_shared<agents::PromptLibrary>(agents::PromptLibrary::builtin());
      lib->load_dir(resolve(base_dir, j["prompts_dir"].get<std::string>()));
      pc.prompts = lib;
    }

    if (overrides.workers) pc.workers = *overrides.workers;
    if (overrides.timeout_s) pc.check_timeout = seconds(*overrides.timeout_s, "--timeout");
    if (overrides.top_n) pc.top_n = *overrides.top_n;
    if (overrides.aspect) pc.aspect = resolve_aspect(*overrides.aspect, std::filesystem::current_path());
    if (builder.ordered_script && pc.workers > 1) {
      out.warnings.push_back("ordered scripted backends need a single worker; using workers = 1");
      pc.workers = 1;
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  out.snapshot = j;
  out.snapshot["resolved"] = {{"language", std::string(to_string(pc.language))},
                              {"workers", pc.workers},
                              {"timeout_s", static_cast<double>(pc.check_timeout.count()) / 1000.0},
                              {"top_n", pc.top_n},
                              {"aspect", {{"name", pc.aspect.name}, {"description", pc.aspect.description}}}};
  return out;
}

LoadedConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides,
                             const std::optional<RunFiles>& files) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return build_run_config(j, std::filesystem::absolute(path).parent_path(), overrides, files);
}

}  // namespace autoform::cli
