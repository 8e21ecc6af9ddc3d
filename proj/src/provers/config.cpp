#include "autoform/provers/config.hpp"

#include "autoform/core/error.hpp"

namespace autoform::provers {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.empty() || path.is_absolute() || base.empty()) return path;
  return base / path;
}

}  // namespace

ProverConfig prover_config_from_json(const json& j, const std::filesystem::path& base_dir) {
  ProverConfig c;
  try {
    std::string kind = j.value("kind", "mock");
    if (kind == "mock") {
      c.kind = ProverKind::Mock;
    } else if (kind == "lean") {
      c.kind = ProverKind::Lean;
      c.language = Language::Lean4;
    } else if (kind == "isabelle") {
      c.kind = ProverKind::Isabelle;
    } else {
      throw ConfigError("unknown prover kind '" + kind + "'");
    }
    if (j.contains("language")) c.language = parse_language(j["language"].get<std::string>());
    c.pool_size = j.value("pool_size", std::size_t{1});
    if (c.pool_size == 0) throw ConfigError("prover pool_size must be >= 1");
    if (j.contains("timeout_s")) {
      double secs = j["timeout_s"].get<double>();
      if (secs <= 0) throw ConfigError("prover timeout_s must be positive");
      c.timeout = std::chrono::milliseconds(static_cast<long long>(secs * 1000));
    }
    json mock = j.value("mock", json::object());
    mock["language"] = std::string(to_string(c.language));
    c.mock = mock_config_from_json(mock);
    if (j.contains("lean")) {
      const auto& l = j["lean"];
      c.lean.repl_path = resolve(base_dir, l.value("repl_path", ""));
      c.lean.args = l.value("args", std::vector<std::string>{});
      c.lean.working_dir = resolve(base_dir, l.value("working_dir", ""));
      c.lean.header = l.value("header", "");
      c.lean.id = l.value("id", c.lean.id);
    }
    if (j.contains("isabelle")) {
      const auto& i = j["isabelle"];
      c.isabelle.host = i.value("host", c.isabelle.host);
      c.isabelle.port = i.value("port", 0);
      c.isabelle.password = i.value("password", "");
      c.isabelle.session = i.value("session", c.isabelle.session);
      c.isabelle.work_dir = resolve(base_dir, i.value("work_dir", ""));
      c.isabelle.id = i.value("id", c.isabelle.id);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("prover config: ") + e.what());
  }
  if (c.kind == ProverKind::Lean && c.language != Language::Lean4) throw ConfigError("lean prover needs language lean4");
  if (c.kind == ProverKind::Isabelle && c.language != Language::IsabelleHOL) {
    throw ConfigError("isabelle prover needs language isabelle");
  }
  return c;
}

std::shared_ptr<ProverPool> make_pool(const ProverConfig& config) {
  SessionFactory factory;
  switch (config.kind) {
    case ProverKind::Mock: {
      auto mock = std::make_shared<MockProver>(config.mock);
      factory = [mock] { return mock->open_session(); };
      break;
    }
    case ProverKind::Lean: {
      auto lean = config.lean;
      factory = [lean] { return open_lean_session(lean); };
      break;
    }
    case ProverKind::Isabelle: {
      auto isa = config.isabelle;
      factory = [isa] { return open_isabelle_session(isa); };
      break;
    }
  }
  return std::make_shared<ProverPool>(config.language, std::move(factory), config.pool_size);
}

}  // namespace autoform::provers
