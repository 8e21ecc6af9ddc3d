#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "autoform/provers/isabelle.hpp"
#include "autoform/provers/lean.hpp"
#include "autoform/provers/mock.hpp"
#include "autoform/provers/prover.hpp"

namespace autoform::provers {

enum class ProverKind { Mock, Lean, Isabelle };

struct ProverConfig {
  ProverKind kind = ProverKind::Mock;
  Language language = Language::IsabelleHOL;
  std::size_t pool_size = 1;
  std::chrono::milliseconds timeout = kDefaultCheckTimeout;
  MockProverConfig mock;
  LeanConfig lean;
  IsabelleConfig isabelle;
};

// {"kind": "mock"|"lean"|"isabelle", "language": ..., "pool_size": n,
//  "timeout_s": seconds, "mock": {...}, "lean": {"repl_path", "args",
//  "working_dir", "header"}, "isabelle": {"host", "port", "password",
//  "session", "work_dir"}}. Relative paths resolve against base_dir.
// Throws ConfigError.
ProverConfig prover_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

std::shared_ptr<ProverPool> make_pool(const ProverConfig& config);

}  // namespace autoform::provers
