#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoform/provers/prover.hpp"

namespace autoform::provers {

enum class MockEffect { Diagnostics, Timeout, Crash };

// Rules are tried in order; the first rule whose substring occurs in the code
// decides the outcome. An empty substring matches every request. Code that
// matches no rule passes with no diagnostics.
struct MockRule {
  std::string contains;
  MockEffect effect = MockEffect::Diagnostics;
  std::vector<Diagnostic> diagnostics;
  // Rule stops matching after this many hits (shared by all sessions).
  std::optional<std::size_t> limit;
};

struct MockProverConfig {
  Language language = Language::IsabelleHOL;
  std::vector<MockRule> rules;
  std::string id = "mock";
};

// {"contains": "FAIL_MARKER"} -> error "injected".
std::vector<MockRule> default_mock_rules();

// JSON form: {"id": ..., "language": ..., "rules": [{"contains": "...",
// "effect": "diagnostics"|"timeout"|"crash", "limit": n,
// "diagnostics": [{"severity", "message", "line", "column"}]}]}.
// A "diagnostics" rule may use "error": "text" as shorthand.
MockProverConfig mock_config_from_json(const nlohmann::json& j);
std::vector<MockRule> mock_rules_from_json(const nlohmann::json& rules);

class MockProver {
 public:
  explicit MockProver(MockProverConfig config);

  // Opens a session sharing this prover's rule state.
  std::unique_ptr<ProverSession> open_session() const;
  SessionFactory factory() const;

  std::size_t checks() const;

  struct State;

 private:
  std::shared_ptr<State> state_;
};

}  // namespace autoform::provers
