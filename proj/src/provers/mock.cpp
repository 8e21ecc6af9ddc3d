#include "autoform/provers/mock.hpp"

#include <mutex>

#include "autoform/core/error.hpp"

namespace autoform::provers {

using nlohmann::json;

struct MockProver::State {
  MockProverConfig config;
  std::mutex mu;
  std::vector<std::size_t> hits;
  std::size_t checks = 0;
};

namespace {

class MockSession : public ProverSession {
 public:
  explicit MockSession(std::shared_ptr<MockProver::State> state) : state_(std::move(state)) {}

  CheckOutcome check(const CheckRequest& request) override;
  Language language() const override;
  std::string id() const override;

 private:
  std::shared_ptr<MockProver::State> state_;
};

}  // namespace

std::vector<MockRule> default_mock_rules() {
  return {MockRule{"FAIL_MARKER", MockEffect::Diagnostics, {Diagnostic{Severity::Error, "injected", std::nullopt}},
                   std::nullopt}};
}

std::vector<MockRule> mock_rules_from_json(const json& rules) {
  if (!rules.is_array()) throw ConfigError("mock prover rules must be an array");
  std::vector<MockRule> out;
  for (const auto& r : rules) {
    MockRule rule;
    rule.contains = r.value("contains", "");
    std::string effect = r.value("effect", "diagnostics");
    if (effect == "diagnostics") {
      rule.effect = MockEffect::Diagnostics;
    } else if (effect == "timeout") {
      rule.effect = MockEffect::Timeout;
    } else if (effect == "crash") {
      rule.effect = MockEffect::Crash;
    } else {
      throw ConfigError("unknown mock rule effect '" + effect + "'");
    }
    if (r.contains("error")) rule.diagnostics.push_back({Severity::Error, r["error"].get<std::string>(), std::nullopt});
    for (const auto& d : r.value("diagnostics", json::array())) {
      Diagnostic diag;
      diag.severity = parse_severity(d.value("severity", "error"));
      diag.message = d.at("message").get<std::string>();
      if (d.contains("line")) diag.position = Position{d["line"].get<std::size_t>(), d.value("column", std::size_t{0})};
      rule.diagnostics.push_back(std::move(diag));
    }
    if (r.contains("limit")) rule.limit = r["limit"].get<std::size_t>();
    out.push_back(std::move(rule));
  }
  return out;
}

MockProverConfig mock_config_from_json(const json& j) {
  MockProverConfig c;
  try {
    c.id = j.value("id", "mock");
    if (j.contains("language")) c.language = parse_language(j["language"].get<std::string>());
    c.rules = j.contains("rules") ? mock_rules_from_json(j["rules"]) : default_mock_rules();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("mock prover config: ") + e.what());
  }
  return c;
}

MockProver::MockProver(MockProverConfig config) : state_(std::make_shared<State>()) {
  state_->hits.assign(config.rules.size(), 0);
  state_->config = std::move(config);
}

std::unique_ptr<ProverSession> MockProver::open_session() const { return std::make_unique<MockSession>(state_); }

SessionFactory MockProver::factory() const {
  auto state = state_;
  return [state] { return std::unique_ptr<ProverSession>(std::make_unique<MockSession>(state)); };
}

std::size_t MockProver::checks() const {
  std::lock_guard lock(state_->mu);
  return state_->checks;
}

namespace {

CheckOutcome MockSession::check(const CheckRequest& request) {
  request.validate();
  const MockRule* matched = nullptr;
  {
    std::lock_guard lock(state_->mu);
    ++state_->checks;
    const auto& rules = state_->config.rules;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      const auto& rule = rules[i];
      if (rule.limit && state_->hits[i] >= *rule.limit) continue;
      if (request.code.find(rule.contains) == std::string::npos) continue;
      ++state_->hits[i];
      matched = &rule;
      break;
    }
  }
  if (!matched) return CheckOutcome::from_diagnostics({}, state_->config.id);
  switch (matched->effect) {
    case MockEffect::Timeout:
      throw ProverTimeout("mock prover: check timed out");
    case MockEffect::Crash:
      throw ProverCrashed("mock prover: session crashed");
    case MockEffect::Diagnostics:
      break;
  }
  return CheckOutcome::from_diagnostics(matched->diagnostics, state_->config.id);
}

Language MockSession::language() const { return state_->config.language; }

std::string MockSession::id() const { return state_->config.id; }

}  // namespace

}  // namespace autoform::provers
