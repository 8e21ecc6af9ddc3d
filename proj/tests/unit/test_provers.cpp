#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "../fixtures/reference_fixtures.hpp"
#include "autoform/core/error.hpp"
#include "autoform/core/wrap.hpp"
#include "autoform/provers/config.hpp"
#include "fake_isabelle_server.hpp"

namespace autoform::provers {
namespace {

using namespace std::chrono_literals;
using nlohmann::json;

const std::string kFakeRepl = std::string(AUTOFORM_FIXTURE_DIR) + "/fake_lean_repl.py";

CheckRequest isabelle(std::string code) {
  CheckRequest r;
  r.code = std::move(code);
  r.language = Language::IsabelleHOL;
  r.timeout = 5s;
  return r;
}

CheckRequest lean(std::string code, std::chrono::milliseconds timeout = 5s) {
  CheckRequest r;
  r.code = std::move(code);
  r.language = Language::Lean4;
  r.timeout = timeout;
  return r;
}

void expect_sound(const CheckOutcome& o) {
  for (const auto& d : o.diagnostics) {
    if (o.passed) EXPECT_NE(d.severity, Severity::Error) << d.message;
    EXPECT_FALSE(d.message.empty());
  }
}

ProverPool mock_pool(std::vector<MockRule> rules, std::size_t size = 1) {
  MockProver mock({Language::IsabelleHOL, std::move(rules), "mock"});
  return ProverPool(Language::IsabelleHOL, mock.factory(), size);
}

TEST(MockProver, DefaultRulesFailOnMarkerOnly) {
  auto pool = mock_pool(default_mock_rules());
  auto ok = pool.check(isabelle("lemma x: \"True\" by simp"));
  EXPECT_TRUE(ok.passed);
  EXPECT_TRUE(ok.diagnostics.empty());
  auto bad = pool.check(isabelle("lemma x: \"True\" (* FAIL_MARKER *)"));
  EXPECT_FALSE(bad.passed);
  ASSERT_EQ(bad.diagnostics.size(), 1u);
  EXPECT_EQ(bad.diagnostics[0].message, "injected");
  EXPECT_EQ(bad.error_text(), "injected");
  expect_sound(ok);
  expect_sound(bad);
}

TEST(MockProver, IdenticalRequestsGiveIdenticalOutcomes) {
  auto pool = mock_pool(default_mock_rules());
  for (const char* code : {"lemma a: True", "FAIL_MARKER here"}) {
    auto first = pool.check(isabelle(code));
    for (int i = 0; i < 20; ++i) EXPECT_EQ(pool.check(isabelle(code)), first);
  }
}

TEST(MockProver, FirstMatchingRuleWins) {
  std::vector<MockRule> rules{
      {"\"HOL.Complex\"", MockEffect::Diagnostics, {{Severity::Error, "Inner syntax error", std::nullopt}}, {}},
      {"real list", MockEffect::Diagnostics, {{Severity::Error, "Undefined type name", std::nullopt}}, {}},
      {"sorry", MockEffect::Diagnostics, {{Severity::Warning, "uses sorry", Position{3, 1}}}, {}},
  };
  auto pool = mock_pool(rules);
  EXPECT_EQ(pool.check(isabelle("imports \"HOL.Complex\" real list")).diagnostics[0].message, "Inner syntax error");
  EXPECT_EQ(pool.check(isabelle("real list")).diagnostics[0].message, "Undefined type name");
  auto warn = pool.check(isabelle("lemma a: True sorry"));
  EXPECT_TRUE(warn.passed);
  ASSERT_EQ(warn.diagnostics.size(), 1u);
  EXPECT_EQ(warn.diagnostics[0].position, (Position{3, 1}));
}

TEST(MockProver, TimeoutAndCrashEffects) {
  std::vector<MockRule> rules{{"LOOP", MockEffect::Timeout, {}, {}}, {"BOOM", MockEffect::Crash, {}, {}}};
  auto pool = mock_pool(rules);
  EXPECT_THROW(pool.check(isabelle("LOOP")), ProverTimeout);
  EXPECT_THROW(pool.check(isabelle("BOOM")), ProverCrashed);
  EXPECT_TRUE(pool.check(isabelle("fine")).passed);
  EXPECT_EQ(pool.sessions_recycled(), 2u);
}

TEST(ProverPool, SessionRecycledAfterCrash) {
  // Crashes on the first check only; the prover itself stays healthy.
  auto pool = mock_pool({{"", MockEffect::Crash, {}, std::size_t{1}}});
  EXPECT_THROW(pool.check(isabelle("lemma a: True")), ProverCrashed);
  auto next = pool.check(isabelle("lemma a: True"));
  EXPECT_TRUE(next.passed);
  EXPECT_EQ(pool.sessions_opened(), 2u);
  EXPECT_EQ(pool.sessions_recycled(), 1u);
}

TEST(ProverPool, RejectsLanguageMismatchAndBadTimeout) {
  auto pool = mock_pool(default_mock_rules());
  EXPECT_THROW(pool.check(lean("theorem t : 1 = 1 := rfl")), InvariantViolation);
  auto req = isabelle("lemma a: True");
  req.timeout = 0ms;
  EXPECT_THROW(pool.check(req), InvariantViolation);
  EXPECT_THROW(ProverPool(Language::IsabelleHOL, MockProver({}).factory(), 0), ConfigError);
}

class SlowSession : public ProverSession {
 public:
  explicit SlowSession(std::atomic<int>& in_flight, std::atomic<int>& peak) : in_flight_(in_flight), peak_(peak) {}
  CheckOutcome check(const CheckRequest&) override {
    int now = ++in_flight_;
    int prev = peak_.load();
    while (now > prev && !peak_.compare_exchange_weak(prev, now)) {
    }
    std::this_thread::sleep_for(30ms);
    --in_flight_;
    return CheckOutcome::from_diagnostics({}, "slow");
  }
  Language language() const override { return Language::IsabelleHOL; }
  std::string id() const override { return "slow"; }

 private:
  std::atomic<int>& in_flight_;
  std::atomic<int>& peak_;
};

TEST(ProverPool, BoundsConcurrencyToPoolSize) {
  std::atomic<int> in_flight{0}, peak{0}, opened{0};
  ProverPool pool(
      Language::IsabelleHOL,
      [&] {
        ++opened;
        return std::unique_ptr<ProverSession>(std::make_unique<SlowSession>(in_flight, peak));
      },
      2);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) threads.emplace_back([&] { EXPECT_TRUE(pool.check(isabelle("x")).passed); });
  for (auto& t : threads) t.join();
  EXPECT_LE(peak.load(), 2);
  EXPECT_LE(opened.load(), 2);
}

TEST(ProverPool, ExhaustedPoolRaisesSessionUnavailable) {
  std::atomic<int> in_flight{0}, peak{0};
  ProverPool pool(
      Language::IsabelleHOL,
      [&] { return std::unique_ptr<ProverSession>(std::make_unique<SlowSession>(in_flight, peak)); }, 1, 1ms);
  std::atomic<int> unavailable{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i) {
    threads.emplace_back([&] {
      try {
        pool.check(isabelle("x"));
      } catch (const SessionUnavailable&) {
        ++unavailable;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_GE(unavailable.load(), 1);
}

class LyingSession : public ProverSession {
 public:
  CheckOutcome check(const CheckRequest&) override {
    CheckOutcome o;
    o.passed = true;
    o.diagnostics.push_back({Severity::Error, "oops", std::nullopt});
    return o;
  }
  Language language() const override { return Language::IsabelleHOL; }
  std::string id() const override { return "liar"; }
};

TEST(ProverPool, EnforcesSeveritySoundness) {
  ProverPool pool(Language::IsabelleHOL, [] { return std::unique_ptr<ProverSession>(std::make_unique<LyingSession>()); });
  EXPECT_THROW(pool.check(isabelle("x")), InvariantViolation);
}

TEST(LeanDiagnostics, EmptyMessages) {
  EXPECT_TRUE(parse_lean_diagnostics(R"({"messages": []})").empty());
  EXPECT_TRUE(parse_lean_diagnostics(R"({"env": 0})").empty());
}

TEST(LeanDiagnostics, SingleErrorWithPosition) {
  auto d = parse_lean_diagnostics(
      R"({"messages": [{"severity":"error","pos":{"line":2,"column":4},"data":"unknown identifier"}]})");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].severity, Severity::Error);
  EXPECT_EQ(d[0].message, "unknown identifier");
  EXPECT_EQ(d[0].position, (Position{2, 4}));
}

TEST(LeanDiagnostics, SorryWarningDoesNotFail) {
  auto d = parse_lean_diagnostics(
      R"({"messages": [{"severity":"warning","pos":{"line":1,"column":8},"data":"declaration uses 'sorry'"}]})");
  auto outcome = CheckOutcome::from_diagnostics(d, "lean");
  EXPECT_TRUE(outcome.passed);
  EXPECT_EQ(outcome.diagnostics[0].severity, Severity::Warning);
}

TEST(LeanDiagnostics, ProtocolErrors) {
  EXPECT_THROW(parse_lean_diagnostics("not json"), ProtocolError);
  EXPECT_THROW(parse_lean_diagnostics("[1, 2]"), ProtocolError);
  EXPECT_THROW(parse_lean_diagnostics(R"({"messages": [{"data": "x"}]})"), ProtocolError);
  EXPECT_THROW(parse_lean_diagnostics(R"({"messages": [{"severity": "error"}]})"), ProtocolError);
  EXPECT_THROW(parse_lean_diagnostics(R"({"messages": [{"severity": "fatal", "data": "x"}]})"), ProtocolError);
  EXPECT_THROW(parse_lean_diagnostics(R"({"messages": {}})"), ProtocolError);
}

TEST(LeanDiagnostics, RejectedCommandIsOneError) {
  auto d = parse_lean_diagnostics(R"({"message": "unknown environment."})");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].severity, Severity::Error);
}

TEST(LeanDiagnostics, GoldenCorpusRoundTripsSeverities) {
  std::ifstream in(std::string(AUTOFORM_FIXTURE_DIR) + "/lean_replies.json");
  auto corpus = json::parse(in);
  ASSERT_EQ(corpus.size(), 20u);
  for (const auto& entry : corpus) {
    auto raw = entry["reply"].get<std::string>();
    std::vector<Diagnostic> d;
    ASSERT_NO_THROW(d = parse_lean_diagnostics(raw)) << raw;
    std::vector<std::string> got;
    for (const auto& x : d) got.push_back(to_string(x.severity));
    EXPECT_EQ(got, entry["severities"].get<std::vector<std::string>>()) << raw;
    // Messages come through verbatim.
    auto reply = json::parse(raw);
    for (std::size_t i = 0; reply.contains("messages") && i < d.size(); ++i) {
      EXPECT_EQ(d[i].message, reply["messages"][i]["data"].get<std::string>());
    }
    expect_sound(CheckOutcome::from_diagnostics(d, "lean"));
  }
}

LeanConfig fake_lean(std::string header = "") {
  LeanConfig c;
  c.repl_path = kFakeRepl;
  c.header = std::move(header);
  c.startup_timeout = 10s;
  return c;
}

TEST(LeanRepl, ReflexivityPasses) {
  auto session = open_lean_session(fake_lean());
  auto out = session->check(lean("theorem t : 1 = 1 := by rfl"));
  EXPECT_TRUE(out.passed);
  EXPECT_EQ(out.prover_id, "lean4-repl");
}

TEST(LeanRepl, ErrorsAndSorryWarnings) {
  auto session = open_lean_session(fake_lean());
  auto bad = session->check(lean("theorem t : 1 = 1 := by\n  exact unknown_ident"));
  EXPECT_FALSE(bad.passed);
  ASSERT_EQ(bad.diagnostics.size(), 1u);
  EXPECT_EQ(bad.diagnostics[0].message, "unknown identifier 'unknown_ident'");
  EXPECT_EQ(bad.diagnostics[0].position, (Position{2, 8}));
  auto sorry = session->check(lean("theorem t : 2 = 2 := by sorry"));
  EXPECT_TRUE(sorry.passed);
  EXPECT_EQ(sorry.diagnostics.at(0).severity, Severity::Warning);
}

TEST(LeanRepl, HeaderEnvironmentReusedWithoutImports) {
  auto session = open_lean_session(fake_lean("import Mathlib"));
  auto out = session->check(lean("import Mathlib\ntheorem t : 1 = 1 := by rfl"));
  EXPECT_TRUE(out.passed) << out.error_text();
}

TEST(LeanRepl, FailingHeaderIsLaunchFailure) {
  try {
    open_lean_session(fake_lean("import Missing"));
    FAIL() << "expected LaunchFailed";
  } catch (const LaunchFailed& e) {
    EXPECT_NE(std::string(e.what()).find("Missing"), std::string::npos);
  }
}

TEST(LeanRepl, MissingBinaryNamesPath) {
  LeanConfig c;
  c.repl_path = "/nonexistent/lean/repl";
  try {
    open_lean_session(c);
    FAIL() << "expected LaunchFailed";
  } catch (const LaunchFailed& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/lean/repl"), std::string::npos);
  }
}

TEST(LeanRepl, TimeoutThenRecoveryThroughPool) {
  auto cfg = fake_lean();
  ProverPool pool(Language::Lean4, [cfg] { return open_lean_session(cfg); });
  EXPECT_THROW(pool.check(lean("SLEEP", 300ms)), ProverTimeout);
  EXPECT_TRUE(pool.check(lean("theorem t : 1 = 1 := by rfl")).passed);
  EXPECT_EQ(pool.sessions_recycled(), 1u);
}

TEST(LeanRepl, CrashThenRecoveryThroughPool) {
  auto cfg = fake_lean();
  ProverPool pool(Language::Lean4, [cfg] { return open_lean_session(cfg); });
  try {
    pool.check(lean("CRASH"));
    FAIL() << "expected ProverCrashed";
  } catch (const ProverCrashed& e) {
    EXPECT_NE(std::string(e.what()).find("PANIC"), std::string::npos);
  }
  EXPECT_TRUE(pool.check(lean("theorem t : 1 = 1 := by rfl")).passed);
}

TEST(LeanRepl, MalformedReplyIsProtocolError) {
  auto cfg = fake_lean();
  ProverPool pool(Language::Lean4, [cfg] { return open_lean_session(cfg); });
  EXPECT_THROW(pool.check(lean("BADJSON")), ProtocolError);
  EXPECT_TRUE(pool.check(lean("theorem t : 1 = 1 := by rfl")).passed);
}

IsabelleConfig fake_isabelle(int port, std::string password = "secret") {
  IsabelleConfig c;
  c.port = port;
  c.password = std::move(password);
  c.startup_timeout = 5s;
  return c;
}

TEST(IsabelleServer, MissingComplexImportReportsUndefinedReal) {
  testing::FakeIsabelleServer server("secret");
  auto session = open_isabelle_session(fake_isabelle(server.port()));
  auto code = wrap_theory(fixtures::kSoftmaxZeroShot, Language::IsabelleHOL, "Softmax");
  auto out = session->check(isabelle(code));
  EXPECT_FALSE(out.passed);
  ASSERT_FALSE(out.diagnostics.empty());
  EXPECT_EQ(out.diagnostics[0].message, fixtures::kUndefinedRealError);
  EXPECT_EQ(out.diagnostics[0].position, (Position{2, 0}));
  expect_sound(out);

  auto fixed = session->check(isabelle(fixtures::kSoftmaxImportRetrieved));
  EXPECT_TRUE(fixed.passed) << fixed.error_text();
  EXPECT_EQ(server.use_theories_calls(), 2);
}

TEST(IsabelleServer, SorryWarningPassesAndBareCodeIsWrapped) {
  testing::FakeIsabelleServer server("secret");
  auto session = open_isabelle_session(fake_isabelle(server.port()));
  auto req = isabelle("lemma a: \"x = x\"\n  sorry");
  req.theory_name = "7 weird-id";
  auto out = session->check(req);
  EXPECT_TRUE(out.passed) << out.error_text();
  ASSERT_EQ(out.diagnostics.size(), 1u);
  EXPECT_EQ(out.diagnostics[0].severity, Severity::Warning);
}

TEST(IsabelleServer, WrongPasswordCarriesRejectionLine) {
  testing::FakeIsabelleServer server("secret");
  try {
    open_isabelle_session(fake_isabelle(server.port(), "guess"));
    FAIL() << "expected LaunchFailed";
  } catch (const LaunchFailed& e) {
    EXPECT_NE(std::string(e.what()).find(testing::FakeIsabelleServer::kRejection), std::string::npos) << e.what();
  }
}

TEST(IsabelleServer, UnreachableServerIsLaunchFailure) {
  EXPECT_THROW(open_isabelle_session(fake_isabelle(1)), LaunchFailed);
  EXPECT_THROW(open_isabelle_session(fake_isabelle(0)), LaunchFailed);
}

TEST(IsabelleServer, TimeoutRecyclesSession) {
  testing::FakeIsabelleServer server("secret");
  auto cfg = fake_isabelle(server.port());
  ProverPool pool(Language::IsabelleHOL, [cfg] { return open_isabelle_session(cfg); });
  auto req = isabelle("theory Slow imports Main begin\n(* SLEEP *)\nend");
  req.timeout = 300ms;
  EXPECT_THROW(pool.check(req), ProverTimeout);
  EXPECT_TRUE(pool.check(isabelle("theory Ok imports Main begin\nend")).passed);
  EXPECT_EQ(pool.sessions_opened(), 2u);
}

TEST(IsabelleProtocol, MessageParsing) {
  auto m = parse_isabelle_message(R"(FINISHED {"task":"t1","ok":true})");
  EXPECT_EQ(m.name, "FINISHED");
  EXPECT_EQ(m.argument["task"], "t1");
  EXPECT_EQ(parse_isabelle_message("OK").name, "OK");
  EXPECT_EQ(parse_isabelle_message("ERROR Bad password").argument, "Bad password");
}

TEST(IsabelleProtocol, UseTheoriesResultWithoutErrorsButNotOk) {
  auto d = parse_use_theories_result(json{{"ok", false}, {"errors", json::array()}, {"nodes", json::array()}});
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].severity, Severity::Error);
  EXPECT_THROW(parse_use_theories_result(json::array()), ProtocolError);
}

TEST(ProverConfigFile, ParsesKinds) {
  auto mock = prover_config_from_json(json::parse(R"({"kind": "mock", "pool_size": 2, "timeout_s": 1.5,
      "mock": {"rules": [{"contains": "X", "error": "bad"}]}})"));
  EXPECT_EQ(mock.kind, ProverKind::Mock);
  EXPECT_EQ(mock.pool_size, 2u);
  EXPECT_EQ(mock.timeout, 1500ms);
  auto pool = make_pool(mock);
  EXPECT_FALSE(pool->check(isabelle("X")).passed);

  auto l = prover_config_from_json(json::parse(R"({"kind": "lean", "lean": {"repl_path": "bin/repl"}})"), "/opt/cfg");
  EXPECT_EQ(l.language, Language::Lean4);
  EXPECT_EQ(l.lean.repl_path, "/opt/cfg/bin/repl");

  EXPECT_THROW(prover_config_from_json(json::parse(R"({"kind": "coq"})")), ConfigError);
  EXPECT_THROW(prover_config_from_json(json::parse(R"({"pool_size": 0})")), ConfigError);
  EXPECT_THROW(prover_config_from_json(json::parse(R"({"timeout_s": -1})")), ConfigError);
  EXPECT_THROW(prover_config_from_json(json::parse(R"({"kind": "lean", "language": "isabelle"})")), ConfigError);
  EXPECT_THROW(prover_config_from_json(json::parse(R"({"mock": {"rules": [{"effect": "explode"}]}})")), ConfigError);
}

}  // namespace
}  // namespace autoform::provers
