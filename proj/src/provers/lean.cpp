#include "autoform/provers/lean.hpp"

#include <optional>

#include "autoform/core/error.hpp"
#include "autoform/core/text.hpp"
#include "channel.hpp"

namespace autoform::provers {

using nlohmann::json;

std::vector<Diagnostic> parse_lean_diagnostics(std::string_view raw) {
  json reply;
  try {
    reply = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("Lean REPL reply is not JSON: ") + e.what());
  }
  if (!reply.is_object()) throw ProtocolError("Lean REPL reply is not an object");
  std::vector<Diagnostic> out;
  if (!reply.contains("messages")) {
    if (reply.contains("message")) {
      if (!reply["message"].is_string()) throw ProtocolError("Lean REPL 'message' is not a string");
      out.push_back({Severity::Error, reply["message"].get<std::string>(), std::nullopt});
    }
    return out;
  }
  if (!reply["messages"].is_array()) throw ProtocolError("Lean REPL 'messages' is not an array");
  for (const auto& m : reply["messages"]) {
    if (!m.is_object() || !m.contains("severity") || !m.contains("data") || !m["severity"].is_string() ||
        !m["data"].is_string()) {
      throw ProtocolError("Lean REPL message lacks severity or data: " + m.dump());
    }
    Diagnostic d;
    d.severity = parse_severity(m["severity"].get<std::string>());
    d.message = m["data"].get<std::string>();
    if (m.contains("pos") && m["pos"].is_object()) {
      const auto& pos = m["pos"];
      if (!pos.contains("line") || !pos.contains("column")) throw ProtocolError("Lean REPL pos lacks line/column");
      d.position = Position{pos["line"].get<std::size_t>(), pos["column"].get<std::size_t>()};
    }
    if (d.message.empty()) d.message = "(empty message)";
    out.push_back(std::move(d));
  }
  return out;
}

namespace {

using detail::Clock;

class LeanSession : public ProverSession {
 public:
  explicit LeanSession(LeanConfig config) : config_(std::move(config)) {
    process_ = detail::spawn(config_.repl_path, config_.args, config_.working_dir);
    if (!text::trim(config_.header).empty()) {
      try {
        auto raw = round_trip(json{{"cmd", config_.header}}, Clock::now() + config_.startup_timeout);
        auto diags = parse_lean_diagnostics(raw);
        for (const auto& d : diags) {
          if (d.severity == Severity::Error) throw LaunchFailed("Lean header failed: " + d.message);
        }
        env_ = json::parse(raw).at("env").get<long>();
      } catch (const LaunchFailed&) {
        throw;
      } catch (const std::exception& e) {
        std::string err = process_.errors.drain();
        throw LaunchFailed("Lean REPL " + config_.repl_path.string() + " failed during startup: " + e.what() +
                           (err.empty() ? "" : "\n" + err));
      }
    }
  }

  CheckOutcome check(const CheckRequest& request) override {
    auto start = Clock::now();
    std::string code = request.code;
    if (env_) code = strip_imports(code);
    json cmd{{"cmd", code}};
    if (env_) cmd["env"] = *env_;
    std::string raw;
    try {
      raw = round_trip(cmd, start + request.timeout);
    } catch (const ProverTimeout&) {
      process_.terminate();
      throw;
    }
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
    return CheckOutcome::from_diagnostics(parse_lean_diagnostics(raw), config_.id, elapsed);
  }

  Language language() const override { return Language::Lean4; }
  std::string id() const override { return config_.id; }

 private:
  static std::string strip_imports(const std::string& code) {
    std::vector<std::string> kept;
    for (auto line : text::split_lines(code)) {
      if (text::trim(line).rfind("import ", 0) == 0) continue;
      kept.emplace_back(line);
    }
    return text::join(kept, "\n");
  }

  // Commands are separated by a blank line; so are replies.
  std::string round_trip(const json& cmd, Clock::time_point deadline) {
    process_.io.write_all(cmd.dump() + "\n\n", deadline);
    std::string reply;
    for (;;) {
      auto line = process_.io.read_line(deadline);
      if (!line) {
        std::string err = process_.errors.drain();
        throw ProverCrashed("Lean REPL exited" + (err.empty() ? std::string() : ": " + err));
      }
      if (text::trim(*line).empty()) {
        if (!text::trim(reply).empty()) return reply;
        continue;
      }
      reply += *line;
      reply += '\n';
    }
  }

  LeanConfig config_;
  detail::ChildProcess process_;
  std::optional<long> env_;
};

}  // namespace

std::unique_ptr<ProverSession> open_lean_session(const LeanConfig& config) {
  if (config.repl_path.empty()) throw LaunchFailed("Lean REPL path is not configured");
  return std::make_unique<LeanSession>(config);
}

}  // namespace autoform::provers
