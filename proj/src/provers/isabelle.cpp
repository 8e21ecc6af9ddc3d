#include "autoform/provers/isabelle.hpp"

#include <atomic>
#include <fstream>

#include <unistd.h>

#include "autoform/core/error.hpp"
#include "autoform/core/text.hpp"
#include "autoform/core/wrap.hpp"
#include "channel.hpp"

namespace autoform::provers {

using detail::Clock;
using nlohmann::json;

IsabelleMessage parse_isabelle_message(std::string_view line) {
  IsabelleMessage msg;
  auto sp = line.find(' ');
  msg.name = std::string(line.substr(0, sp));
  if (sp == std::string_view::npos) return msg;
  auto rest = text::trim(line.substr(sp + 1));
  if (rest.empty()) return msg;
  try {
    msg.argument = json::parse(rest);
  } catch (const json::parse_error&) {
    // Some replies carry plain text (e.g. an ERROR on bad input).
    msg.argument = std::string(rest);
  }
  return msg;
}

namespace {

std::optional<Position> isabelle_position(const json& m) {
  if (!m.contains("pos") || !m["pos"].is_object() || !m["pos"].contains("line")) return std::nullopt;
  return Position{m["pos"]["line"].get<std::size_t>(), 0};
}

}  // namespace

std::vector<Diagnostic> parse_use_theories_result(const json& result) {
  if (!result.is_object()) throw ProtocolError("use_theories result is not an object");
  std::vector<Diagnostic> out;
  for (const auto& e : result.value("errors", json::array())) {
    if (!e.contains("message") || !e["message"].is_string()) throw ProtocolError("error entry without message");
    out.push_back({Severity::Error, e["message"].get<std::string>(), isabelle_position(e)});
  }
  for (const auto& node : result.value("nodes", json::array())) {
    for (const auto& m : node.value("messages", json::array())) {
      if (m.value("kind", "") != "warning") continue;
      out.push_back({Severity::Warning, m.value("message", "(warning)"), isabelle_position(m)});
    }
  }
  bool ok = result.value("ok", true);
  bool has_error = false;
  for (const auto& d : out) has_error = has_error || d.severity == Severity::Error;
  if (!ok && !has_error) out.push_back({Severity::Error, "theory check failed", std::nullopt});
  return out;
}

namespace {

class IsabelleSession : public ProverSession {
 public:
  explicit IsabelleSession(IsabelleConfig config) : config_(std::move(config)) {
    static std::atomic<int> counter{0};
    auto base = config_.work_dir.empty() ? std::filesystem::temp_directory_path() : config_.work_dir;
    dir_ = base / ("autoform-isabelle-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(dir_);

    channel_ = detail::connect_tcp(config_.host, config_.port, config_.connect_timeout);
    auto deadline = Clock::now() + config_.startup_timeout;
    try {
      channel_.write_all(config_.password + "\n", deadline);
      auto hello = read_message(deadline);
      if (hello.name != "OK") throw LaunchFailed("Isabelle server rejected connection: " + raw_);
      auto started = run_task("session_start", json{{"session", config_.session}}, deadline);
      if (started.name != "FINISHED") throw LaunchFailed("Isabelle session_start failed: " + raw_);
      session_id_ = started.argument.at("session_id").get<std::string>();
    } catch (const LaunchFailed&) {
      throw;
    } catch (const ProverError& e) {
      throw LaunchFailed(std::string("Isabelle server handshake failed: ") + e.what() +
                         (raw_.empty() ? "" : " (last reply: " + raw_ + ")"));
    }
  }

  ~IsabelleSession() override {
    if (!session_id_.empty() && channel_.open()) {
      try {
        auto deadline = Clock::now() + std::chrono::seconds(5);
        send("session_stop", json{{"session_id", session_id_}}, deadline);
      } catch (...) {
      }
    }
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }

  CheckOutcome check(const CheckRequest& request) override {
    auto start = Clock::now();
    auto deadline = start + request.timeout;
    std::string code = request.code;
    if (!leading_theory_keyword(code)) {
      code = wrap_theory(code, Language::IsabelleHOL,
                         request.theory_name.empty() ? "Check" : sanitize_theory_name(request.theory_name), {});
    }
    auto header = parse_theory_header(code);
    if (!header) throw MalformedWrapper("cannot find the theory header of the checked code");
    std::string name = header->name;
    {
      std::ofstream out(dir_ / (name + ".thy"), std::ios::binary | std::ios::trunc);
      out << code;
      if (!out) throw ProverCrashed("cannot write theory file in " + dir_.string());
    }
    json args{{"session_id", session_id_}, {"theories", json::array({name})}, {"master_dir", dir_.string()}};
    IsabelleMessage done;
    try {
      done = run_task("use_theories", args, deadline);
    } catch (const ProverTimeout&) {
      if (!task_.empty()) {
        try {
          send("cancel", json{{"task", task_}}, Clock::now() + std::chrono::seconds(2));
        } catch (...) {
        }
      }
      channel_.close();
      throw;
    }
    if (done.name != "FINISHED") throw ProverCrashed("Isabelle use_theories failed: " + raw_);
    auto diagnostics = parse_use_theories_result(done.argument);
    // Forget the theory so the next check with the same name is re-read.
    auto purge = request_reply("purge_theories", args, deadline);
    if (purge.name != "OK") throw ProtocolError("Isabelle purge_theories failed: " + raw_);
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
    return CheckOutcome::from_diagnostics(std::move(diagnostics), config_.id, elapsed);
  }

  Language language() const override { return Language::IsabelleHOL; }
  std::string id() const override { return config_.id; }

 private:
  void send(const std::string& name, const json& arg, Clock::time_point deadline) {
    channel_.write_all(name + " " + arg.dump() + "\n", deadline);
  }

  // Short messages are one line; long ones are a byte count line followed by
  // that many bytes.
  IsabelleMessage read_message(Clock::time_point deadline) {
    for (;;) {
      auto line = channel_.read_line(deadline);
      if (!line) throw ProverCrashed("Isabelle server closed the connection");
      if (text::trim(*line).empty()) continue;
      std::string body = *line;
      if (body.find_first_not_of("0123456789") == std::string::npos) {
        auto payload = channel_.read_exact(std::stoul(body), deadline);
        if (!payload) throw ProverCrashed("Isabelle server closed the connection mid-message");
        body = std::string(text::trim_right(*payload));
      }
      raw_ = body;
      return parse_isabelle_message(body);
    }
  }

  IsabelleMessage request_reply(const std::string& name, const json& arg, Clock::time_point deadline) {
    send(name, arg, deadline);
    for (;;) {
      auto msg = read_message(deadline);
      if (msg.name == "NOTE") continue;
      if (msg.name == "ERROR") throw ProtocolError("Isabelle " + name + " rejected: " + raw_);
      return msg;
    }
  }

  // Asynchronous command: OK {"task"} then NOTEs until FINISHED or FAILED.
  IsabelleMessage run_task(const std::string& name, const json& arg, Clock::time_point deadline) {
    task_.clear();
    auto ack = request_reply(name, arg, deadline);
    if (ack.name != "OK" || !ack.argument.is_object() || !ack.argument.contains("task")) {
      throw ProtocolError("Isabelle " + name + ": unexpected reply " + raw_);
    }
    task_ = ack.argument["task"].get<std::string>();
    for (;;) {
      auto msg = read_message(deadline);
      if (msg.name != "FINISHED" && msg.name != "FAILED") continue;
      if (msg.argument.is_object() && msg.argument.value("task", task_) != task_) continue;
      task_.clear();
      return msg;
    }
  }

  IsabelleConfig config_;
  std::filesystem::path dir_;
  detail::FdChannel channel_;
  std::string session_id_;
  std::string task_;
  std::string raw_;
};

}  // namespace

std::unique_ptr<ProverSession> open_isabelle_session(const IsabelleConfig& config) {
  if (config.port <= 0) throw LaunchFailed("Isabelle server port is not configured");
  return std::make_unique<IsabelleSession>(config);
}

}  // namespace autoform::provers
