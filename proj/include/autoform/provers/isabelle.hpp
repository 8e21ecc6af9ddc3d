#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoform/provers/prover.hpp"

namespace autoform::provers {

struct IsabelleConfig {
  std::string host = "127.0.0.1";
  int port = 0;
  std::string password;
  std::string session = "HOL";
  // Theory files are written below this directory (default: system temp).
  std::filesystem::path work_dir;
  std::chrono::milliseconds connect_timeout{10000};
  std::chrono::milliseconds startup_timeout{600000};
  std::string id = "isabelle-server";
};

// One server message: "NAME json" split into name and parsed argument.
struct IsabelleMessage {
  std::string name;
  nlohmann::json argument;
};
IsabelleMessage parse_isabelle_message(std::string_view line);

// Diagnostics of a FINISHED use_theories result: errors from "errors",
// warnings from node messages. Isabelle positions carry no column; column 0.
std::vector<Diagnostic> parse_use_theories_result(const nlohmann::json& result);

// Connects, authenticates and starts a prover session. Throws LaunchFailed
// carrying the server's reply when the handshake or session start fails.
std::unique_ptr<ProverSession> open_isabelle_session(const IsabelleConfig& config);

}  // namespace autoform::provers
