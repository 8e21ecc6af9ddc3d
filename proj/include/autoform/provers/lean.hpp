#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "autoform/provers/prover.hpp"

namespace autoform::provers {

// Maps one Lean REPL reply object to diagnostics. A reply without a
// "messages" array has no diagnostics; a top-level "message" (command
// rejected by the REPL) becomes one Error. Throws ProtocolError on non-JSON
// input or malformed message entries.
std::vector<Diagnostic> parse_lean_diagnostics(std::string_view raw);

struct LeanConfig {
  std::filesystem::path repl_path;
  std::vector<std::string> args;
  std::filesystem::path working_dir;
  // Commands run once at startup (e.g. "import Mathlib"). When set, checks
  // run in the resulting environment and import lines are dropped from the
  // checked code.
  std::string header;
  std::chrono::milliseconds startup_timeout{600000};
  std::string id = "lean4-repl";
};

// Spawns the REPL and performs the header handshake. Throws LaunchFailed
// (naming the path, with captured stderr) when the REPL cannot start.
std::unique_ptr<ProverSession> open_lean_session(const LeanConfig& config);

}  // namespace autoform::provers
