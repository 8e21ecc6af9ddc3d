#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoform/core/types.hpp"

namespace autoform::provers {

enum class Severity { Error, Warning, Info };

std::string to_string(Severity s);
// Accepts "error", "warning", "info" (case-insensitive); "information" too.
Severity parse_severity(const std::string& s);

struct Position {
  std::size_t line = 0;
  std::size_t column = 0;
  bool operator==(const Position&) const = default;
};

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string message;
  std::optional<Position> position;

  bool operator==(const Diagnostic&) const = default;
};

nlohmann::json to_json(const Diagnostic& d);
Diagnostic diagnostic_from_json(const nlohmann::json& j);

inline constexpr std::chrono::milliseconds kDefaultCheckTimeout{120000};

struct CheckRequest {
  std::string code;
  Language language = Language::IsabelleHOL;
  std::chrono::milliseconds timeout = kDefaultCheckTimeout;
  // Theory name to use when the code carries no header (Isabelle only).
  std::string theory_name;

  void validate() const;
};

struct CheckOutcome {
  bool passed = false;
  std::vector<Diagnostic> diagnostics;
  std::chrono::milliseconds elapsed{0};
  std::string prover_id;

  // passed is derived: true iff no diagnostic has severity Error.
  static CheckOutcome from_diagnostics(std::vector<Diagnostic> diagnostics, std::string prover_id,
                                       std::chrono::milliseconds elapsed = std::chrono::milliseconds{0});
  // Error messages joined by newlines.
  std::string error_text() const;
  bool operator==(const CheckOutcome&) const = default;
};

// One live connection to a prover. Single consumer: at most one check in flight.
class ProverSession {
 public:
  virtual ~ProverSession() = default;
  virtual CheckOutcome check(const CheckRequest& request) = 0;
  virtual Language language() const = 0;
  virtual std::string id() const = 0;
};

using SessionFactory = std::function<std::unique_ptr<ProverSession>()>;

// Shared pool of lazily opened sessions for one language. Sessions that
// crash or time out are discarded and replaced on next use.
class ProverPool {
 public:
  ProverPool(Language language, SessionFactory factory, std::size_t size = 1,
             std::optional<std::chrono::milliseconds> acquire_timeout = std::nullopt);
  ~ProverPool();

  ProverPool(const ProverPool&) = delete;
  ProverPool& operator=(const ProverPool&) = delete;

  // Throws SessionUnavailable if no session frees up within the acquire
  // timeout (default: the request timeout), ProverTimeout, ProverCrashed,
  // LaunchFailed.
  CheckOutcome check(const CheckRequest& request);

  Language language() const { return language_; }
  std::size_t size() const { return size_; }
  std::size_t sessions_opened() const;
  std::size_t sessions_recycled() const;
  // Id of the sessions this pool hands out, or "" if none opened yet.
  std::string prover_id() const;

 private:
  std::unique_ptr<ProverSession> acquire(std::chrono::milliseconds wait);
  void release(std::unique_ptr<ProverSession> session, bool healthy);

  Language language_;
  SessionFactory factory_;
  std::size_t size_;
  std::optional<std::chrono::milliseconds> acquire_timeout_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::vector<std::unique_ptr<ProverSession>> idle_;
  std::size_t live_ = 0;
  std::size_t opened_ = 0;
  std::size_t recycled_ = 0;
  std::string prover_id_;
};

}  // namespace autoform::provers
