#include "autoform/provers/prover.hpp"

#include "autoform/core/error.hpp"
#include "autoform/core/text.hpp"

namespace autoform::provers {

using nlohmann::json;

std::string to_string(Severity s) {
  switch (s) {
    case Severity::Error:
      return "error";
    case Severity::Warning:
      return "warning";
    case Severity::Info:
      return "info";
  }
  return "error";
}

Severity parse_severity(const std::string& s) {
  auto v = text::to_lower(s);
  if (v == "error") return Severity::Error;
  if (v == "warning") return Severity::Warning;
  if (v == "info" || v == "information") return Severity::Info;
  throw ProtocolError("unknown severity '" + s + "'");
}

json to_json(const Diagnostic& d) {
  json j{{"severity", to_string(d.severity)}, {"message", d.message}};
  if (d.position) j["position"] = {{"line", d.position->line}, {"column", d.position->column}};
  return j;
}

Diagnostic diagnostic_from_json(const json& j) {
  Diagnostic d;
  d.severity = parse_severity(j.at("severity").get<std::string>());
  d.message = j.at("message").get<std::string>();
  if (j.contains("position")) {
    d.position = Position{j["position"].at("line").get<std::size_t>(), j["position"].at("column").get<std::size_t>()};
  }
  return d;
}

void CheckRequest::validate() const {
  if (timeout.count() <= 0) throw InvariantViolation("check timeout must be positive");
  if (text::trim(code).empty()) throw InvariantViolation("check request code is empty");
}

CheckOutcome CheckOutcome::from_diagnostics(std::vector<Diagnostic> diagnostics, std::string prover_id,
                                            std::chrono::milliseconds elapsed) {
  CheckOutcome out;
  out.passed = true;
  for (auto& d : diagnostics) {
    if (d.message.empty()) d.message = "(no message)";
    if (d.severity == Severity::Error) out.passed = false;
  }
  out.diagnostics = std::move(diagnostics);
  out.prover_id = std::move(prover_id);
  out.elapsed = elapsed;
  return out;
}

std::string CheckOutcome::error_text() const {
  std::vector<std::string> lines;
  for (const auto& d : diagnostics) {
    if (d.severity == Severity::Error) lines.push_back(d.message);
  }
  return text::join(lines, "\n");
}

ProverPool::ProverPool(Language language, SessionFactory factory, std::size_t size,
                       std::optional<std::chrono::milliseconds> acquire_timeout)
    : language_(language), factory_(std::move(factory)), size_(size), acquire_timeout_(acquire_timeout) {
  if (size_ == 0) throw ConfigError("prover pool size must be >= 1");
  if (!factory_) throw ConfigError("prover pool needs a session factory");
}

ProverPool::~ProverPool() = default;

std::unique_ptr<ProverSession> ProverPool::acquire(std::chrono::milliseconds wait) {
  std::unique_lock lock(mu_);
  bool ok = cv_.wait_for(lock, wait, [&] { return !idle_.empty() || live_ < size_; });
  if (!ok) throw SessionUnavailable("no prover session available (pool size " + std::to_string(size_) + ")");
  if (!idle_.empty()) {
    auto s = std::move(idle_.back());
    idle_.pop_back();
    return s;
  }
  ++live_;
  lock.unlock();
  try {
    auto s = factory_();
    if (s->language() != language_) throw ConfigError("prover session language does not match its pool");
    lock.lock();
    ++opened_;
    prover_id_ = s->id();
    return s;
  } catch (...) {
    if (!lock.owns_lock()) lock.lock();
    --live_;
    cv_.notify_one();
    throw;
  }
}

void ProverPool::release(std::unique_ptr<ProverSession> session, bool healthy) {
  {
    std::lock_guard lock(mu_);
    if (healthy) {
      idle_.push_back(std::move(session));
    } else {
      --live_;
      ++recycled_;
    }
  }
  if (!healthy) session.reset();
  cv_.notify_one();
}

CheckOutcome ProverPool::check(const CheckRequest& request) {
  request.validate();
  if (request.language != language_) {
    throw InvariantViolation("check request for " + std::string(to_string(request.language)) + " sent to " +
                             std::string(to_string(language_)) + " prover");
  }
  auto session = acquire(acquire_timeout_.value_or(request.timeout));
  try {
    auto outcome = session->check(request);
    for (const auto& d : outcome.diagnostics) {
      if (outcome.passed && d.severity == Severity::Error) {
        throw InvariantViolation("prover reported pass with an error diagnostic");
      }
    }
    release(std::move(session), true);
    return outcome;
  } catch (const ProverTimeout&) {
    release(std::move(session), false);
    throw;
  } catch (const ProverCrashed&) {
    release(std::move(session), false);
    throw;
  } catch (const ProtocolError&) {
    release(std::move(session), false);
    throw;
  } catch (...) {
    release(std::move(session), true);
    throw;
  }
}

std::size_t ProverPool::sessions_opened() const {
  std::lock_guard lock(mu_);
  return opened_;
}

std::size_t ProverPool::sessions_recycled() const {
  std::lock_guard lock(mu_);
  return recycled_;
}

std::string ProverPool::prover_id() const {
  std::lock_guard lock(mu_);
  return prover_id_;
}

}  // namespace autoform::provers
