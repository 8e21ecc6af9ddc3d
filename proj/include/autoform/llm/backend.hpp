#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace autoform::llm {

enum class Role { System, User, Assistant };

std::string_view to_string(Role role);
Role parse_role(std::string_view text);

struct ChatMessage {
  Role role = Role::User;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct GenerationParams {
  std::string model;
  double temperature = 0.0;
  int max_tokens = 2048;
  std::optional<std::int64_t> seed;

  void validate() const;
};

struct ChatExchange {
  std::vector<ChatMessage> messages;
  GenerationParams params;
  std::string response;  // verbatim
  std::chrono::milliseconds latency{0};
  std::string backend_id;
};

nlohmann::json to_json(const ChatExchange& exchange);

// Canonical JSON of a request: sorted keys, compact. Two requests differing
// in any of messages/model/temperature/max_tokens/seed differ here.
std::string canonical_request(const std::vector<ChatMessage>& messages, const GenerationParams& params);

// SHA-256 (lowercase hex) of canonical_request.
std::string request_key(const std::vector<ChatMessage>& messages, const GenerationParams& params);

std::string sha256_hex(std::string_view data);

class ExchangeSink {
 public:
  virtual ~ExchangeSink() = default;
  virtual void record(const ChatExchange& exchange) = 0;
};

// Appends one JSON object per exchange. Thread-safe.
class JsonlExchangeSink : public ExchangeSink {
 public:
  explicit JsonlExchangeSink(const std::filesystem::path& file);
  void record(const ChatExchange& exchange) override;

 private:
  std::mutex mu_;
  std::ofstream out_;
};

// Abstract chat-completion backend. complete() validates the request, calls
// the implementation and reports the exchange to the attached sink.
// Implementations must tolerate concurrent calls unless documented otherwise.
class Backend {
 public:
  virtual ~Backend() = default;

  std::string complete(const std::vector<ChatMessage>& messages, const GenerationParams& params);

  virtual std::string id() const = 0;

  void set_exchange_sink(std::shared_ptr<ExchangeSink> sink) { sink_ = std::move(sink); }

 protected:
  virtual std::string do_complete(const std::vector<ChatMessage>& messages, const GenerationParams& params) = 0;

 private:
  std::shared_ptr<ExchangeSink> sink_;
};

}  // namespace autoform::llm
