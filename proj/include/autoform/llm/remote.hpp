#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <string>

#include "autoform/llm/backend.hpp"

namespace autoform::llm {

struct RemoteConfig {
  // e.g. "https://api.openai.com/v1" or "http://127.0.0.1:8000". A base URL
  // without a path posts to /v1/chat/completions; with a path, to
  // <path>/chat/completions.
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::string id = "remote";
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{1000};
  std::chrono::milliseconds backoff_cap{30000};
  std::chrono::seconds timeout{120};
};

// Client for OpenAI-compatible chat-completion endpoints. Retries 429, 5xx
// and transport failures with exponential backoff; other 4xx fail at once.
class RemoteBackend : public Backend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit RemoteBackend(RemoteConfig config, Sleeper sleeper = {});

  std::string id() const override { return config_.id; }
  std::size_t requests_sent() const { return requests_.load(); }

  // Request body sent for a call (seed omitted when unset).
  static std::string request_body(const std::vector<ChatMessage>& messages, const GenerationParams& params);
  // Extracts choices[0].message.content. Throws BackendError otherwise.
  static std::string parse_response(const std::string& body);

 protected:
  std::string do_complete(const std::vector<ChatMessage>& messages, const GenerationParams& params) override;

 private:
  RemoteConfig config_;
  Sleeper sleeper_;
  std::string scheme_host_port_;
  std::string endpoint_;
  std::atomic<std::size_t> requests_{0};
};

}  // namespace autoform::llm
