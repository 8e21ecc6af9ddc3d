#include "autoform/llm/remote.hpp"

#include <httplib.h>

#include <algorithm>
#include <thread>

#include "autoform/core/error.hpp"
#include "autoform/core/text.hpp"

namespace autoform::llm {

using nlohmann::json;

namespace {

bool looks_like_context_overflow(const std::string& body) {
  std::string lower = text::to_lower(body);
  return lower.find("context_length") != std::string::npos || lower.find("maximum context length") != std::string::npos ||
         lower.find("context length") != std::string::npos;
}

}  // namespace

RemoteBackend::RemoteBackend(RemoteConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (config_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  const std::string& url = config_.base_url;
  std::size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base_url needs a scheme: " + url);
  std::size_t path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  endpoint_ = path.empty() ? "/v1/chat/completions" : path + "/chat/completions";
}

std::string RemoteBackend::request_body(const std::vector<ChatMessage>& messages, const GenerationParams& params) {
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  json body{{"model", params.model},
            {"messages", msgs},
            {"temperature", params.temperature},
            {"max_tokens", params.max_tokens}};
  if (params.seed) body["seed"] = *params.seed;
  return body.dump();
}

std::string RemoteBackend::parse_response(const std::string& body) {
  try {
    json j = json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return "";
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed chat-completion response: ") + e.what());
  }
}

std::string RemoteBackend::do_complete(const std::vector<ChatMessage>& messages, const GenerationParams& params) {
  std::string body = request_body(messages, params);
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count());
  client.set_read_timeout(config_.timeout.count());
  client.set_write_timeout(config_.timeout.count());
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  std::string last_failure;
  bool rate_limited = false;
  for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
    if (attempt > 0) {
      auto delay = config_.backoff_base * (1LL << std::min(attempt - 1, 30));
      sleeper_(std::min<std::chrono::milliseconds>(delay, config_.backoff_cap));
    }
    ++requests_;
    auto res = client.Post(endpoint_, headers, body, "application/json");
    if (!res) {
      rate_limited = false;
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return parse_response(res->body);
    if (res->status == 429) {
      rate_limited = true;
      last_failure = "HTTP 429: " + res->body;
      continue;
    }
    if (res->status >= 500) {
      rate_limited = false;
      last_failure = "HTTP " + std::to_string(res->status) + ": " + res->body;
      continue;
    }
    if ((res->status == 400 || res->status == 413) && looks_like_context_overflow(res->body)) {
      throw ContextOverflow("request rejected for length: " + res->body);
    }
    throw BackendError("HTTP " + std::to_string(res->status) + " from " + config_.id + ": " + res->body);
  }
  std::string msg = config_.id + " failed after " + std::to_string(config_.max_attempts) + " attempts: " + last_failure;
  if (rate_limited) throw RateLimited(msg);
  throw BackendUnavailable(msg);
}

}  // namespace autoform::llm
