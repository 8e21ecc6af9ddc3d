#include "autoform/llm/backend.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>

#include "autoform/core/error.hpp"
#include "autoform/core/text.hpp"

namespace autoform::llm {

using nlohmann::json;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::System:
      return "system";
    case Role::User:
      return "user";
    case Role::Assistant:
      return "assistant";
  }
  return "?";
}

Role parse_role(std::string_view text) {
  if (text == "system") return Role::System;
  if (text == "user") return Role::User;
  if (text == "assistant") return Role::Assistant;
  throw InvariantViolation("unknown chat role '" + std::string(text) + "'");
}

void GenerationParams::validate() const {
  if (!(temperature >= 0.0)) throw InvariantViolation("temperature must be >= 0");
  if (max_tokens < 1) throw InvariantViolation("max_tokens must be >= 1");
}

namespace {

json messages_json(const std::vector<ChatMessage>& messages) {
  json arr = json::array();
  for (const auto& m : messages) arr.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  return arr;
}

json request_json(const std::vector<ChatMessage>& messages, const GenerationParams& params) {
  return json{{"messages", messages_json(messages)},
              {"model", params.model},
              {"temperature", params.temperature},
              {"max_tokens", params.max_tokens},
              {"seed", params.seed ? json(*params.seed) : json(nullptr)}};
}

}  // namespace

nlohmann::json to_json(const ChatExchange& exchange) {
  return json{{"backend_id", exchange.backend_id},
              {"request", request_json(exchange.messages, exchange.params)},
              {"response", exchange.response},
              {"latency_ms", exchange.latency.count()}};
}

std::string canonical_request(const std::vector<ChatMessage>& messages, const GenerationParams& params) {
  return request_json(messages, params).dump();
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string request_key(const std::vector<ChatMessage>& messages, const GenerationParams& params) {
  return sha256_hex(canonical_request(messages, params));
}

JsonlExchangeSink::JsonlExchangeSink(const std::filesystem::path& file) : out_(file, std::ios::app) {
  if (!out_) throw Error("cannot open exchange log " + file.string());
}

void JsonlExchangeSink::record(const ChatExchange& exchange) {
  std::string line = to_json(exchange).dump();
  std::lock_guard lock(mu_);
  out_ << line << '\n';
  out_.flush();
}

std::string Backend::complete(const std::vector<ChatMessage>& messages, const GenerationParams& params) {
  if (messages.empty()) throw InvariantViolation("complete: no messages");
  if (messages.back().role != Role::User) throw InvariantViolation("complete: last message must be from the user");
  for (const auto& m : messages) {
    if (m.role == Role::User && text::trim(m.content).empty()) {
      throw InvariantViolation("complete: empty user message");
    }
  }
  params.validate();
  auto start = std::chrono::steady_clock::now();
  std::string response = do_complete(messages, params);
  if (sink_) {
    sink_->record({messages, params, response,
                   std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start),
                   id()});
  }
  return response;
}

}  // namespace autoform::llm
