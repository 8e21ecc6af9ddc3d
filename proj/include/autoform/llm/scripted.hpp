#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "autoform/llm/backend.hpp"

namespace autoform::llm {

// One scripted reply. With a key, the reply answers every request whose
// request_key() equals it; without one, it is the next reply in order.
struct ScriptEntry {
  std::optional<std::string> key;
  std::string reply;
};

struct Script {
  std::vector<ScriptEntry> entries;
  std::optional<std::string> id;
};

// Entries as described for ScriptedBackend::from_file.
std::vector<ScriptEntry> parse_entries(const nlohmann::json& entries);
// Throws ConfigError for an unreadable or malformed file.
Script read_script(const std::filesystem::path& file);

// Deterministic backend for hermetic runs. Keyed entries are consulted first
// and may answer repeatedly; ordered entries are consumed one per call.
// Ordered mode is single-consumer: concurrent callers get replies in an
// unspecified order.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::vector<ScriptEntry> script, std::string id = "scripted");

  // JSON file: either an array of entries or {"id": ..., "entries": [...]}.
  // An entry is {"reply": ...} optionally with "key" (hex) or "request"
  // ({"messages": [...], "model", "temperature", "max_tokens", "seed"}) from
  // which the key is computed.
  static ScriptedBackend from_file(const std::filesystem::path& file, std::string id = "scripted");

  std::string id() const override { return id_; }
  bool has_ordered_entries() const { return !ordered_.empty(); }
  std::size_t calls() const;
  std::size_t remaining_ordered() const;

 protected:
  std::string do_complete(const std::vector<ChatMessage>& messages, const GenerationParams& params) override;

 private:
  std::string id_;
  std::map<std::string, std::string> keyed_;
  std::vector<std::string> ordered_;
  mutable std::mutex mu_;
  std::size_t next_ = 0;
  std::size_t calls_ = 0;
};

}  // namespace autoform::llm
