#include "autoform/llm/scripted.hpp"

#include <fstream>

#include "autoform/core/error.hpp"

namespace autoform::llm {

using nlohmann::json;

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> script, std::string id) : id_(std::move(id)) {
  for (auto& e : script) {
    if (e.key) {
      keyed_[*e.key] = std::move(e.reply);
    } else {
      ordered_.push_back(std::move(e.reply));
    }
  }
}

Script read_script(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open script " + file.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("script " + file.string() + ": " + e.what());
  }
  Script out;
  try {
    const json& entries = doc.is_array() ? doc : doc.at("entries");
    if (doc.is_object() && doc.contains("id")) out.id = doc["id"].get<std::string>();
    out.entries = parse_entries(entries);
  } catch (const json::exception& e) {
    throw ConfigError("script " + file.string() + ": " + e.what());
  }
  return out;
}

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& file, std::string id) {
  auto script = read_script(file);
  return ScriptedBackend(std::move(script.entries), script.id.value_or(std::move(id)));
}

std::vector<ScriptEntry> parse_entries(const nlohmann::json& entries) {
  std::vector<ScriptEntry> script;
  for (const auto& e : entries) {
    ScriptEntry entry;
    entry.reply = e.at("reply").get<std::string>();
    if (e.contains("key")) {
      entry.key = e["key"].get<std::string>();
    } else if (e.contains("request")) {
      const auto& r = e["request"];
      std::vector<ChatMessage> messages;
      for (const auto& m : r.at("messages")) {
        messages.push_back({parse_role(m.at("role").get<std::string>()), m.at("content").get<std::string>()});
      }
      GenerationParams p;
      p.model = r.value("model", "");
      p.temperature = r.value("temperature", 0.0);
      p.max_tokens = r.value("max_tokens", 2048);
      if (r.contains("seed") && !r["seed"].is_null()) p.seed = r["seed"].get<std::int64_t>();
      entry.key = request_key(messages, p);
    }
    script.push_back(std::move(entry));
  }
  return script;
}

std::size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::size_t ScriptedBackend::remaining_ordered() const {
  std::lock_guard lock(mu_);
  return ordered_.size() - next_;
}

std::string ScriptedBackend::do_complete(const std::vector<ChatMessage>& messages, const GenerationParams& params) {
  std::lock_guard lock(mu_);
  ++calls_;
  if (!keyed_.empty()) {
    auto it = keyed_.find(request_key(messages, params));
    if (it != keyed_.end()) return it->second;
  }
  if (next_ >= ordered_.size()) {
    throw ScriptExhausted("scripted backend '" + id_ + "' exhausted after " + std::to_string(ordered_.size()) +
                          " ordered replies (call " + std::to_string(calls_) + ")");
  }
  return ordered_[next_++];
}

}  // namespace autoform::llm
