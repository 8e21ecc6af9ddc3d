#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "autoform/llm/backend.hpp"

namespace autoform::llm {

// Content-addressed response store backed by append-only JSON-lines files
// ({key, request, response, model, timestamp} per line). Existing files are
// loaded on construction, so a run can resume from a previous cache. An
// optional shared directory holds a second cache.jsonl that is read and
// appended alongside the run file.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path file, std::optional<std::filesystem::path> shared_dir = std::nullopt);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& canonical_request, const std::string& response,
           const std::string& model);
  std::size_t size() const;

 private:
  void load(const std::filesystem::path& file);
  void append(std::ofstream& out, const std::string& line);

  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
  std::ofstream run_out_;
  std::optional<std::ofstream> shared_out_;
};

// Answers from the cache when possible; otherwise forwards to the inner
// backend and stores the reply.
class CachedBackend : public Backend {
 public:
  CachedBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ResponseCache> cache);

  std::string id() const override { return "cached:" + inner_->id(); }
  std::size_t hits() const;
  std::size_t misses() const;

 protected:
  std::string do_complete(const std::vector<ChatMessage>& messages, const GenerationParams& params) override;

 private:
  std::shared_ptr<Backend> inner_;
  std::shared_ptr<ResponseCache> cache_;
  mutable std::mutex stats_mu_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace autoform::llm
