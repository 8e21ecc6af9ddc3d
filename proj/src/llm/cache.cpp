#include "autoform/llm/cache.hpp"

#include <chrono>
#include <ctime>

#include "autoform/core/error.hpp"

namespace autoform::llm {

using nlohmann::json;

namespace {

std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path file, std::optional<std::filesystem::path> shared_dir) {
  if (shared_dir) {
    std::filesystem::create_directories(*shared_dir);
    auto shared_file = *shared_dir / "cache.jsonl";
    load(shared_file);
    shared_out_.emplace(shared_file, std::ios::app);
  }
  load(file);
  run_out_.open(file, std::ios::app);
  if (!run_out_) throw Error("cannot open cache file " + file.string());
}

void ResponseCache::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) return;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      entries_[j.at("key").get<std::string>()] = j.at("response").get<std::string>();
    } catch (const json::exception& e) {
      // A torn final line from an interrupted run is skipped; anything else is corrupt.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw ParseError("cache " + file.string() + ": " + e.what(), line_no);
    }
  }
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::append(std::ofstream& out, const std::string& line) {
  out << line << '\n';
  out.flush();
}

void ResponseCache::put(const std::string& key, const std::string& canonical_request, const std::string& response,
                        const std::string& model) {
  std::string line = json{{"key", key},
                          {"request", json::parse(canonical_request)},
                          {"response", response},
                          {"model", model},
                          {"timestamp", utc_timestamp()}}
                         .dump();
  std::unique_lock lock(mu_);
  if (!entries_.emplace(key, response).second) return;
  append(run_out_, line);
  if (shared_out_) append(*shared_out_, line);
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

CachedBackend::CachedBackend(std::shared_ptr<Backend> inner, std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::size_t CachedBackend::hits() const {
  std::lock_guard lock(stats_mu_);
  return hits_;
}

std::size_t CachedBackend::misses() const {
  std::lock_guard lock(stats_mu_);
  return misses_;
}

std::string CachedBackend::do_complete(const std::vector<ChatMessage>& messages, const GenerationParams& params) {
  std::string canonical = canonical_request(messages, params);
  std::string key = sha256_hex(canonical);
  if (auto hit = cache_->get(key)) {
    std::lock_guard lock(stats_mu_);
    ++hits_;
    return *hit;
  }
  std::string response = inner_->complete(messages, params);
  cache_->put(key, canonical, response, params.model);
  std::lock_guard lock(stats_mu_);
  ++misses_;
  return response;
}

}  // namespace autoform::llm
