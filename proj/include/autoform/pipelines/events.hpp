#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace autoform::pipelines {

// One line of events.jsonl. Run-level events have an empty item id.
struct Event {
  std::int64_t ts = 0;
  std::string item;
  std::string kind;
  nlohmann::json payload = nlohmann::json::object();

  bool operator==(const Event&) const = default;
};

nlohmann::json to_json(const Event& event);
Event event_from_json(const nlohmann::json& j);
std::string to_line(const Event& event);

using Clock = std::function<std::int64_t()>;

// 1, 2, 3, ... Thread-safe. Makes logs byte-identical across runs.
Clock logical_clock();
// Milliseconds since the Unix epoch.
Clock system_clock();

// Append-only event log. Item events are buffered per item and written in
// dataset order once every earlier item has finished, so the file layout does
// not depend on worker scheduling.
class EventLog {
 public:
  explicit EventLog(Clock clock = logical_clock(), std::optional<std::filesystem::path> file = std::nullopt);

  void run_event(const std::string& kind, nlohmann::json payload);

  class ItemLog {
   public:
    void emit(const std::string& kind, nlohmann::json payload);
    const std::string& item() const { return item_; }

   private:
    friend class EventLog;
    ItemLog(EventLog& owner, std::string item) : owner_(&owner), item_(std::move(item)) {}
    EventLog* owner_;
    std::string item_;
    std::vector<Event> events_;
  };

  // Expected number of items; must be called before the first item.
  void expect_items(std::size_t count);
  ItemLog item(const std::string& id) { return ItemLog(*this, id); }
  void commit(std::size_t index, ItemLog&& log);

  // Everything written so far, in file order.
  std::vector<Event> events() const;

 private:
  void write_locked(const Event& event);

  Clock clock_;
  mutable std::mutex mu_;
  std::ofstream out_;
  std::vector<Event> written_;
  std::map<std::size_t, std::vector<Event>> pending_;
  std::size_t next_commit_ = 0;
};

// Parses an events.jsonl file. Throws CorruptLog (with the 1-based line) on
// malformed or truncated lines.
std::vector<Event> read_event_log(const std::filesystem::path& file);

}  // namespace autoform::pipelines
