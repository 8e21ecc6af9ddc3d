#include "autoform/pipelines/events.hpp"

#include <atomic>
#include <chrono>

#include "autoform/core/error.hpp"

namespace autoform::pipelines {

nlohmann::json to_json(const Event& event) {
  return {{"ts", event.ts}, {"item", event.item}, {"kind", event.kind}, {"payload", event.payload}};
}

Event event_from_json(const nlohmann::json& j) {
  Event e;
  e.ts = j.at("ts").get<std::int64_t>();
  e.item = j.at("item").get<std::string>();
  e.kind = j.at("kind").get<std::string>();
  e.payload = j.at("payload");
  if (!e.payload.is_object()) throw nlohmann::json::type_error::create(302, "payload must be an object", &j);
  return e;
}

std::string to_line(const Event& event) { return to_json(event).dump(); }

Clock logical_clock() {
  auto counter = std::make_shared<std::atomic<std::int64_t>>(0);
  return [counter] { return ++*counter; };
}

Clock system_clock() {
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

EventLog::EventLog(Clock clock, std::optional<std::filesystem::path> file) : clock_(std::move(clock)) {
  if (file) {
    out_.open(*file, std::ios::out | std::ios::trunc);
    if (!out_) throw ConfigError("cannot write event log " + file->string());
  }
}

void EventLog::write_locked(const Event& event) {
  if (out_.is_open()) {
    out_ << to_line(event) << '\n';
    out_.flush();
  }
  written_.push_back(event);
}

void EventLog::run_event(const std::string& kind, nlohmann::json payload) {
  std::lock_guard lock(mu_);
  write_locked(Event{clock_(), "", kind, std::move(payload)});
}

void EventLog::ItemLog::emit(const std::string& kind, nlohmann::json payload) {
  std::int64_t ts;
  {
    std::lock_guard lock(owner_->mu_);
    ts = owner_->clock_();
  }
  events_.push_back(Event{ts, item_, kind, std::move(payload)});
}

void EventLog::expect_items(std::size_t) {
  std::lock_guard lock(mu_);
  pending_.clear();
  next_commit_ = 0;
}

void EventLog::commit(std::size_t index, ItemLog&& log) {
  std::lock_guard lock(mu_);
  pending_[index] = std::move(log.events_);
  for (auto it = pending_.find(next_commit_); it != pending_.end(); it = pending_.find(next_commit_)) {
    for (const auto& e : it->second) write_locked(e);
    pending_.erase(it);
    ++next_commit_;
  }
}

std::vector<Event> EventLog::events() const {
  std::lock_guard lock(mu_);
  return written_;
}

std::vector<Event> read_event_log(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw CorruptLog("cannot open event log " + file.string(), 0);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<Event> events;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    ++line_no;
    auto nl = content.find('\n', pos);
    if (nl == std::string::npos) throw CorruptLog("truncated event (no line terminator)", line_no);
    std::string_view line(content.data() + pos, nl - pos);
    pos = nl + 1;
    try {
      events.push_back(event_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw CorruptLog(std::string("malformed event: ") + e.what(), line_no);
    }
  }
  return events;
}

}  // namespace autoform::pipelines
