#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace autoform::kb {

// One formal-library entry. Field set follows the knowledge-base dump format;
// fields not listed here are kept in `extra` and written back on output.
struct KbRecord {
  std::string type;
  std::string text;
  std::string statement;
  std::string assumes;
  std::string proof;
  std::vector<std::string> using_facts;
  std::vector<std::string> abs_imports;
  std::string source;
  std::int64_t id = 0;
  nlohmann::json extra = nlohmann::json::object();
};

// Throws std::invalid_argument describing the first schema violation.
KbRecord record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const KbRecord& record);

// Reads a JSON-lines file (blank lines skipped) or a single JSON array.
// Throws ParseError (with line/column) for malformed input and DuplicateId
// for repeated ids.
std::vector<KbRecord> load_kb(const std::filesystem::path& path);
std::vector<KbRecord> parse_kb(std::string_view content);

}  // namespace autoform::kb
