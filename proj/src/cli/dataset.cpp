#include "autoform/cli/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "autoform/core/error.hpp"
#include "autoform/core/text.hpp"
#include "autoform/pipelines/pipeline.hpp"

namespace autoform::cli {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <class F>
void for_each_object(std::string_view content, F&& f) {
  std::size_t line_no = 0;
  for (const auto& raw : text::split_lines(content)) {
    ++line_no;
    if (text::trim(raw).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!j.is_object()) throw ParseError("expected a JSON object", line_no);
    f(j, line_no);
  }
}

std::string required_string(const nlohmann::json& j, const char* key, std::size_t line) {
  if (!j.contains(key) || j[key].is_null()) throw MissingField(std::string("missing field \"") + key + "\"", line);
  if (!j[key].is_string()) throw ParseError(std::string("field \"") + key + "\" must be a string", line);
  auto value = j[key].get<std::string>();
  if (text::trim(value).empty()) throw ParseError(std::string("field \"") + key + "\" is empty", line);
  return value;
}

}  // namespace

std::vector<DatasetEntry> parse_dataset(std::string_view content, Language language) {
  std::vector<DatasetEntry> out;
  std::set<std::string> ids;
  for_each_object(content, [&](const nlohmann::json& j, std::size_t line) {
    DatasetEntry e;
    e.id = required_string(j, "id", line);
    e.informal = required_string(j, "informal", line);
    if (j.contains("formal") && !j["formal"].is_null()) e.ground_truth = required_string(j, "formal", line);
    if (j.contains("split") && !j["split"].is_null()) e.split = required_string(j, "split", line);
    e.language = language;
    if (!ids.insert(e.id).second) throw DuplicateId("line " + std::to_string(line) + ": duplicate id '" + e.id + "'");
    out.push_back(std::move(e));
  });
  return out;
}

std::vector<DatasetEntry> load_dataset(const std::filesystem::path& path, Language language) {
  return parse_dataset(read_file(path), language);
}

std::vector<InformalStatement> to_statements(const std::vector<DatasetEntry>& entries) {
  std::vector<InformalStatement> out;
  for (const auto& e : entries) {
    InformalStatement s{e.id, e.informal, {}};
    if (e.ground_truth) s.metadata[pipelines::kGroundTruthKey] = *e.ground_truth;
    if (!e.split.empty()) s.metadata["split"] = e.split;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<ExemplarPair> load_exemplars(const std::filesystem::path& path, Language language) {
  std::vector<ExemplarPair> out;
  for_each_object(read_file(path), [&](const nlohmann::json& j, std::size_t line) {
    out.push_back({required_string(j, "informal", line), required_string(j, "formal", line), language});
  });
  return out;
}

}  // namespace autoform::cli
