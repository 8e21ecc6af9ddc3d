#include "autoform/kb/record.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "autoform/core/error.hpp"
#include "autoform/core/text.hpp"

namespace autoform::kb {

using nlohmann::json;

namespace {

const std::set<std::string> kKnownFields{"type", "text", "statement", "assumes", "proof",
                                         "using", "abs_imports", "source", "id"};

std::string opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return "";
  if (!j[key].is_string()) throw std::invalid_argument(std::string("field '") + key + "' must be a string");
  return j[key].get<std::string>();
}

std::vector<std::string> opt_strings(const json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key) || j[key].is_null()) return out;
  if (!j[key].is_array()) throw std::invalid_argument(std::string("field '") + key + "' must be an array");
  for (const auto& v : j[key]) {
    if (!v.is_string()) throw std::invalid_argument(std::string("field '") + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

bool valid_import_path(const std::string& s) {
  if (s.empty() || s.front() == '.' || s.back() == '.') return false;
  for (char c : s) {
    if (!(text::is_ident_char(c) || c == '.' || c == '-' || c == '/')) return false;
  }
  return s.find("..") == std::string::npos;
}

// 1-based line and column of a byte offset.
std::pair<std::size_t, std::size_t> locate(std::string_view content, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < content.size(); ++i) {
    if (content[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

KbRecord record_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
  KbRecord r;
  r.type = opt_string(j, "type");
  r.text = opt_string(j, "text");
  r.statement = opt_string(j, "statement");
  if (text::trim(r.statement).empty()) throw std::invalid_argument("field 'statement' is missing or empty");
  r.assumes = opt_string(j, "assumes");
  r.proof = opt_string(j, "proof");
  r.using_facts = opt_strings(j, "using");
  r.abs_imports = opt_strings(j, "abs_imports");
  for (const auto& imp : r.abs_imports) {
    if (!valid_import_path(imp)) throw std::invalid_argument("invalid import path '" + imp + "'");
  }
  r.source = opt_string(j, "source");
  if (!j.contains("id") || !j["id"].is_number_integer()) throw std::invalid_argument("field 'id' must be an integer");
  r.id = j["id"].get<std::int64_t>();
  for (const auto& [key, value] : j.items()) {
    if (!kKnownFields.count(key)) r.extra[key] = value;
  }
  return r;
}

json to_json(const KbRecord& r) {
  json j = r.extra;
  j["type"] = r.type;
  j["text"] = r.text;
  j["statement"] = r.statement;
  j["assumes"] = r.assumes;
  j["proof"] = r.proof;
  j["using"] = r.using_facts;
  j["abs_imports"] = r.abs_imports;
  j["source"] = r.source;
  j["id"] = r.id;
  return j;
}

std::vector<KbRecord> parse_kb(std::string_view content) {
  std::vector<KbRecord> records;
  std::set<std::int64_t> ids;
  auto add = [&](const json& j, std::size_t line) {
    KbRecord r;
    try {
      r = record_from_json(j);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line);
    }
    if (!ids.insert(r.id).second) {
      throw DuplicateId("duplicate knowledge-base id " + std::to_string(r.id) + " at line " + std::to_string(line));
    }
    records.push_back(std::move(r));
  };

  std::string_view body = text::trim_left(content);
  if (!body.empty() && body.front() == '[') {
    json doc;
    try {
      doc = json::parse(content);
    } catch (const json::parse_error& e) {
      auto [line, col] = locate(content, e.byte == 0 ? 0 : e.byte - 1);
      throw ParseError(e.what(), line, col);
    }
    // Records in an array are located by their ordinal position.
    std::size_t index = 0;
    for (const auto& j : doc) add(j, ++index);
    return records;
  }

  std::size_t line_no = 0;
  for (std::string_view line : text::split_lines(content)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(e.what(), line_no, e.byte == 0 ? 1 : e.byte);
    }
    add(j, line_no);
  }
  return records;
}

std::vector<KbRecord> load_kb(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open knowledge base " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_kb(ss.str());
}

}  // namespace autoform::kb
