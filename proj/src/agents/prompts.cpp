#include "autoform/agents/prompts.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "autoform/core/error.hpp"
#include "autoform/core/text.hpp"
#include "generated/builtin_prompts.hpp"

namespace autoform::agents {

PromptTemplate::Rendered PromptTemplate::render(const std::map<std::string, std::string>& bindings) const {
  Rendered r{text::render_holes(system, bindings), text::render_holes(user, bindings)};
  if (text::trim(r.system).empty() || text::trim(r.user).empty()) {
    throw TemplateError("prompt '" + name + "' rendered to an empty message");
  }
  return r;
}

std::vector<std::string> PromptTemplate::holes() const {
  auto names = text::hole_names(system);
  for (auto& h : text::hole_names(user)) {
    if (std::find(names.begin(), names.end(), h) == names.end()) names.push_back(h);
  }
  return names;
}

PromptTemplate parse_prompt_template(std::string name, std::string_view content) {
  PromptTemplate t;
  t.name = std::move(name);
  enum { None, System, User } section = None;
  std::vector<std::string> sys, usr;
  bool seen_system = false, seen_user = false;
  for (auto line : text::split_lines(content)) {
    auto trimmed = text::trim(line);
    if (section == None && trimmed.rfind("version:", 0) == 0) {
      try {
        t.version = std::stoi(std::string(text::trim(trimmed.substr(8))));
      } catch (const std::exception&) {
        throw ConfigError("prompt '" + t.name + "': bad version line");
      }
      continue;
    }
    if (trimmed == "[system]") {
      section = System;
      seen_system = true;
      continue;
    }
    if (trimmed == "[user]") {
      section = User;
      seen_user = true;
      continue;
    }
    if (section == System) sys.emplace_back(line);
    if (section == User) usr.emplace_back(line);
  }
  if (!seen_system || !seen_user) throw ConfigError("prompt '" + t.name + "' needs [system] and [user] sections");
  t.system = std::string(text::trim(text::join(sys, "\n")));
  t.user = std::string(text::trim(text::join(usr, "\n")));
  return t;
}

PromptLibrary PromptLibrary::builtin() {
  PromptLibrary lib;
  for (const auto& [name, content] : detail::kBuiltinPrompts) lib.set(parse_prompt_template(std::string(name), content));
  return lib;
}

void PromptLibrary::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("prompt directory not found: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    set(parse_prompt_template(entry.path().stem().string(), ss.str()));
  }
}

void PromptLibrary::set(PromptTemplate tmpl) {
  auto name = tmpl.name;
  templates_[name] = std::move(tmpl);
}

const PromptTemplate& PromptLibrary::get(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw ConfigError("unknown prompt template '" + name + "'");
  return it->second;
}

std::vector<std::string> PromptLibrary::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : templates_) out.push_back(name);
  return out;
}

const PromptLibrary& default_prompts() {
  static const PromptLibrary lib = PromptLibrary::builtin();
  return lib;
}

std::string render_exemplars(const std::vector<ExemplarPair>& exemplars) {
  std::string out;
  for (std::size_t i = 0; i < exemplars.size(); ++i) {
    if (i) out += "\n\n";
    out += "Example " + std::to_string(i + 1) + "\nStatement:\n" + exemplars[i].informal + "\nFormalization:\n```\n" +
           exemplars[i].formal + "\n```";
  }
  return out;
}

std::vector<AspectDescription> load_aspects(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open aspect file " + path.string());
  std::vector<AspectDescription> out;
  try {
    auto j = nlohmann::json::parse(in);
    if (!j.is_array()) throw ConfigError("aspect file must hold a JSON array");
    for (const auto& a : j) {
      AspectDescription d{a.at("name").get<std::string>(), a.at("description").get<std::string>()};
      d.validate();
      out.push_back(std::move(d));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("aspect file " + path.string() + ": " + e.what());
  } catch (const InvariantViolation& e) {
    throw ConfigError("aspect file " + path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace autoform::agents
