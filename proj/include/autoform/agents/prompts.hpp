#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "autoform/core/types.hpp"

namespace autoform::agents {

// Template file layout:
//   version: N        (optional first line)
//   [system]
//   ...text with {holes}...
//   [user]
//   ...text with {holes}...
struct PromptTemplate {
  std::string name;
  int version = 1;
  std::string system;
  std::string user;

  struct Rendered {
    std::string system;
    std::string user;
  };

  // Throws TemplateError for unbound holes or an empty rendered part.
  Rendered render(const std::map<std::string, std::string>& bindings) const;
  std::vector<std::string> holes() const;
};

// Throws ConfigError when a section is missing.
PromptTemplate parse_prompt_template(std::string name, std::string_view content);

class PromptLibrary {
 public:
  // The shipped templates: zero_shot, few_shot, judge, formal_refine,
  // informal_refine.
  static PromptLibrary builtin();

  // Each NAME.txt in dir replaces (or adds) the template NAME.
  void load_dir(const std::filesystem::path& dir);
  void set(PromptTemplate tmpl);
  // Throws ConfigError for unknown names.
  const PromptTemplate& get(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, PromptTemplate> templates_;
};

const PromptLibrary& default_prompts();

// Numbered informal/formal blocks, in order.
std::string render_exemplars(const std::vector<ExemplarPair>& exemplars);

// Aspect file: JSON array of {"name", "description"}. Throws ConfigError.
std::vector<AspectDescription> load_aspects(const std::filesystem::path& path);

}  // namespace autoform::agents
