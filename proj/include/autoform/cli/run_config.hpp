#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "autoform/llm/backend.hpp"
#include "autoform/llm/cache.hpp"
#include "autoform/pipelines/pipeline.hpp"
#include "autoform/provers/config.hpp"

namespace autoform::cli {

// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<Language> language;
  std::optional<std::size_t> workers;
  std::optional<double> timeout_s;
  std::optional<std::size_t> top_n;
  // "AF", "FC" or a JSON file holding {"name", "description"}.
  std::optional<std::string> aspect;
};

struct LoadedConfig {
  pipelines::PipelineConfig pipeline;
  std::optional<provers::ProverConfig> prover;
  std::map<std::string, std::shared_ptr<llm::Backend>> backends;
  // The resolved configuration, written to the run directory.
  nlohmann::json snapshot;
  std::vector<std::string> warnings;
  // Event timestamps: "system" (epoch milliseconds) or "logical" (1, 2, ...).
  std::string clock = "system";
};

// Where backends record exchanges and cache responses. Without a run
// directory nothing is persisted.
struct RunFiles {
  std::filesystem::path exchanges;
  std::filesystem::path cache;
};

// Reads the declarative JSON config (see README). Relative paths resolve
// against the config file's directory. Throws ConfigError.
LoadedConfig load_run_config(const std::filesystem::path& path, const Overrides& overrides = {},
                             const std::optional<RunFiles>& files = std::nullopt);
LoadedConfig build_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir,
                              const Overrides& overrides = {}, const std::optional<RunFiles>& files = std::nullopt);

// "AF" / "FC" presets or a JSON file with {"name", "description"}.
AspectDescription resolve_aspect(const std::string& spec, const std::filesystem::path& base_dir = {});

// Forwards to an inner backend with a fixed model name.
class ModelBackend : public llm::Backend {
 public:
  ModelBackend(std::shared_ptr<llm::Backend> inner, std::string model);
  std::string id() const override { return inner_->id(); }

 protected:
  std::string do_complete(const std::vector<llm::ChatMessage>& messages, const llm::GenerationParams& params) override;

 private:
  std::shared_ptr<llm::Backend> inner_;
  std::string model_;
};

}  // namespace autoform::cli
