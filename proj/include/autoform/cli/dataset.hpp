#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "autoform/core/types.hpp"

namespace autoform::cli {

struct DatasetEntry {
  std::string id;
  std::string informal;
  std::optional<std::string> ground_truth;
  Language language = Language::IsabelleHOL;
  std::string split;
};

// JSON lines {"id", "informal", "formal"?, "split"?}; blank lines are
// skipped. Throws ParseError / MissingField with the 1-based line, and
// DuplicateId.
std::vector<DatasetEntry> load_dataset(const std::filesystem::path& path, Language language);
std::vector<DatasetEntry> parse_dataset(std::string_view content, Language language);

// Ground truth and split go into the statement metadata.
std::vector<InformalStatement> to_statements(const std::vector<DatasetEntry>& entries);

// JSON lines {"informal", "formal"} used as few-shot exemplars.
std::vector<ExemplarPair> load_exemplars(const std::filesystem::path& path, Language language);

}  // namespace autoform::cli
