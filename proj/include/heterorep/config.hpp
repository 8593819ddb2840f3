#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heterorep/analysis.hpp"
#include "heterorep/corpus.hpp"
#include "heterorep/kgrep.hpp"
#include "heterorep/learners.hpp"
#include "heterorep/metrics.hpp"
#include "heterorep/stacking.hpp"
#include "heterorep/textrep.hpp"

namespace heterorep {

struct DatasetConfig {
  std::string name = "dataset";
  FileFormat format = FileFormat::Tsv;
  Schema schema;
  std::array<std::filesystem::path, 3> splits;  // train, validation, test
  std::optional<std::string> positive_label;
  Averaging averaging = Averaging::Weighted;
  std::vector<std::string> labels;  // fixed label order; empty = order of first appearance
};

enum class BuilderKind { Stylometric, Lsa, Kg, KgEntity, External };
std::string_view to_string(BuilderKind b);
BuilderKind parse_builder_kind(std::string_view s);

struct BlockConfig {
  std::string name;
  BlockKind kind = BlockKind::Text;
  BuilderKind builder = BuilderKind::External;
  // stylometric
  StyloProfile profile = StyloProfile::Full16;
  // lsa
  LsaConfig lsa;
  // kg / kg-entity
  std::filesystem::path entities;
  MatchOptions match;
  // external: may contain "{split}", otherwise ".<split>.drm" is appended
  std::string path;
};

struct AnalysisConfig {
  std::size_t k = 200;
  int bins = 16;
  double sample_fraction = 0.1;
  std::size_t min_rows_for_sampling = 1000;
  std::vector<double> c_grid{1.0, 0.1, 0.01, 0.001};
  std::size_t top_k_words = 10;
  std::size_t top_k_concepts = 10;
  std::string ranking_scenario;  // empty = every block
  std::filesystem::path stats_entities;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  DatasetConfig dataset;
  std::vector<BlockConfig> blocks;
  std::map<std::string, std::vector<std::string>> scenarios;
  std::vector<LearnerGrid> learners;
  AnalysisConfig analysis;
  std::filesystem::path base_dir;  // relative paths resolve against this

  const BlockConfig* find_block(std::string_view name) const;
  std::filesystem::path resolve(const std::filesystem::path& p) const;
  // DRM path of a block for one split.
  std::filesystem::path block_path(const BlockConfig& block, SplitName split) const;
};

// JSON config. Throws ParameterError on malformed content.
ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Paths exist, names are unique, scenario blocks are declared.
void validate_config(const ExperimentConfig& config);

// "name=path:kind"
BlockConfig parse_block_flag(std::string_view flag);

}  // namespace heterorep
