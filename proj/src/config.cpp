#include "heterorep/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "heterorep/error.hpp"

namespace heterorep {

using nlohmann::json;

namespace {

void allow_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) throw ParameterError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ParameterError(std::string(where) + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ParameterError(std::string(where) + "." + key + ": wrong type");
  }
}

std::string get_string(const json& obj, const char* key, std::string_view where) {
  std::string s;
  read(obj, key, s, where);
  return s;
}

void parse_range(const json& obj, const char* key, NgramRange& r, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_array() || it->size() != 2) throw ParameterError(std::string(where) + "." + key + ": expected [min, max]");
  r.min = (*it)[0].get<int>();
  r.max = (*it)[1].get<int>();
  if (r.min < 1 || r.max < r.min) throw ParameterError(std::string(where) + "." + key + ": invalid range");
}

DatasetConfig parse_dataset(const json& j) {
  allow_keys(j, "dataset", {"name", "format", "schema", "train", "validation", "test", "positive_label", "averaging",
                            "labels"});
  DatasetConfig d;
  read(j, "name", d.name, "dataset");
  if (j.contains("format")) d.format = parse_file_format(get_string(j, "format", "dataset"));
  if (j.contains("schema")) {
    const auto& s = j["schema"];
    allow_keys(s, "dataset.schema", {"id", "text", "label", "metadata", "concat_by_id"});
    read(s, "id", d.schema.id_column, "dataset.schema");
    read(s, "text", d.schema.text_column, "dataset.schema");
    read(s, "label", d.schema.label_column, "dataset.schema");
    read(s, "metadata", d.schema.metadata_columns, "dataset.schema");
    read(s, "concat_by_id", d.schema.concat_by_id, "dataset.schema");
  }
  const char* names[] = {"train", "validation", "test"};
  for (int i = 0; i < 3; ++i) {
    if (!j.contains(names[i])) throw ParameterError(std::string("dataset.") + names[i] + " is required");
    d.splits[static_cast<std::size_t>(i)] = get_string(j, names[i], "dataset");
  }
  if (j.contains("positive_label")) d.positive_label = get_string(j, "positive_label", "dataset");
  if (j.contains("averaging")) d.averaging = parse_averaging(get_string(j, "averaging", "dataset"));
  read(j, "labels", d.labels, "dataset");
  return d;
}

BlockConfig parse_block(const json& j, std::uint64_t seed) {
  allow_keys(j, "block", {"name", "kind", "builder", "profile", "dim", "word_features", "char_features", "word_range",
                          "char_range", "power_iterations", "oversample", "entities", "longest_only", "multiset",
                          "path"});
  BlockConfig b;
  b.name = get_string(j, "name", "block");
  if (b.name.empty()) throw ParameterError("block.name is required");
  const std::string where = "block '" + b.name + "'";
  if (!j.contains("builder")) throw ParameterError(where + ": builder is required");
  b.builder = parse_builder_kind(get_string(j, "builder", where));
  switch (b.builder) {
    case BuilderKind::Stylometric:
    case BuilderKind::Lsa: b.kind = BlockKind::Text; break;
    case BuilderKind::Kg: b.kind = BlockKind::Kg; break;
    case BuilderKind::KgEntity: b.kind = BlockKind::KgEntity; break;
    case BuilderKind::External: b.kind = BlockKind::Text; break;
  }
  if (j.contains("kind")) b.kind = parse_block_kind(get_string(j, "kind", where));
  if (j.contains("profile")) b.profile = parse_stylo_profile(get_string(j, "profile", where));
  read(j, "dim", b.lsa.svd_dim, where);
  read(j, "word_features", b.lsa.tfidf.n_word_features, where);
  read(j, "char_features", b.lsa.tfidf.n_char_features, where);
  parse_range(j, "word_range", b.lsa.tfidf.word_range, where);
  parse_range(j, "char_range", b.lsa.tfidf.char_range, where);
  read(j, "power_iterations", b.lsa.power_iterations, where);
  read(j, "oversample", b.lsa.oversample, where);
  b.lsa.seed = seed;
  b.entities = get_string(j, "entities", where);
  read(j, "longest_only", b.match.longest_only, where);
  read(j, "multiset", b.match.multiset, where);
  read(j, "path", b.path, where);
  if ((b.builder == BuilderKind::Kg || b.builder == BuilderKind::KgEntity) && b.entities.empty())
    throw ParameterError(where + ": entities file is required");
  if (b.builder == BuilderKind::External && b.path.empty()) throw ParameterError(where + ": path is required");
  return b;
}

template <typename T>
void read_list(const json& j, const char* key, std::vector<T>& out, std::string_view where) {
  if (!j.contains(key)) return;
  read(j, key, out, where);
  if (out.empty()) throw ParameterError(std::string(where) + "." + key + ": empty list");
}

LearnerGrid parse_learner(const json& j) {
  allow_keys(j, "learner", {"family", "l2_lambda", "l1_ratio", "power_t", "alpha", "loss", "eta0", "max_epochs", "tol",
                            "arch", "widths", "lnn_n", "fivenet_widths", "lr", "dropout", "batch_size", "patience"});
  LearnerGrid g;
  if (!j.contains("family")) throw ParameterError("learner.family is required");
  g.family = parse_learner_family(get_string(j, "family", "learner"));
  const std::string where = "learner '" + std::string(to_string(g.family)) + "'";
  read_list(j, "l2_lambda", g.l2_lambda, where);
  read_list(j, "l1_ratio", g.l1_ratio, where);
  read_list(j, "power_t", g.power_t, where);
  read_list(j, "alpha", g.alpha, where);
  if (j.contains("loss")) {
    std::vector<std::string> losses;
    read_list(j, "loss", losses, where);
    g.losses.clear();
    for (const auto& l : losses) {
      if (l == "log") g.losses.push_back(SgdLoss::Log);
      else if (l == "hinge") g.losses.push_back(SgdLoss::Hinge);
      else throw ParameterError(where + ": unknown loss '" + l + "'");
    }
  }
  read(j, "eta0", g.linear_base.eta0, where);
  read(j, "tol", g.linear_base.tol, where);
  if (j.contains("arch")) g.arch = parse_mlp_arch(get_string(j, "arch", where));
  read_list(j, "widths", g.snn_widths, where);
  read_list(j, "lnn_n", g.lnn_n, where);
  read_list(j, "fivenet_widths", g.mlp_base.fivenet_widths, where);
  read_list(j, "lr", g.lr, where);
  read_list(j, "dropout", g.dropout, where);
  read(j, "batch_size", g.mlp_base.batch_size, where);
  read(j, "patience", g.mlp_base.patience, where);
  if (j.contains("max_epochs")) {
    int e = 0;
    read(j, "max_epochs", e, where);
    if (e < 1) throw ParameterError(where + ": max_epochs must be positive");
    g.linear_base.max_epochs = e;
    g.mlp_base.max_epochs = e;
  }
  return g;
}

AnalysisConfig parse_analysis(const json& j) {
  allow_keys(j, "analysis", {"k", "bins", "sample_fraction", "min_rows_for_sampling", "c_grid", "top_k_words",
                             "top_k_concepts", "ranking_scenario", "stats_entities"});
  AnalysisConfig a;
  read(j, "k", a.k, "analysis");
  read(j, "bins", a.bins, "analysis");
  read(j, "sample_fraction", a.sample_fraction, "analysis");
  read(j, "min_rows_for_sampling", a.min_rows_for_sampling, "analysis");
  read_list(j, "c_grid", a.c_grid, "analysis");
  read(j, "top_k_words", a.top_k_words, "analysis");
  read(j, "top_k_concepts", a.top_k_concepts, "analysis");
  read(j, "ranking_scenario", a.ranking_scenario, "analysis");
  a.stats_entities = get_string(j, "stats_entities", "analysis");
  if (a.bins < 2) throw ParameterError("analysis.bins must be at least 2");
  if (!(a.sample_fraction > 0.0 && a.sample_fraction <= 1.0))
    throw ParameterError("analysis.sample_fraction must be in (0, 1]");
  return a;
}

}  // namespace

std::string_view to_string(BuilderKind b) {
  switch (b) {
    case BuilderKind::Stylometric: return "stylometric";
    case BuilderKind::Lsa: return "lsa";
    case BuilderKind::Kg: return "kg";
    case BuilderKind::KgEntity: return "kg-entity";
    case BuilderKind::External: return "external";
  }
  return "external";
}

BuilderKind parse_builder_kind(std::string_view s) {
  if (s == "stylometric") return BuilderKind::Stylometric;
  if (s == "lsa") return BuilderKind::Lsa;
  if (s == "kg") return BuilderKind::Kg;
  if (s == "kg-entity") return BuilderKind::KgEntity;
  if (s == "external") return BuilderKind::External;
  throw ParameterError("unknown block builder '" + std::string(s) + "'");
}

const BlockConfig* ExperimentConfig::find_block(std::string_view name) const {
  for (const auto& b : blocks)
    if (b.name == name) return &b;
  return nullptr;
}

std::filesystem::path ExperimentConfig::resolve(const std::filesystem::path& p) const {
  if (p.empty() || p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

std::filesystem::path ExperimentConfig::block_path(const BlockConfig& block, SplitName split) const {
  const std::string s(to_string(split));
  if (block.builder != BuilderKind::External) return out / "blocks" / (block.name + "." + s + ".drm");
  std::string p = block.path;
  if (auto pos = p.find("{split}"); pos != std::string::npos) p.replace(pos, 7, s);
  else p += "." + s + ".drm";
  return resolve(p);
}

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("config is not valid JSON: ") + e.what());
  }
  allow_keys(j, "config", {"seed", "out", "dataset", "blocks", "scenarios", "learners", "analysis"});
  ExperimentConfig c;
  c.base_dir = base_dir;
  if (!j.contains("seed")) throw ParameterError("config: seed is required");
  read(j, "seed", c.seed, "config");
  if (j.contains("out")) c.out = get_string(j, "out", "config");
  if (!j.contains("dataset")) throw ParameterError("config: dataset is required");
  c.dataset = parse_dataset(j["dataset"]);
  for (auto& p : c.dataset.splits) p = c.resolve(p);
  if (j.contains("blocks")) {
    if (!j["blocks"].is_array()) throw ParameterError("config.blocks: expected a list");
    for (const auto& b : j["blocks"]) {
      auto block = parse_block(b, c.seed);
      block.entities = c.resolve(block.entities);
      c.blocks.push_back(std::move(block));
    }
  }
  read(j, "scenarios", c.scenarios, "config");
  if (j.contains("learners")) {
    if (!j["learners"].is_array()) throw ParameterError("config.learners: expected a list");
    for (const auto& l : j["learners"]) c.learners.push_back(parse_learner(l));
  } else {
    c.learners.emplace_back();
  }
  if (j.contains("analysis")) c.analysis = parse_analysis(j["analysis"]);
  c.analysis.stats_entities = c.resolve(c.analysis.stats_entities);
  c.out = c.resolve(c.out);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot read config: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

void validate_config(const ExperimentConfig& config) {
  for (const auto& p : config.dataset.splits)
    if (!std::filesystem::exists(p)) throw ParameterError("dataset file not found: " + p.string());
  std::set<std::string> names;
  for (const auto& b : config.blocks) {
    if (!names.insert(b.name).second) throw ParameterError("duplicate block name '" + b.name + "'");
    if (!b.entities.empty() && !std::filesystem::exists(b.entities))
      throw ParameterError("entity file not found: " + b.entities.string());
  }
  for (const auto& [name, blocks] : config.scenarios) {
    if (blocks.empty()) throw ParameterError("scenario '" + name + "' has no blocks");
    for (const auto& b : blocks)
      if (!names.count(b)) throw ParameterError("scenario '" + name + "' uses undeclared block '" + b + "'");
  }
}

BlockConfig parse_block_flag(std::string_view flag) {
  const auto eq = flag.find('=');
  const auto colon = flag.rfind(':');
  if (eq == std::string_view::npos || colon == std::string_view::npos || colon < eq || eq == 0)
    throw ParameterError("--block expects name=path:kind, got '" + std::string(flag) + "'");
  BlockConfig b;
  b.name = std::string(flag.substr(0, eq));
  b.path = std::string(flag.substr(eq + 1, colon - eq - 1));
  b.kind = parse_block_kind(flag.substr(colon + 1));
  b.builder = BuilderKind::External;
  if (b.path.empty()) throw ParameterError("--block path is empty");
  return b;
}

}  // namespace heterorep
