#include "heterorep/stacking.hpp"

#include <algorithm>
#include <fstream>

#include "heterorep/binary_io.hpp"

namespace heterorep {

std::string_view to_string(BlockKind kind) {
  switch (kind) {
    case BlockKind::Text: return "text";
    case BlockKind::Kg: return "kg";
    case BlockKind::KgEntity: return "kg-entity";
  }
  return "?";
}

BlockKind parse_block_kind(std::string_view s) {
  if (s == "text") return BlockKind::Text;
  if (s == "kg") return BlockKind::Kg;
  if (s == "kg-entity") return BlockKind::KgEntity;
  throw UsageError("unknown block kind: " + std::string(s));
}

std::filesystem::path ids_sidecar(const std::filesystem::path& drm) {
  auto p = drm;
  p += ".ids";
  return p;
}

DrmHeader read_drm_header(const std::filesystem::path& path) {
  io::BinaryReader r(path);
  r.expect_magic("DRM1");
  DrmHeader h{r.get<std::uint64_t>(), r.get<std::uint64_t>()};
  if (h.cols == 0) throw FormatError(path.string() + ": DRM matrix has zero columns");
  if (h.rows > 0 && r.remaining() / h.rows / sizeof(float) < h.cols)
    throw FormatError(path.string() + ": DRM payload shorter than header");
  if (r.remaining() != h.rows * h.cols * sizeof(float)) throw FormatError(path.string() + ": DRM payload size mismatch");
  return h;
}

void save_drm(const std::filesystem::path& path, const Eigen::MatrixXf& matrix, std::span<const std::string> ids) {
  if (matrix.cols() == 0) throw FormatError("refusing to write a zero-column DRM: " + path.string());
  if (!ids.empty() && static_cast<Eigen::Index>(ids.size()) != matrix.rows())
    throw AlignmentError(path.string() + ": " + std::to_string(ids.size()) + " ids for " +
                         std::to_string(matrix.rows()) + " rows");
  io::BinaryWriter w(path);
  w.magic("DRM1");
  w.put<std::uint64_t>(static_cast<std::uint64_t>(matrix.rows()));
  w.put<std::uint64_t>(static_cast<std::uint64_t>(matrix.cols()));
  const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = matrix;
  w.put_array(rm.data(), static_cast<std::size_t>(rm.size()));
  w.close();
  std::ofstream sidecar(ids_sidecar(path), std::ios::binary | std::ios::trunc);
  for (const auto& id : ids) sidecar << id << '\n';
  if (!sidecar) throw DataError("write failed: " + ids_sidecar(path).string());
}

std::vector<std::string> read_ids(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open id sidecar: " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ids.push_back(std::move(line));
  }
  return ids;
}

Eigen::MatrixXf load_drm(const std::filesystem::path& path, std::vector<std::string>* ids) {
  const auto h = read_drm_header(path);
  io::BinaryReader r(path);
  r.expect_magic("DRM1");
  r.get<std::uint64_t>();
  r.get<std::uint64_t>();
  Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(static_cast<Eigen::Index>(h.rows),
                                                                           static_cast<Eigen::Index>(h.cols));
  r.get_array(rm.data(), h.rows * h.cols);
  if (ids) {
    *ids = read_ids(ids_sidecar(path));
    if (ids->size() != h.rows)
      throw AlignmentError(path.string() + ": id sidecar has " + std::to_string(ids->size()) + " lines for " +
                           std::to_string(h.rows) + " rows");
  }
  return rm;
}

RepresentationBlock load_matrix(const std::filesystem::path& path, std::string name, BlockKind kind,
                                std::span<const std::string> expected_ids) {
  RepresentationBlock block;
  block.name = std::move(name);
  block.kind = kind;
  block.matrix = load_drm(path, &block.ids);
  if (!expected_ids.empty()) {
    if (expected_ids.size() != block.ids.size())
      throw AlignmentError(path.string() + ": block '" + block.name + "' has " + std::to_string(block.ids.size()) +
                           " rows but the dataset has " + std::to_string(expected_ids.size()) + " documents");
    for (std::size_t i = 0; i < expected_ids.size(); ++i)
      if (expected_ids[i] != block.ids[i])
        throw AlignmentError(path.string() + ": first divergent id at row " + std::to_string(i) + ": block has '" +
                             block.ids[i] + "', dataset has '" + expected_ids[i] + "'");
  }
  if (!block.matrix.allFinite()) throw IntegrityError(path.string() + ": block contains NaN or Inf");
  return block;
}

void BlockRegistry::add(RepresentationBlock block) {
  if (frozen_) throw UsageError("block registry is frozen; cannot add '" + block.name + "'");
  if (find(block.name)) throw UsageError("block '" + block.name + "' registered twice");
  if (block.dim() == 0) throw CompositionError("block '" + block.name + "' has zero columns");
  if (auto n = rows(); n && *n != block.rows())
    throw CompositionError("block '" + block.name + "' has " + std::to_string(block.rows()) + " rows, expected " +
                           std::to_string(*n) + " (from '" + blocks_.front().name + "')");
  if (!block.matrix.allFinite()) throw IntegrityError("block '" + block.name + "' contains NaN or Inf");
  blocks_.push_back(std::move(block));
}

const RepresentationBlock* BlockRegistry::find(std::string_view name) const {
  for (const auto& b : blocks_)
    if (b.name == name) return &b;
  return nullptr;
}

const RepresentationBlock& BlockRegistry::at(std::string_view name) const {
  if (const auto* b = find(name)) return *b;
  throw UsageError("block not registered: " + std::string(name));
}

std::optional<Eigen::Index> BlockRegistry::rows() const {
  if (blocks_.empty()) return std::nullopt;
  return blocks_.front().rows();
}

Scenario resolve_scenario(std::string_view name, const BlockRegistry& registry,
                          const std::map<std::string, std::vector<std::string>>& custom) {
  Scenario s{std::string(name), {}};
  auto by_kind = [&](std::initializer_list<BlockKind> kinds) {
    for (const auto& b : registry.blocks())
      for (auto k : kinds)
        if (b.kind == k) s.blocks.push_back(b.name);
  };
  if (name == "LM") {
    by_kind({BlockKind::Text});
  } else if (name == "KG") {
    by_kind({BlockKind::Kg});
  } else if (name == "LM+KG") {
    by_kind({BlockKind::Text, BlockKind::Kg});
  } else if (name == "LM+KG+KG-ENTITY") {
    by_kind({BlockKind::Text, BlockKind::Kg, BlockKind::KgEntity});
  } else if (auto it = custom.find(std::string(name)); it != custom.end()) {
    for (const auto& b : registry.blocks())
      if (std::find(it->second.begin(), it->second.end(), b.name) != it->second.end()) s.blocks.push_back(b.name);
    for (const auto& wanted : it->second) registry.at(wanted);
  } else {
    throw UsageError("unknown scenario: " + std::string(name));
  }
  if (s.blocks.empty()) throw UsageError("scenario '" + std::string(name) + "' selects no registered blocks");
  return s;
}

Scenario subset_scenario(std::uint64_t mask, const BlockRegistry& registry) {
  Scenario s;
  for (std::size_t i = 0; i < registry.size(); ++i) {
    if (!(mask >> i & 1U)) continue;
    if (!s.name.empty()) s.name += '+';
    s.name += registry.blocks()[i].name;
    s.blocks.push_back(registry.blocks()[i].name);
  }
  return s;
}

Composed compose(const Scenario& scenario, const BlockRegistry& registry) {
  if (scenario.blocks.empty()) throw CompositionError("scenario '" + scenario.name + "' has no blocks");
  std::vector<const RepresentationBlock*> parts;
  Eigen::Index cols = 0;
  for (const auto& name : scenario.blocks) {
    const auto& b = registry.at(name);
    if (!parts.empty() && b.rows() != parts.front()->rows())
      throw CompositionError("blocks '" + parts.front()->name + "' and '" + b.name + "' differ in row count");
    parts.push_back(&b);
    cols += b.dim();
  }
  Composed out;
  out.matrix.resize(parts.front()->rows(), cols);
  Eigen::Index at = 0;
  for (const auto* b : parts) {
    out.matrix.middleCols(at, b->dim()) = b->matrix;
    out.attribution.push_back({b->name, at, at + b->dim()});
    at += b->dim();
  }
  return out;
}

}  // namespace heterorep
