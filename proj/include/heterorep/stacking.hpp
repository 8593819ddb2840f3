#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "heterorep/error.hpp"

namespace heterorep {

enum class BlockKind { Text, Kg, KgEntity };
std::string_view to_string(BlockKind kind);
BlockKind parse_block_kind(std::string_view s);

// ---------------------------------------------------------------------------
// DRM exchange format: "DRM1", u64 rows, u64 cols, f32 rows x cols row-major,
// plus a "<file>.ids" sidecar with one document id per line.

struct DrmHeader {
  std::uint64_t rows = 0;
  std::uint64_t cols = 0;
};

std::filesystem::path ids_sidecar(const std::filesystem::path& drm);
DrmHeader read_drm_header(const std::filesystem::path& path);
void save_drm(const std::filesystem::path& path, const Eigen::MatrixXf& matrix, std::span<const std::string> ids);
// Reads the matrix and, when `ids` is given, its sidecar.
Eigen::MatrixXf load_drm(const std::filesystem::path& path, std::vector<std::string>* ids = nullptr);
std::vector<std::string> read_ids(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

struct RepresentationBlock {
  std::string name;
  BlockKind kind = BlockKind::Text;
  Eigen::MatrixXf matrix;  // row i <-> document i of the split
  std::vector<std::string> ids;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index dim() const { return matrix.cols(); }
};

// Loads a DRM block and checks it row-for-row against `expected_ids` when
// given (AlignmentError names the first divergent id).
RepresentationBlock load_matrix(const std::filesystem::path& path, std::string name, BlockKind kind,
                                std::span<const std::string> expected_ids = {});

// Blocks over one split, in registration order. Registration happens in a
// setup phase; after freeze() the registry is read-only.
class BlockRegistry {
 public:
  void add(RepresentationBlock block);
  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  const std::vector<RepresentationBlock>& blocks() const { return blocks_; }
  const RepresentationBlock* find(std::string_view name) const;
  const RepresentationBlock& at(std::string_view name) const;
  std::size_t size() const { return blocks_.size(); }
  std::optional<Eigen::Index> rows() const;

 private:
  std::vector<RepresentationBlock> blocks_;
  bool frozen_ = false;
};

struct Scenario {
  std::string name;
  std::vector<std::string> blocks;  // registration order
};

// LM = text blocks, KG = kg blocks, LM+KG, LM+KG+KG-ENTITY; otherwise a
// user-defined name from `custom`. Unknown names throw UsageError.
Scenario resolve_scenario(std::string_view name, const BlockRegistry& registry,
                          const std::map<std::string, std::vector<std::string>>& custom = {});
// Bit i of `mask` selects the i-th registered block.
Scenario subset_scenario(std::uint64_t mask, const BlockRegistry& registry);

struct ColumnRange {
  std::string block;
  Eigen::Index begin = 0;
  Eigen::Index end = 0;  // exclusive
};

struct Composed {
  Eigen::MatrixXf matrix;
  std::vector<ColumnRange> attribution;
};

Composed compose(const Scenario& scenario, const BlockRegistry& registry);

// Per-column z-score fitted on training rows (population sigma). Columns
// with zero training variance pass through unchanged.
template <typename Scalar>
class Standardizer {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Standardizer() = default;
  Standardizer(Vector mean, Vector scale) : mean_(std::move(mean)), scale_(std::move(scale)) {}

  template <typename Derived>
  static Standardizer fit(const Eigen::MatrixBase<Derived>& train) {
    if (train.rows() == 0) throw DataError("cannot fit a standardizer on zero rows");
    const auto n = static_cast<double>(train.rows());
    Vector mean(train.cols()), scale(train.cols());
    for (Eigen::Index j = 0; j < train.cols(); ++j) {
      const Eigen::VectorXd col = train.col(j).template cast<double>();
      const double mu = col.sum() / n;
      const double var = (col.array() - mu).square().sum() / n;
      const double sd = std::sqrt(var);
      if (!(sd > 1e-12 * std::max(1.0, std::abs(mu)))) {
        mean(j) = Scalar(0);
        scale(j) = Scalar(1);
      } else {
        mean(j) = static_cast<Scalar>(mu);
        scale(j) = static_cast<Scalar>(sd);
      }
    }
    return Standardizer(std::move(mean), std::move(scale));
  }

  template <typename Derived>
  Matrix apply(const Eigen::MatrixBase<Derived>& x) const {
    check(x.cols());
    return ((x.template cast<Scalar>().rowwise() - mean_.transpose()).array().rowwise() / scale_.transpose().array())
        .matrix();
  }

  template <typename Derived>
  Matrix inverse(const Eigen::MatrixBase<Derived>& z) const {
    check(z.cols());
    return ((z.template cast<Scalar>().array().rowwise() * scale_.transpose().array()).matrix().rowwise() +
            mean_.transpose());
  }

  const Vector& mean() const { return mean_; }
  const Vector& scale() const { return scale_; }

 private:
  void check(Eigen::Index cols) const {
    if (cols != mean_.size()) throw CompositionError("standardizer fitted on a different column count");
  }

  Vector mean_;
  Vector scale_;
};

}  // namespace heterorep
