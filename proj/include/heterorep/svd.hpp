#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace heterorep {

struct SvdOptions {
  std::uint64_t seed = 0;
  int power_iterations = 10;
  std::size_t oversample = 10;
};

// Leading singular triplets of an m x n matrix: singular values
// non-increasing, right vectors n x k with orthonormal columns. Sign of each
// component is fixed so that its largest-magnitude right-vector entry is
// positive. Rank-deficient input shrinks k to the numerical rank and adds a
// warning.
struct TruncatedSvd {
  Eigen::VectorXd singular_values;
  Eigen::MatrixXd right;
  std::vector<std::string> warnings;
};

// Randomized range finder with power iterations; falls back to a dense SVD
// when the sketch would cover the smaller dimension anyway.
TruncatedSvd truncated_svd(const Eigen::SparseMatrix<double, Eigen::RowMajor>& x, std::size_t k,
                           const SvdOptions& options = {});
TruncatedSvd truncated_svd(const Eigen::MatrixXd& x, std::size_t k, const SvdOptions& options = {});

}  // namespace heterorep
