#include "heterorep/svd.hpp"

#include <algorithm>
#include <limits>

#include <Eigen/SVD>

#include "heterorep/rng.hpp"

namespace heterorep {
namespace {

Eigen::MatrixXd orthonormal_basis(const Eigen::MatrixXd& y) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
  return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

TruncatedSvd finish(const Eigen::VectorXd& sigma, const Eigen::MatrixXd& v, std::size_t k, Eigen::Index rows,
                    Eigen::Index cols) {
  TruncatedSvd out;
  const auto available = static_cast<std::size_t>(sigma.size());
  if (available < k)
    out.warnings.push_back("requested " + std::to_string(k) + " components but matrix is " + std::to_string(rows) +
                           "x" + std::to_string(cols));
  const double tol = sigma.size() > 0 ? sigma(0) * static_cast<double>(std::max(rows, cols)) *
                                            std::numeric_limits<double>::epsilon() * 10.0
                                      : 0.0;
  std::size_t rank = 0;
  while (rank < available && sigma(static_cast<Eigen::Index>(rank)) > tol) ++rank;
  std::size_t keep = std::min(k, rank);
  if (rank < std::min(k, available))
    out.warnings.push_back("matrix rank " + std::to_string(rank) + " is below the requested " + std::to_string(k) +
                           " components; reducing dimension");
  const auto kk = static_cast<Eigen::Index>(keep);
  out.singular_values = sigma.head(kk);
  out.right = v.leftCols(kk);
  for (Eigen::Index j = 0; j < kk; ++j) {
    Eigen::Index arg = 0;
    out.right.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.right(arg, j) < 0) out.right.col(j) *= -1.0;
  }
  return out;
}

TruncatedSvd dense_exact(const Eigen::MatrixXd& x, std::size_t k) {
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
  return finish(svd.singularValues(), svd.matrixV(), k, x.rows(), x.cols());
}

template <typename Mat>
TruncatedSvd randomized(const Mat& x, std::size_t k, const SvdOptions& opt) {
  const Eigen::Index m = x.rows();
  const Eigen::Index n = x.cols();
  const auto min_dim = static_cast<std::size_t>(std::min(m, n));
  const std::size_t sketch = std::min(k + opt.oversample, min_dim);
  if (sketch >= min_dim) return dense_exact(Eigen::MatrixXd(x), k);

  const auto l = static_cast<Eigen::Index>(sketch);
  Rng rng(opt.seed);
  Eigen::MatrixXd omega(n, l);
  for (Eigen::Index j = 0; j < l; ++j)
    for (Eigen::Index i = 0; i < n; ++i) omega(i, j) = rng.normal();

  Eigen::MatrixXd q = orthonormal_basis(x * omega);
  for (int it = 0; it < opt.power_iterations; ++it) {
    Eigen::MatrixXd z = orthonormal_basis(x.transpose() * q);
    q = orthonormal_basis(x * z);
  }
  // B = Q^T X, formed as (X^T Q)^T so sparse X is only multiplied on the left.
  Eigen::MatrixXd b = (x.transpose() * q).transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinV);
  return finish(svd.singularValues(), svd.matrixV(), k, m, n);
}

}  // namespace

TruncatedSvd truncated_svd(const Eigen::SparseMatrix<double, Eigen::RowMajor>& x, std::size_t k,
                           const SvdOptions& options) {
  return randomized(x, k, options);
}

TruncatedSvd truncated_svd(const Eigen::MatrixXd& x, std::size_t k, const SvdOptions& options) {
  return randomized(x, k, options);
}

}  // namespace heterorep
