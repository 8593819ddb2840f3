#include "doctest.h"

#include "heterorep/rng.hpp"
#include "heterorep/svd.hpp"
#include "oracles.hpp"

using namespace heterorep;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index m, Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) x(i, j) = rng.normal();
  return x;
}

}  // namespace

TEST_CASE("jacobi oracle sanity") {
  Eigen::MatrixXd a(2, 2);
  a << 2, 1, 1, 2;
  const auto ev = oracle::jacobi_eigenvalues(a);
  CHECK(ev[0] == doctest::Approx(3.0));
  CHECK(ev[1] == doctest::Approx(1.0));
}

TEST_CASE("randomized svd against the gramian oracle") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto x = random_matrix(50, 30, seed);
    const auto svd = truncated_svd(x, 8, {seed});
    REQUIRE(svd.singular_values.size() == 8);
    const auto ref = oracle::singular_values(x);
    for (int i = 0; i < 8; ++i) CHECK(std::abs(svd.singular_values(i) - ref[static_cast<std::size_t>(i)]) / ref[static_cast<std::size_t>(i)] < 1e-6);
    const Eigen::MatrixXd g = svd.right.transpose() * svd.right;
    CHECK((g - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(svd.warnings.empty());
  }
}

TEST_CASE("sparse and dense inputs agree") {
  Eigen::MatrixXd x = random_matrix(60, 40, 4);
  x = (x.array().abs() > 1.0).select(x, 0.0);
  const Eigen::SparseMatrix<double, Eigen::RowMajor> s = x.sparseView();
  const auto a = truncated_svd(x, 5, {9});
  const auto b = truncated_svd(s, 5, {9});
  CHECK((a.singular_values - b.singular_values).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((a.right - b.right).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("diagonal matrix") {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(6, 6);
  d.diagonal() << 0.5, -3.0, 2.0, 1.0, 0.25, 4.0;
  const auto svd = truncated_svd(d, 6);
  Eigen::VectorXd expected(6);
  expected << 4.0, 3.0, 2.0, 1.0, 0.5, 0.25;
  CHECK((svd.singular_values - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("deterministic at fixed seed and sign convention") {
  const auto x = random_matrix(200, 120, 5);
  const auto a = truncated_svd(x, 10, {77});
  const auto b = truncated_svd(x, 10, {77});
  CHECK(a.right == b.right);
  for (Eigen::Index j = 0; j < a.right.cols(); ++j) {
    Eigen::Index arg = 0;
    a.right.col(j).cwiseAbs().maxCoeff(&arg);
    CHECK(a.right(arg, j) > 0);
  }
}

TEST_CASE("rank deficiency shrinks the result") {
  Eigen::MatrixXd u = random_matrix(40, 3, 6), v = random_matrix(3, 25, 7);
  const Eigen::MatrixXd x = u * v;
  const auto svd = truncated_svd(x, 10);
  CHECK(svd.singular_values.size() == 3);
  CHECK(!svd.warnings.empty());
}
