#include "doctest.h"

#include <vector>

#include "heterorep/error.hpp"
#include "heterorep/metrics.hpp"

using namespace heterorep;

namespace {

// TP=2, FP=1, FN=1, TN=6 with class 1 positive.
void confusion_fixture(std::vector<int>& truth, std::vector<int>& pred) {
  truth = {1, 1, 0, 1, 0, 0, 0, 0, 0, 0};
  pred = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
}

}  // namespace

TEST_CASE("binary confusion example") {
  std::vector<int> t, p;
  confusion_fixture(t, p);
  const auto cm = confusion_matrix(t, p, 2);
  CHECK(cm(1, 1) == 2);
  CHECK(cm(0, 1) == 1);
  CHECK(cm(1, 0) == 1);
  CHECK(cm(0, 0) == 6);
  const auto m = compute_metrics(t, p, 2, Averaging::Binary, 1);
  CHECK(m.precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(m.accuracy == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(!m.undefined);
}

TEST_CASE("perfect predictor") {
  const std::vector<int> y{0, 1, 2, 2, 1, 0, 3};
  for (auto a : {Averaging::Macro, Averaging::Weighted}) {
    const auto m = compute_metrics(y, y, 4, a);
    CHECK(m.accuracy == 1.0);
    CHECK(m.f1 == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
  }
  const std::vector<int> b{0, 1, 1, 0};
  const auto m = compute_metrics(b, b, 2, Averaging::Binary, 1);
  CHECK(m.f1 == 1.0);
}

TEST_CASE("constant predictor on 52/48") {
  std::vector<int> t(100, 0);
  for (int i = 52; i < 100; ++i) t[static_cast<std::size_t>(i)] = 1;
  const std::vector<int> p(100, 0);
  const auto m = compute_metrics(t, p, 2, Averaging::Weighted);
  CHECK(m.accuracy == doctest::Approx(0.52));
  CHECK(m.f1 < m.accuracy);
  CHECK(m.undefined);
  CHECK(m.precision >= 0.0);
}

TEST_CASE("weighted and macro by hand") {
  const std::vector<int> t{0, 0, 0, 1, 1, 2};
  const std::vector<int> p{0, 0, 1, 1, 2, 2};
  // class 0: p=1, r=2/3; class 1: p=1/2, r=1/2; class 2: p=1/2, r=1
  const double f0 = 2 * 1.0 * (2.0 / 3) / (1.0 + 2.0 / 3), f1 = 0.5, f2 = 2 * 0.5 / 1.5;
  const auto w = compute_metrics(t, p, 3, Averaging::Weighted);
  CHECK(w.f1 == doctest::Approx((3 * f0 + 2 * f1 + f2) / 6));
  CHECK(w.recall == doctest::Approx(w.accuracy));
  const auto m = compute_metrics(t, p, 3, Averaging::Macro);
  CHECK(m.f1 == doctest::Approx((f0 + f1 + f2) / 3));
  CHECK(m.precision == doctest::Approx((1.0 + 0.5 + 0.5) / 3));
}

TEST_CASE("metric errors and names") {
  const std::vector<int> t{0, 3}, p{0, 0};
  CHECK_THROWS_AS(compute_metrics(t, p, 2), EvaluationError);
  CHECK(parse_averaging("macro") == Averaging::Macro);
  CHECK(to_string(Averaging::Weighted) == "weighted");
  CHECK_THROWS_AS(parse_averaging("micro"), ParameterError);
}
