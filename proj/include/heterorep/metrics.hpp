#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include <Eigen/Dense>

namespace heterorep {

enum class Averaging { Binary, Macro, Weighted };
std::string_view to_string(Averaging a);
Averaging parse_averaging(std::string_view s);

struct MetricsRecord {
  double accuracy = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  Averaging averaging = Averaging::Weighted;
  // Some per-class precision/recall/F1 had a zero denominator and was set to 0.
  bool undefined = false;
};

// Rows = true class, cols = predicted class.
Eigen::MatrixXi confusion_matrix(std::span<const int> truth, std::span<const int> predicted, std::size_t n_classes);

// Binary mode reports the scores of `positive_class`; weighted mode weights
// per-class scores by true-class support. Labels outside [0, n_classes)
// throw EvaluationError.
MetricsRecord compute_metrics(std::span<const int> truth, std::span<const int> predicted, std::size_t n_classes,
                              Averaging averaging = Averaging::Weighted, int positive_class = 1);

}  // namespace heterorep
