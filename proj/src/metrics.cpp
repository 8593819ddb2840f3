#include "heterorep/metrics.hpp"

#include <string>

#include "heterorep/error.hpp"

namespace heterorep {

std::string_view to_string(Averaging a) {
  switch (a) {
    case Averaging::Binary: return "binary";
    case Averaging::Macro: return "macro";
    case Averaging::Weighted: return "weighted";
  }
  return "?";
}

Averaging parse_averaging(std::string_view s) {
  if (s == "binary") return Averaging::Binary;
  if (s == "macro") return Averaging::Macro;
  if (s == "weighted") return Averaging::Weighted;
  throw ParameterError("unknown averaging: " + std::string(s));
}

Eigen::MatrixXi confusion_matrix(std::span<const int> truth, std::span<const int> predicted, std::size_t n_classes) {
  if (truth.size() != predicted.size()) throw EvaluationError("truth and prediction lengths differ");
  const auto L = static_cast<int>(n_classes);
  Eigen::MatrixXi cm = Eigen::MatrixXi::Zero(L, L);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= L) throw EvaluationError("unseen label id " + std::to_string(truth[i]));
    if (predicted[i] < 0 || predicted[i] >= L) throw EvaluationError("predicted label id out of range");
    ++cm(truth[i], predicted[i]);
  }
  return cm;
}

MetricsRecord compute_metrics(std::span<const int> truth, std::span<const int> predicted, std::size_t n_classes,
                              Averaging averaging, int positive_class) {
  const auto cm = confusion_matrix(truth, predicted, n_classes);
  MetricsRecord m;
  m.averaging = averaging;
  const double n = static_cast<double>(truth.size());
  if (n == 0) {
    m.undefined = true;
    return m;
  }
  m.accuracy = static_cast<double>(cm.trace()) / n;

  const auto L = static_cast<int>(n_classes);
  auto per_class = [&](int c, double& p, double& r, double& f) {
    const double tp = cm(c, c);
    const double predicted_c = cm.col(c).sum();
    const double actual_c = cm.row(c).sum();
    p = r = f = 0.0;
    if (predicted_c > 0) p = tp / predicted_c; else m.undefined = true;
    if (actual_c > 0) r = tp / actual_c; else m.undefined = true;
    if (p + r > 0) f = 2.0 * p * r / (p + r); else m.undefined = true;
  };

  if (averaging == Averaging::Binary) {
    if (positive_class < 0 || positive_class >= L) throw EvaluationError("positive class out of range");
    per_class(positive_class, m.precision, m.recall, m.f1);
    return m;
  }
  double sp = 0, sr = 0, sf = 0, total_weight = 0;
  for (int c = 0; c < L; ++c) {
    const double support = cm.row(c).sum();
    double p, r, f;
    if (averaging == Averaging::Weighted && support == 0) continue;
    per_class(c, p, r, f);
    const double w = averaging == Averaging::Weighted ? support : 1.0;
    sp += w * p;
    sr += w * r;
    sf += w * f;
    total_weight += w;
  }
  if (total_weight > 0) {
    m.precision = sp / total_weight;
    m.recall = sr / total_weight;
    m.f1 = sf / total_weight;
  }
  return m;
}

}  // namespace heterorep
