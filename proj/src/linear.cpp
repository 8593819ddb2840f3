#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <sstream>

#include "heterorep/error.hpp"
#include "heterorep/learners.hpp"
#include "heterorep/rng.hpp"
#include "nn_detail.hpp"

namespace heterorep {

std::string_view to_string(MlpArch arch) {
  switch (arch) {
    case MlpArch::SNN: return "SNN";
    case MlpArch::FiveNet: return "5Net";
    case MlpArch::LNN: return "LNN";
  }
  return "?";
}

MlpArch parse_mlp_arch(std::string_view s) {
  if (s == "SNN" || s == "snn") return MlpArch::SNN;
  if (s == "5Net" || s == "FiveNet" || s == "5net") return MlpArch::FiveNet;
  if (s == "LNN" || s == "lnn") return MlpArch::LNN;
  throw ParameterError("unknown MLP architecture: " + std::string(s));
}

std::vector<int> lnn_layer_sizes(int n) {
  if (n < 2) throw ParameterError("LNN needs n >= 2, got " + std::to_string(n));
  if (n > 30) throw ParameterError("LNN n too large: " + std::to_string(n));
  std::vector<int> sizes;
  for (int k = n; k >= 1; --k) sizes.push_back(1 << k);
  return sizes;
}

std::vector<int> MlpSpec::hidden_sizes() const {
  switch (arch) {
    case MlpArch::SNN:
      if (snn_width < 1) throw ParameterError("SNN width must be positive");
      return {snn_width};
    case MlpArch::FiveNet:
      if (fivenet_widths.empty() ||
          std::any_of(fivenet_widths.begin(), fivenet_widths.end(), [](int w) { return w < 1; }))
        throw ParameterError("5Net widths must be positive");
      return fivenet_widths;
    case MlpArch::LNN:
      return lnn_layer_sizes(lnn_n);
  }
  return {};
}

std::string describe(const ModelSpec& spec) {
  std::ostringstream os;
  if (const auto* l = std::get_if<LinearModelSpec>(&spec)) {
    if (l->family == LinearFamily::LogReg) {
      os << "l2_lambda=" << l->l2_lambda;
    } else {
      os << "loss=" << (l->loss == SgdLoss::Log ? "log" : "hinge") << " alpha=" << l->alpha
         << " l1_ratio=" << l->l1_ratio << " power_t=" << l->power_t << " eta0=" << l->eta0;
    }
  } else {
    const auto& m = std::get<MlpSpec>(spec);
    os << "arch=" << to_string(m.arch);
    if (m.arch == MlpArch::SNN) os << " width=" << m.snn_width;
    if (m.arch == MlpArch::LNN) os << " n=" << m.lnn_n;
    if (m.arch == MlpArch::FiveNet) {
      os << " widths=";
      for (std::size_t i = 0; i < m.fivenet_widths.size(); ++i) os << (i ? "," : "") << m.fivenet_widths[i];
    }
    os << " lr=" << m.lr << " dropout=" << m.dropout << " batch=" << m.batch_size;
  }
  return os.str();
}

double sgd_learning_rate(double eta0, double power_t, std::uint64_t t) {
  return eta0 / std::pow(static_cast<double>(std::max<std::uint64_t>(t, 1)), power_t);
}

std::size_t TrainedModel::n_classes() const { return labels.empty() ? static_cast<std::size_t>(layers.empty() ? 0 : layers.back().bias.size()) : labels.size(); }

std::size_t TrainedModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

namespace detail {

Eigen::MatrixXd forward(const std::vector<DenseLayer>& layers, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd a = x;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Eigen::MatrixXd z = (a * layers[i].weights.transpose()).rowwise() + layers[i].bias.transpose();
    if (i + 1 < layers.size())
      a = z.unaryExpr([](double v) { return selu(v); });
    else
      a = std::move(z);
  }
  return a;
}

}  // namespace detail

Eigen::MatrixXd TrainedModel::decision(const Eigen::MatrixXd& x) const { return detail::forward(layers, x); }

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits.colwise() - logits.rowwise().maxCoeff();
  p = p.array().exp();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

Eigen::MatrixXd TrainedModel::predict_proba(const Eigen::MatrixXd& x) const { return softmax_rows(decision(x)); }

std::vector<int> TrainedModel::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd s = decision(x);
  std::vector<int> out(static_cast<std::size_t>(s.rows()));
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    Eigen::Index arg = 0;
    s.row(i).maxCoeff(&arg);
    out[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return out;
}

MetricsRecord evaluate(const TrainedModel& model, const Eigen::MatrixXd& x, std::span<const int> y,
                       Averaging averaging, int positive_class) {
  const auto L = model.n_classes();
  for (int label : y)
    if (label < 0 || static_cast<std::size_t>(label) >= L)
      throw EvaluationError("label id " + std::to_string(label) + " was not seen in training");
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw EvaluationError("row count does not match label count");
  const auto pred = model.predict(x);
  return compute_metrics(y, pred, L, averaging, positive_class);
}

namespace {

void check_training_input(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t n_classes) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw TrainingError("row count does not match label count");
  if (x.rows() == 0) throw TrainingError("no training rows");
  if (!x.allFinite()) throw TrainingError("training matrix contains NaN or Inf");
  std::vector<bool> present(n_classes, false);
  for (int label : y) {
    if (label < 0 || static_cast<std::size_t>(label) >= n_classes) throw TrainingError("label id out of range");
    present[static_cast<std::size_t>(label)] = true;
  }
  if (std::count(present.begin(), present.end(), true) < 2)
    throw TrainingError("training labels contain fewer than two classes");
}

struct Objective {
  double loss;
  Eigen::MatrixXd grad_w;
  Eigen::VectorXd grad_b;
};

double logreg_loss(const Eigen::MatrixXd& x, std::span<const int> y, const Eigen::MatrixXd& w, const Eigen::VectorXd& b,
                   double lambda, Objective* out) {
  const auto n = static_cast<double>(x.rows());
  const Eigen::MatrixXd logits = (x * w.transpose()).rowwise() + b.transpose();
  const Eigen::VectorXd mx = logits.rowwise().maxCoeff();
  const Eigen::MatrixXd shifted = logits.colwise() - mx;
  const Eigen::VectorXd lse = shifted.array().exp().rowwise().sum().log();
  double ce = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) ce += lse(i) - shifted(i, y[static_cast<std::size_t>(i)]);
  const double loss = ce / n + 0.5 * lambda * w.squaredNorm();
  if (out) {
    Eigen::MatrixXd residual = (shifted.colwise() - lse).array().exp();
    for (Eigen::Index i = 0; i < x.rows(); ++i) residual(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    out->loss = loss;
    out->grad_w = residual.transpose() * x / n + lambda * w;
    out->grad_b = residual.colwise().sum().transpose() / n;
  }
  return loss;
}

}  // namespace

TrainedModel train_logreg(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t n_classes, double l2_lambda,
                          const LinearModelSpec& base) {
  check_training_input(x, y, n_classes);
  if (!(l2_lambda >= 0)) throw ParameterError("l2_lambda must be non-negative");
  LinearModelSpec spec = base;
  spec.family = LinearFamily::LogReg;
  spec.l2_lambda = l2_lambda;

  const auto L = static_cast<Eigen::Index>(n_classes);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(L, x.cols());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(L);
  Objective cur;
  logreg_loss(x, y, w, b, l2_lambda, &cur);

  TrainedModel model;
  model.loss_history.push_back(cur.loss);
  constexpr double kArmijo = 1e-4;
  double step = 1.0;
  Eigen::MatrixXd prev_w;
  Eigen::VectorXd prev_b;
  Eigen::MatrixXd prev_gw;
  Eigen::VectorXd prev_gb;
  int epoch = 0;
  for (; epoch < spec.max_epochs; ++epoch) {
    const double gmax = std::max(cur.grad_w.cwiseAbs().maxCoeff(), cur.grad_b.cwiseAbs().maxCoeff());
    if (gmax < spec.tol) break;
    if (epoch > 0) {
      // Barzilai-Borwein trial step; the backtracking below keeps descent monotone.
      const double ss = (w - prev_w).squaredNorm() + (b - prev_b).squaredNorm();
      const double sy = ((w - prev_w).cwiseProduct(cur.grad_w - prev_gw)).sum() +
                        (b - prev_b).dot(cur.grad_b - prev_gb);
      step = sy > 0 ? std::clamp(ss / sy, 1e-10, 1e10) : std::min(step * 2.0, 1e10);
    }
    const double gnorm2 = cur.grad_w.squaredNorm() + cur.grad_b.squaredNorm();
    bool accepted = false;
    Eigen::MatrixXd trial_w;
    Eigen::VectorXd trial_b;
    double trial_loss = 0.0;
    while (step > 1e-20) {
      trial_w = w - step * cur.grad_w;
      trial_b = b - step * cur.grad_b;
      trial_loss = logreg_loss(x, y, trial_w, trial_b, l2_lambda, nullptr);
      if (std::isfinite(trial_loss) && trial_loss <= cur.loss - kArmijo * step * gnorm2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    prev_w = std::move(w);
    prev_b = std::move(b);
    prev_gw = cur.grad_w;
    prev_gb = cur.grad_b;
    w = std::move(trial_w);
    b = std::move(trial_b);
    logreg_loss(x, y, w, b, l2_lambda, &cur);
    model.loss_history.push_back(cur.loss);
  }
  model.spec = spec;
  model.layers.push_back({std::move(w), std::move(b)});
  model.trained_epochs = epoch;
  model.best_epoch = epoch;
  return model;
}

TrainedModel train_sgd(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t n_classes,
                       const LinearModelSpec& in_spec) {
  check_training_input(x, y, n_classes);
  LinearModelSpec spec = in_spec;
  spec.family = LinearFamily::Sgd;
  if (!(spec.alpha > 0)) throw ParameterError("alpha must be positive");
  if (spec.l1_ratio < 0 || spec.l1_ratio > 1) throw ParameterError("l1_ratio must be in [0, 1]");
  if (!(spec.eta0 > 0)) throw ParameterError("eta0 must be positive");

  const bool binary = n_classes == 2;
  const auto K = static_cast<Eigen::Index>(binary ? 1 : n_classes);
  const Eigen::Index D = x.cols();
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor xr = x;
  RowMajor w = RowMajor::Zero(K, D);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(K);
  auto target = [&](int label, Eigen::Index k) {
    const int cls = binary ? 1 : static_cast<int>(k);
    return label == cls ? 1.0 : -1.0;
  };
  auto loss_of = [&](double margin) {
    return spec.loss == SgdLoss::Log ? (margin > 30 ? std::exp(-margin) : std::log1p(std::exp(-margin)))
                                     : std::max(0.0, 1.0 - margin);
  };

  std::vector<std::size_t> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(spec.seed, 0x5ed));
  std::uint64_t t = 1;
  double best_objective = std::numeric_limits<double>::infinity();
  int stale = 0;
  TrainedModel model;
  int epoch = 0;
  for (; epoch < spec.max_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (auto i : order) {
      const double eta = sgd_learning_rate(spec.eta0, spec.power_t, t++);
      const auto xi = xr.row(static_cast<Eigen::Index>(i));
      for (Eigen::Index k = 0; k < K; ++k) {
        const double yk = target(y[i], k);
        const double margin = yk * (w.row(k).dot(xi) + b(k));
        double dloss;
        if (spec.loss == SgdLoss::Log)
          dloss = -yk / (1.0 + std::exp(std::min(margin, 700.0)));
        else
          dloss = margin < 1.0 ? -yk : 0.0;
        w.row(k) *= 1.0 - eta * spec.alpha * (1.0 - spec.l1_ratio);
        if (dloss != 0.0) {
          w.row(k).noalias() -= (eta * dloss) * xi;
          b(k) -= eta * dloss;
        }
        const double shrink = eta * spec.alpha * spec.l1_ratio;
        if (shrink > 0)
          w.row(k) = w.row(k).unaryExpr([shrink](double v) {
            return v > shrink ? v - shrink : (v < -shrink ? v + shrink : 0.0);
          });
      }
    }
    double objective = 0.0;
    const Eigen::MatrixXd scores = (x * w.transpose()).rowwise() + b.transpose();
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index k = 0; k < K; ++k) objective += loss_of(target(y[static_cast<std::size_t>(i)], k) * scores(i, k));
    objective /= static_cast<double>(x.rows());
    objective += spec.alpha * (spec.l1_ratio * w.cwiseAbs().sum() + 0.5 * (1.0 - spec.l1_ratio) * w.squaredNorm());
    if (!std::isfinite(objective)) throw TrainingError("SGD objective diverged at epoch " + std::to_string(epoch + 1));
    model.loss_history.push_back(objective);
    if (objective > best_objective - spec.tol) {
      if (++stale >= spec.n_iter_no_change) {
        ++epoch;
        break;
      }
    } else {
      stale = 0;
    }
    best_objective = std::min(best_objective, objective);
  }

  model.spec = spec;
  if (binary) {
    Eigen::MatrixXd full(2, D);
    full.row(0) = -w.row(0);
    full.row(1) = w.row(0);
    Eigen::VectorXd fb(2);
    fb << -b(0), b(0);
    model.layers.push_back({std::move(full), std::move(fb)});
  } else {
    model.layers.push_back({Eigen::MatrixXd(w), std::move(b)});
  }
  model.trained_epochs = epoch;
  model.best_epoch = epoch;
  return model;
}

}  // namespace heterorep
