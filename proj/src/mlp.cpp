#include <algorithm>
#include <cmath>
#include <numeric>

#include "heterorep/error.hpp"
#include "heterorep/learners.hpp"
#include "heterorep/rng.hpp"
#include "nn_detail.hpp"

namespace heterorep {

std::vector<DenseLayer> init_mlp(std::size_t inputs, std::size_t n_classes, const MlpSpec& spec) {
  std::vector<int> sizes{static_cast<int>(inputs)};
  for (int h : spec.hidden_sizes()) sizes.push_back(h);
  sizes.push_back(static_cast<int>(n_classes));
  Rng rng(derive_seed(spec.seed, 1));
  std::vector<DenseLayer> layers;
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    const double sd = 1.0 / std::sqrt(static_cast<double>(sizes[l - 1]));
    DenseLayer layer{Eigen::MatrixXd(sizes[l], sizes[l - 1]), Eigen::VectorXd::Zero(sizes[l])};
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = sd * rng.normal();
    layers.push_back(std::move(layer));
  }
  return layers;
}

namespace {

// One forward/backward pass over a batch. With dropout > 0 an inverted
// dropout mask is drawn from `rng` after every hidden activation.
double forward_backward(const std::vector<DenseLayer>& layers, const Eigen::MatrixXd& x, std::span<const int> y,
                        double dropout, Rng* rng, std::vector<DenseLayer>* gradient) {
  const std::size_t n_layers = layers.size();
  std::vector<Eigen::MatrixXd> pre(n_layers);
  std::vector<Eigen::MatrixXd> act(n_layers + 1);
  std::vector<Eigen::MatrixXd> masks(n_layers);
  act[0] = x;
  for (std::size_t l = 0; l < n_layers; ++l) {
    pre[l] = (act[l] * layers[l].weights.transpose()).rowwise() + layers[l].bias.transpose();
    if (l + 1 == n_layers) {
      act[l + 1] = pre[l];
      break;
    }
    act[l + 1] = pre[l].unaryExpr([](double v) { return detail::selu(v); });
    if (dropout > 0.0 && rng) {
      const double keep = 1.0 - dropout;
      masks[l].resize(pre[l].rows(), pre[l].cols());
      for (Eigen::Index i = 0; i < masks[l].size(); ++i) masks[l].data()[i] = rng->uniform() < keep ? 1.0 / keep : 0.0;
      act[l + 1] = act[l + 1].cwiseProduct(masks[l]);
    }
  }

  const Eigen::MatrixXd& logits = act[n_layers];
  const auto n = static_cast<double>(x.rows());
  const Eigen::VectorXd mx = logits.rowwise().maxCoeff();
  const Eigen::MatrixXd shifted = logits.colwise() - mx;
  const Eigen::VectorXd lse = shifted.array().exp().rowwise().sum().log();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) loss += lse(i) - shifted(i, y[static_cast<std::size_t>(i)]);
  loss /= n;
  if (!gradient) return loss;

  gradient->resize(n_layers);
  Eigen::MatrixXd delta = (shifted.colwise() - lse).array().exp();
  for (Eigen::Index i = 0; i < x.rows(); ++i) delta(i, y[static_cast<std::size_t>(i)]) -= 1.0;
  delta /= n;
  for (std::size_t l = n_layers; l-- > 0;) {
    (*gradient)[l].weights = delta.transpose() * act[l];
    (*gradient)[l].bias = delta.colwise().sum().transpose();
    if (l == 0) break;
    Eigen::MatrixXd back = delta * layers[l].weights;
    if (masks[l - 1].size() > 0) back = back.cwiseProduct(masks[l - 1]);
    delta = back.cwiseProduct(pre[l - 1].unaryExpr([](double v) { return detail::selu_grad(v); }));
  }
  return loss;
}

struct AdamState {
  std::vector<DenseLayer> m, v;
  std::uint64_t t = 0;

  explicit AdamState(const std::vector<DenseLayer>& layers) {
    for (const auto& l : layers) {
      m.push_back({Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()), Eigen::VectorXd::Zero(l.bias.size())});
    }
    v = m;
  }

  void step(std::vector<DenseLayer>& layers, const std::vector<DenseLayer>& grad, double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    auto update = [&](auto& param, auto& mm, auto& vv, const auto& g) {
      mm = b1 * mm + (1.0 - b1) * g;
      vv = b2 * vv + (1.0 - b2) * g.cwiseProduct(g);
      param.array() -= lr * (mm.array() / c1) / ((vv.array() / c2).sqrt() + eps);
    };
    for (std::size_t l = 0; l < layers.size(); ++l) {
      update(layers[l].weights, m[l].weights, v[l].weights, grad[l].weights);
      update(layers[l].bias, m[l].bias, v[l].bias, grad[l].bias);
    }
  }
};

}  // namespace

double mlp_loss_and_gradient(const std::vector<DenseLayer>& layers, const Eigen::MatrixXd& x, std::span<const int> y,
                             std::vector<DenseLayer>* gradient) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw TrainingError("row count does not match label count");
  return forward_backward(layers, x, y, 0.0, nullptr, gradient);
}

TrainedModel train_mlp(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t n_classes, const MlpSpec& spec,
                       Validation validation) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw TrainingError("row count does not match label count");
  if (x.rows() == 0) throw TrainingError("no training rows");
  if (validation.x.rows() == 0 || static_cast<std::size_t>(validation.x.rows()) != validation.y.size())
    throw TrainingError("validation set must be non-empty and aligned");
  if (validation.x.cols() != x.cols()) throw TrainingError("validation column count differs from training");
  if (spec.dropout < 0.0 || spec.dropout >= 1.0) throw ParameterError("dropout must be in [0, 1)");
  if (spec.batch_size < 1 || spec.max_epochs < 1 || spec.patience < 1)
    throw ParameterError("batch_size, max_epochs and patience must be positive");
  if (!(spec.lr >= 0.0)) throw ParameterError("learning rate must be non-negative");
  for (int label : y)
    if (label < 0 || static_cast<std::size_t>(label) >= n_classes) throw TrainingError("label id out of range");

  auto layers = init_mlp(static_cast<std::size_t>(x.cols()), n_classes, spec);
  AdamState adam(layers);
  Rng shuffle_rng(derive_seed(spec.seed, 2));
  Rng dropout_rng(derive_seed(spec.seed, 3));

  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::vector<int> batch_y;
  std::vector<DenseLayer> grad;

  TrainedModel model;
  model.spec = spec;
  std::vector<DenseLayer> best_layers = layers;
  double best_f1 = -1.0;
  int epoch = 0;
  for (epoch = 1; epoch <= spec.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<Eigen::Index>(order));
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(spec.batch_size), ++batch_index) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(spec.batch_size));
      const std::vector<Eigen::Index> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
      const Eigen::MatrixXd xb = x(rows, Eigen::all);
      batch_y.clear();
      for (auto r : rows) batch_y.push_back(y[static_cast<std::size_t>(r)]);
      const double loss = forward_backward(layers, xb, batch_y, spec.dropout, &dropout_rng, &grad);
      if (!std::isfinite(loss))
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index) + " (" + describe(spec) + ")");
      epoch_loss += loss * static_cast<double>(end - start);
      adam.step(layers, grad, spec.lr);
    }
    model.loss_history.push_back(epoch_loss / static_cast<double>(order.size()));

    const Eigen::MatrixXd logits = detail::forward(layers, validation.x);
    std::vector<int> pred(static_cast<std::size_t>(logits.rows()));
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      Eigen::Index arg = 0;
      logits.row(i).maxCoeff(&arg);
      pred[static_cast<std::size_t>(i)] = static_cast<int>(arg);
    }
    const double f1 = compute_metrics(validation.y, pred, n_classes, Averaging::Weighted).f1;
    model.validation_history.push_back(f1);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_layers = layers;
      model.best_epoch = epoch;
    } else if (epoch - model.best_epoch >= spec.patience) {
      break;
    }
  }
  model.trained_epochs = std::min(epoch, spec.max_epochs);
  model.layers = std::move(best_layers);
  model.best_validation_f1 = best_f1;
  return model;
}

}  // namespace heterorep
