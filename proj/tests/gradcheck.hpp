#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "heterorep/learners.hpp"
#include "heterorep/rng.hpp"

namespace gradcheck {

// Hidden pre-activations of a dropout-free forward pass.
inline std::vector<Eigen::MatrixXd> hidden_preactivations(const std::vector<heterorep::DenseLayer>& layers,
                                                          const Eigen::MatrixXd& x) {
  constexpr double alpha = 1.6732632423543772848170429916717;
  constexpr double scale = 1.0507009873554804934193349852946;
  std::vector<Eigen::MatrixXd> out;
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    Eigen::MatrixXd z = (a * layers[l].weights.transpose()).rowwise() + layers[l].bias.transpose();
    out.push_back(z);
    a = z.unaryExpr([&](double v) { return v > 0 ? scale * v : scale * alpha * (std::exp(v) - 1.0); });
  }
  return out;
}

inline bool same_signs(const std::vector<Eigen::MatrixXd>& a, const std::vector<Eigen::MatrixXd>& b) {
  for (std::size_t l = 0; l < a.size(); ++l)
    if (((a[l].array() > 0) != (b[l].array() > 0)).any()) return false;
  return true;
}

struct Result {
  double max_relative_error = 0.0;
  int checked = 0;
  int skipped = 0;
};

// Central differences on `per_layer` weights and biases of every layer.
// Coordinates whose perturbation moves a hidden unit across the SELU kink
// are resampled.
inline Result check(std::vector<heterorep::DenseLayer> layers, const Eigen::MatrixXd& x, const std::vector<int>& y,
                    int per_layer, std::uint64_t seed, double h = 1e-5) {
  std::vector<heterorep::DenseLayer> grad;
  heterorep::mlp_loss_and_gradient(layers, x, y, &grad);
  heterorep::Rng rng(seed);
  Result r;
  auto probe = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const auto zp = hidden_preactivations(layers, x);
    const double lp = heterorep::mlp_loss_and_gradient(layers, x, y, nullptr);
    param = saved - h;
    const auto zm = hidden_preactivations(layers, x);
    const double lm = heterorep::mlp_loss_and_gradient(layers, x, y, nullptr);
    param = saved;
    if (!same_signs(zp, zm)) {
      ++r.skipped;
      return false;
    }
    const double numeric = (lp - lm) / (2.0 * h);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    r.max_relative_error = std::max(r.max_relative_error, std::abs(analytic - numeric) / denom);
    ++r.checked;
    return true;
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (int k = 0, tries = 0; k < per_layer && tries < 50 * per_layer; ++tries) {
      const auto i = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(layers[l].weights.size())));
      if (probe(layers[l].weights.data()[i], grad[l].weights.data()[i])) ++k;
    }
    for (int k = 0, tries = 0; k < std::max(1, per_layer / 4) && tries < 50 * per_layer; ++tries) {
      const auto i = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(layers[l].bias.size())));
      if (probe(layers[l].bias.data()[i], grad[l].bias.data()[i])) ++k;
    }
  }
  return r;
}

inline void fixture(Eigen::MatrixXd& x, std::vector<int>& y, std::uint64_t seed) {
  heterorep::Rng rng(seed);
  x.resize(20, 10);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  y.resize(20);
  for (std::size_t i = 0; i < 20; ++i) y[i] = static_cast<int>(i % 3);
}

}  // namespace gradcheck
