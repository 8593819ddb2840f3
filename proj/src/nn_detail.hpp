#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "heterorep/learners.hpp"

namespace heterorep::detail {

inline constexpr double kSeluAlpha = 1.6732632423543772848170429916717;
inline constexpr double kSeluScale = 1.0507009873554804934193349852946;

inline double selu(double v) { return v > 0 ? kSeluScale * v : kSeluScale * kSeluAlpha * std::expm1(v); }
inline double selu_grad(double v) { return v > 0 ? kSeluScale : kSeluScale * kSeluAlpha * std::exp(v); }

// Deterministic forward pass: SELU on every layer but the last.
Eigen::MatrixXd forward(const std::vector<DenseLayer>& layers, const Eigen::MatrixXd& x);

}  // namespace heterorep::detail
