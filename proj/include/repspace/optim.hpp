#pragma once

#include <cstddef>
#include <vector>

#include "repspace/mlp.hpp"

namespace repspace {

/// SGD with momentum. Velocity buffers mirror the parameter layers.
struct OptimState {
  double learning_rate = 0.06;
  double momentum = 0.9;
  double weight_decay = 0.0;
  std::vector<Layer> velocity;

  static OptimState for_params(const MlpParams& params, double lr, double momentum,
                               double weight_decay);
};

/// v <- momentum * v + grad + weight_decay * theta;  theta <- theta - lr * v.
/// Throws ErrorKind::non_finite naming the layer if a gradient is not finite.
void sgd_step(MlpParams& params, const MlpGrads& grads, OptimState& state);

/// base_lr * 0.5 * (1 + cos(pi * epoch / total_epochs)).
double cosine_lr(std::size_t epoch, std::size_t total_epochs, double base_lr);

}  // namespace repspace
