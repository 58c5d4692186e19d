#include "repspace/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "repspace/error.hpp"

namespace repspace {

OptimState OptimState::for_params(const MlpParams& params, double lr, double momentum,
                                  double weight_decay) {
  if (!(lr >= 0.0) || !(momentum >= 0.0 && momentum <= 1.0) || !(weight_decay >= 0.0)) {
    throw Error(ErrorKind::invalid_argument, "OptimState: lr >= 0, momentum in [0,1], weight_decay >= 0");
  }
  OptimState s;
  s.learning_rate = lr;
  s.momentum = momentum;
  s.weight_decay = weight_decay;
  for (const auto& l : params.layers) {
    s.velocity.push_back(Layer{Matrix(l.weight.rows(), l.weight.cols()), std::vector<double>(l.bias.size(), 0.0)});
  }
  return s;
}

namespace {

void check_finite(std::span<const double> g, std::size_t layer, const char* what) {
  for (double x : g) {
    if (!std::isfinite(x)) {
      throw Error(ErrorKind::non_finite,
                  "sgd_step: non-finite " + std::string(what) + " gradient in layer " + std::to_string(layer));
    }
  }
}

void update(std::span<double> theta, std::span<const double> grad, std::span<double> v,
            const OptimState& s) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    v[i] = s.momentum * v[i] + grad[i] + s.weight_decay * theta[i];
    theta[i] -= s.learning_rate * v[i];
  }
}

}  // namespace

void sgd_step(MlpParams& params, const MlpGrads& grads, OptimState& state) {
  if (grads.layers.size() != params.layers.size() || state.velocity.size() != params.layers.size()) {
    throw Error(ErrorKind::dimension_mismatch, "sgd_step: layer count mismatch");
  }
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& g = grads.layers[l];
    const auto& p = params.layers[l];
    const auto& v = state.velocity[l];
    if (g.weight.rows() != p.weight.rows() || g.weight.cols() != p.weight.cols() ||
        g.bias.size() != p.bias.size() || v.weight.size() != p.weight.size() ||
        v.bias.size() != p.bias.size()) {
      throw Error(ErrorKind::dimension_mismatch, "sgd_step: shape mismatch in layer " + std::to_string(l));
    }
    check_finite(g.weight.data(), l, "weight");
    check_finite(g.bias, l, "bias");
  }
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& p = params.layers[l];
    auto& v = state.velocity[l];
    update(p.weight.data(), grads.layers[l].weight.data(), v.weight.data(), state);
    update(p.bias, grads.layers[l].bias, v.bias, state);
  }
}

double cosine_lr(std::size_t epoch, std::size_t total_epochs, double base_lr) {
  if (total_epochs == 0) throw Error(ErrorKind::invalid_argument, "cosine_lr: total_epochs must be > 0");
  if (epoch > total_epochs) throw Error(ErrorKind::invalid_argument, "cosine_lr: epoch > total_epochs");
  if (epoch == total_epochs) return 0.0;
  const double frac = static_cast<double>(epoch) / static_cast<double>(total_epochs);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

}  // namespace repspace
