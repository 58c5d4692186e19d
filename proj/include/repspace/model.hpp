#pragma once

#include <optional>

#include "repspace/mlp.hpp"
#include "repspace/optim.hpp"

namespace repspace {

/// Encoder (backbone) plus an optional projector head. Training losses see
/// the L2-normalized head output; evaluation metrics see the normalized
/// backbone output.
struct Model {
  MlpParams encoder;
  std::optional<MlpParams> projector;

  std::size_t input_width() const { return encoder.input_width(); }
  std::size_t representation_width() const { return encoder.output_width(); }
  std::size_t head_width() const {
    return projector ? projector->output_width() : encoder.output_width();
  }
  void validate() const;

  friend bool operator==(const Model&, const Model&) = default;
};

struct ModelGrads {
  MlpGrads encoder;
  std::optional<MlpGrads> projector;
};

// Record of one forward pass through encoder -> projector -> normalize.
struct ModelForward {
  Matrix embedding;  // unit rows, shape (batch, head_width)
  Matrix head_raw;   // pre-normalization head output
  GradTape encoder_tape;
  std::optional<GradTape> projector_tape;
};

ModelForward model_forward(const Model& model, const Matrix& input, bool train_mode, Rng& rng);

/// Backprop a gradient w.r.t. the normalized embedding through the
/// normalization, projector and encoder.
ModelGrads model_backward(ModelForward& fwd, const Matrix& embedding_grad);

/// Eval-mode normalized head output.
Matrix model_embed_head(const Model& model, const Matrix& input);

/// Eval-mode normalized backbone output.
Matrix model_embed_backbone(const Model& model, const Matrix& input);

/// Gradient of a loss w.r.t. raw z given the gradient w.r.t. u = z / |z|.
Matrix normalize_backward(const Matrix& raw, const Matrix& unit, const Matrix& unit_grad);

struct ModelOptimizer {
  OptimState encoder;
  std::optional<OptimState> projector;

  static ModelOptimizer for_model(const Model& m, double lr, double momentum, double weight_decay);
  void set_learning_rate(double lr);
};

void sgd_step(Model& model, const ModelGrads& grads, ModelOptimizer& opt);

}  // namespace repspace
