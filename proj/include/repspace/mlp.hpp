#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "repspace/matrix.hpp"
#include "repspace/rng.hpp"

namespace repspace {

enum class Activation : std::uint8_t { none = 0, relu = 1 };

/// One affine layer: y = W x + b with W shaped (out, in).
struct Layer {
  Matrix weight;
  std::vector<double> bias;

  std::size_t in_width() const { return weight.cols(); }
  std::size_t out_width() const { return weight.rows(); }

  friend bool operator==(const Layer&, const Layer&) = default;
};

/// Multi-layer perceptron. The activation (and dropout, when p > 0) is
/// applied after every layer except the last, so the final layer is linear.
struct MlpParams {
  std::vector<Layer> layers;
  Activation activation = Activation::relu;
  double dropout_p = 0.0;

  /// Uniform Glorot init: weights and biases in +-sqrt(6 / (fan_in + fan_out)).
  /// `widths` lists input width, hidden widths, output width.
  static MlpParams init(std::span<const std::size_t> widths, Activation act,
                        double dropout_p, Rng& rng);

  std::size_t input_width() const;
  std::size_t output_width() const;
  std::size_t parameter_count() const;
  std::vector<std::size_t> widths() const;

  /// Throws if layer dims do not chain, dropout_p is outside [0,1) or any
  /// parameter is non-finite.
  void validate() const;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Gradients shaped like MlpParams::layers, plus the gradient with respect
/// to the forward input.
struct MlpGrads {
  std::vector<Layer> layers;
  Matrix input;
};

// Activations recorded by one forward pass. Holds a reference to the
// parameters it was produced with; they must outlive the tape and stay
// unmodified until backward() runs.
class GradTape {
 public:
  GradTape() = default;
  bool used() const noexcept { return used_; }

 private:
  friend struct MlpForwardAccess;
  const MlpParams* params_ = nullptr;
  std::vector<Matrix> layer_inputs_;  // input to each layer
  std::vector<Matrix> pre_activations_;  // hidden layers only
  std::vector<Matrix> dropout_scale_;  // hidden layers only; empty when no dropout
  std::size_t output_rows_ = 0;
  std::size_t output_cols_ = 0;
  bool used_ = false;
};

struct MlpForward {
  Matrix output;
  GradTape tape;
};

/// Forward pass over a batch (rows are samples). In train mode dropout masks
/// are drawn from `rng` (inverted scaling); in eval mode dropout is identity
/// and `rng` is not touched.
MlpForward mlp_forward(const MlpParams& params, const Matrix& input, bool train_mode, Rng& rng);

/// Eval-mode forward without recording a tape.
Matrix mlp_infer(const MlpParams& params, const Matrix& input);

/// Reverse pass. A tape can be consumed once; a second call throws
/// ErrorKind::tape_reused.
MlpGrads backward(GradTape& tape, const Matrix& output_grad);

}  // namespace repspace
