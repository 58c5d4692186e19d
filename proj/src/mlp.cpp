#include "repspace/mlp.hpp"

#include <cmath>
#include <string>

#include "repspace/error.hpp"

namespace repspace {

MlpParams MlpParams::init(std::span<const std::size_t> widths, Activation act,
                          double dropout_p, Rng& rng) {
  if (widths.size() < 2) {
    throw Error(ErrorKind::invalid_argument, "MlpParams::init: need at least input and output width");
  }
  MlpParams p;
  p.activation = act;
  p.dropout_p = dropout_p;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t in = widths[l];
    const std::size_t out = widths[l + 1];
    if (in == 0 || out == 0) throw Error(ErrorKind::invalid_argument, "MlpParams::init: zero width");
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    Layer layer{Matrix(out, in), std::vector<double>(out, 0.0)};
    for (double& w : layer.weight.data()) w = rng.uniform(-bound, bound);
    for (double& b : layer.bias) b = rng.uniform(-bound, bound);
    p.layers.push_back(std::move(layer));
  }
  p.validate();
  return p;
}

std::size_t MlpParams::input_width() const { return layers.empty() ? 0 : layers.front().in_width(); }
std::size_t MlpParams::output_width() const { return layers.empty() ? 0 : layers.back().out_width(); }

std::size_t MlpParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

std::vector<std::size_t> MlpParams::widths() const {
  std::vector<std::size_t> w;
  if (layers.empty()) return w;
  w.push_back(layers.front().in_width());
  for (const auto& l : layers) w.push_back(l.out_width());
  return w;
}

void MlpParams::validate() const {
  if (layers.empty()) throw Error(ErrorKind::invalid_argument, "MlpParams: no layers");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw Error(ErrorKind::invalid_argument, "MlpParams: dropout_p must be in [0,1)");
  }
  if (activation != Activation::none && activation != Activation::relu) {
    throw Error(ErrorKind::invalid_argument, "MlpParams: unknown activation");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.bias.size() != layer.out_width()) {
      throw Error(ErrorKind::dimension_mismatch, "MlpParams: layer " + std::to_string(l) + " bias width");
    }
    if (l > 0 && layers[l - 1].out_width() != layer.in_width()) {
      throw Error(ErrorKind::dimension_mismatch,
                  "MlpParams: layer " + std::to_string(l) + " input does not chain");
    }
    if (!layer.weight.all_finite()) {
      throw Error(ErrorKind::non_finite, "MlpParams: layer " + std::to_string(l) + " non-finite weight");
    }
    for (double b : layer.bias) {
      if (!std::isfinite(b)) {
        throw Error(ErrorKind::non_finite, "MlpParams: layer " + std::to_string(l) + " non-finite bias");
      }
    }
  }
}

struct MlpForwardAccess {
  static MlpForward run(const MlpParams& params, const Matrix& input, bool train_mode,
                        Rng* rng, bool record) {
    if (params.layers.empty()) throw Error(ErrorKind::invalid_argument, "mlp_forward: no layers");
    if (input.cols() != params.input_width()) {
      throw Error(ErrorKind::dimension_mismatch,
                  "mlp_forward: input width " + std::to_string(input.cols()) + " != " +
                      std::to_string(params.input_width()));
    }
    MlpForward result;
    GradTape& tape = result.tape;
    tape.params_ = &params;
    const bool use_dropout = train_mode && params.dropout_p > 0.0;
    const double keep_scale = 1.0 / (1.0 - params.dropout_p);

    Matrix x = input;
    const std::size_t last = params.layers.size() - 1;
    for (std::size_t l = 0; l <= last; ++l) {
      const Layer& layer = params.layers[l];
      Matrix z = matmul_abt(x, layer.weight);
      for (std::size_t r = 0; r < z.rows(); ++r) {
        auto zr = z.row(r);
        for (std::size_t c = 0; c < zr.size(); ++c) zr[c] += layer.bias[c];
      }
      if (record) tape.layer_inputs_.push_back(std::move(x));
      if (l == last) {
        x = std::move(z);
        break;
      }
      Matrix a = z;
      if (params.activation == Activation::relu) {
        for (double& v : a.data()) v = v > 0.0 ? v : 0.0;
      }
      Matrix scale;
      if (use_dropout) {
        scale = Matrix(a.rows(), a.cols());
        auto s = scale.data();
        auto av = a.data();
        for (std::size_t i = 0; i < s.size(); ++i) {
          s[i] = rng->bernoulli(params.dropout_p) ? 0.0 : keep_scale;
          av[i] *= s[i];
        }
      }
      if (record) {
        tape.pre_activations_.push_back(std::move(z));
        tape.dropout_scale_.push_back(std::move(scale));
      }
      x = std::move(a);
    }
    tape.output_rows_ = x.rows();
    tape.output_cols_ = x.cols();
    result.output = std::move(x);
    return result;
  }

  static MlpGrads backward(GradTape& tape, const Matrix& output_grad) {
    if (tape.used_) throw Error(ErrorKind::tape_reused, "backward: tape already consumed");
    if (tape.params_ == nullptr || tape.layer_inputs_.empty()) {
      throw Error(ErrorKind::invalid_argument, "backward: tape was not recorded");
    }
    if (output_grad.rows() != tape.output_rows_ || output_grad.cols() != tape.output_cols_) {
      throw Error(ErrorKind::dimension_mismatch, "backward: output_grad shape differs from forward output");
    }
    tape.used_ = true;
    const MlpParams& params = *tape.params_;
    const std::size_t n_layers = params.layers.size();
    MlpGrads grads;
    grads.layers.resize(n_layers);

    Matrix dz = output_grad;
    for (std::size_t li = n_layers; li-- > 0;) {
      const Layer& layer = params.layers[li];
      const Matrix& x = tape.layer_inputs_[li];
      Layer& g = grads.layers[li];
      g.weight = matmul_atb(dz, x);
      g.bias.assign(layer.out_width(), 0.0);
      for (std::size_t r = 0; r < dz.rows(); ++r) {
        auto dr = dz.row(r);
        for (std::size_t c = 0; c < dr.size(); ++c) g.bias[c] += dr[c];
      }
      Matrix dx = matmul(dz, layer.weight);
      if (li == 0) {
        grads.input = std::move(dx);
        break;
      }
      // dx is the gradient w.r.t. the (activated, dropped-out) output of layer li-1.
      const Matrix& z = tape.pre_activations_[li - 1];
      const Matrix& scale = tape.dropout_scale_[li - 1];
      auto d = dx.data();
      auto zv = z.data();
      if (!scale.empty()) {
        auto s = scale.data();
        for (std::size_t i = 0; i < d.size(); ++i) d[i] *= s[i];
      }
      if (params.activation == Activation::relu) {
        for (std::size_t i = 0; i < d.size(); ++i) {
          if (!(zv[i] > 0.0)) d[i] = 0.0;
        }
      }
      dz = std::move(dx);
    }
    tape.layer_inputs_.clear();
    tape.pre_activations_.clear();
    tape.dropout_scale_.clear();
    return grads;
  }
};

MlpForward mlp_forward(const MlpParams& params, const Matrix& input, bool train_mode, Rng& rng) {
  return MlpForwardAccess::run(params, input, train_mode, &rng, true);
}

Matrix mlp_infer(const MlpParams& params, const Matrix& input) {
  return MlpForwardAccess::run(params, input, false, nullptr, false).output;
}

MlpGrads backward(GradTape& tape, const Matrix& output_grad) {
  return MlpForwardAccess::backward(tape, output_grad);
}

}  // namespace repspace
