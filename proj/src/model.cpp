#include "repspace/model.hpp"

#include <cmath>

#include "repspace/error.hpp"

namespace repspace {

void Model::validate() const {
  encoder.validate();
  if (projector) {
    projector->validate();
    if (projector->input_width() != encoder.output_width()) {
      throw Error(ErrorKind::dimension_mismatch, "Model: projector input width != encoder output width");
    }
  }
}

ModelForward model_forward(const Model& model, const Matrix& input, bool train_mode, Rng& rng) {
  ModelForward out;
  MlpForward enc = mlp_forward(model.encoder, input, train_mode, rng);
  out.encoder_tape = std::move(enc.tape);
  if (model.projector) {
    MlpForward proj = mlp_forward(*model.projector, enc.output, train_mode, rng);
    out.projector_tape = std::move(proj.tape);
    out.head_raw = std::move(proj.output);
  } else {
    out.head_raw = std::move(enc.output);
  }
  out.embedding = out.head_raw;
  l2_normalize_rows(out.embedding);
  return out;
}

Matrix normalize_backward(const Matrix& raw, const Matrix& unit, const Matrix& unit_grad) {
  // d/dz (z/|z|) applied to g: (g - u (u.g)) / |z|
  Matrix dz(raw.rows(), raw.cols());
  for (std::size_t r = 0; r < raw.rows(); ++r) {
    const double norm = std::sqrt(squared_norm(raw.row(r)));
    auto u = unit.row(r);
    auto g = unit_grad.row(r);
    const double ug = dot(u, g);
    auto d = dz.row(r);
    for (std::size_t c = 0; c < d.size(); ++c) d[c] = (g[c] - u[c] * ug) / norm;
  }
  return dz;
}

ModelGrads model_backward(ModelForward& fwd, const Matrix& embedding_grad) {
  if (embedding_grad.rows() != fwd.embedding.rows() || embedding_grad.cols() != fwd.embedding.cols()) {
    throw Error(ErrorKind::dimension_mismatch, "model_backward: gradient shape differs from embedding");
  }
  Matrix dhead = normalize_backward(fwd.head_raw, fwd.embedding, embedding_grad);
  ModelGrads grads;
  if (fwd.projector_tape) {
    MlpGrads pg = backward(*fwd.projector_tape, dhead);
    dhead = std::move(pg.input);
    grads.projector = std::move(pg);
  }
  grads.encoder = backward(fwd.encoder_tape, dhead);
  return grads;
}

Matrix model_embed_head(const Model& model, const Matrix& input) {
  Matrix h = mlp_infer(model.encoder, input);
  if (model.projector) h = mlp_infer(*model.projector, h);
  l2_normalize_rows(h);
  return h;
}

Matrix model_embed_backbone(const Model& model, const Matrix& input) {
  Matrix h = mlp_infer(model.encoder, input);
  l2_normalize_rows(h);
  return h;
}

ModelOptimizer ModelOptimizer::for_model(const Model& m, double lr, double momentum, double weight_decay) {
  ModelOptimizer o{OptimState::for_params(m.encoder, lr, momentum, weight_decay), std::nullopt};
  if (m.projector) o.projector = OptimState::for_params(*m.projector, lr, momentum, weight_decay);
  return o;
}

void ModelOptimizer::set_learning_rate(double lr) {
  encoder.learning_rate = lr;
  if (projector) projector->learning_rate = lr;
}

void sgd_step(Model& model, const ModelGrads& grads, ModelOptimizer& opt) {
  if (model.projector.has_value() != grads.projector.has_value() ||
      model.projector.has_value() != opt.projector.has_value()) {
    throw Error(ErrorKind::dimension_mismatch, "sgd_step: projector presence mismatch");
  }
  sgd_step(model.encoder, grads.encoder, opt.encoder);
  if (model.projector) sgd_step(*model.projector, *grads.projector, *opt.projector);
}

}  // namespace repspace
