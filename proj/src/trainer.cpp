#include "repspace/trainer.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "repspace/checkpoint.hpp"
#include "repspace/error.hpp"
#include "repspace/losses.hpp"
#include "repspace/optim.hpp"

namespace repspace {

void ModelSpec::validate() const {
  if (representation_dim < 2) throw Error(ErrorKind::validation, "model.representation_dim must be >= 2");
  if (use_projector && projector_out < 2) throw Error(ErrorKind::validation, "model.projector_out must be >= 2");
  for (auto w : encoder_hidden)
    if (w == 0) throw Error(ErrorKind::validation, "model.encoder_hidden widths must be > 0");
  for (auto w : projector_hidden)
    if (w == 0) throw Error(ErrorKind::validation, "model.projector_hidden widths must be > 0");
  if (!(encoder_dropout >= 0.0 && encoder_dropout < 1.0)) {
    throw Error(ErrorKind::validation, "model.encoder_dropout must be in [0,1)");
  }
  if (!(projector_dropout >= 0.0 && projector_dropout < 1.0)) {
    throw Error(ErrorKind::validation, "model.projector_dropout must be in [0,1)");
  }
}

namespace {

// Numeric failures inside a step (overflowing weights, keys that no longer
// normalize) are reported as divergence at that step.
void check_step(const char* who, const std::function<void()>& body, std::size_t epoch, std::size_t step) {
  try {
    body();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::non_finite && e.kind() != ErrorKind::zero_norm &&
        e.kind() != ErrorKind::norm_violation && e.kind() != ErrorKind::divergence) {
      throw;
    }
    throw Error(ErrorKind::divergence, std::string(who) + ": diverged at epoch " + std::to_string(epoch) + ", step " +
                                           std::to_string(step) + " (" + e.what() + ")");
  }
}

std::vector<std::size_t> encoder_widths(const ModelSpec& spec, std::size_t input_dim) {
  std::vector<std::size_t> w{input_dim};
  w.insert(w.end(), spec.encoder_hidden.begin(), spec.encoder_hidden.end());
  w.push_back(spec.representation_dim);
  return w;
}

std::vector<std::size_t> projector_widths(const ModelSpec& spec) {
  std::vector<std::size_t> w{spec.representation_dim};
  w.insert(w.end(), spec.projector_hidden.begin(), spec.projector_hidden.end());
  w.push_back(spec.projector_out);
  return w;
}

}  // namespace

Model init_model(const ModelSpec& spec, std::size_t input_dim, Rng& rng) {
  spec.validate();
  Model m;
  m.encoder = MlpParams::init(encoder_widths(spec, input_dim), spec.activation, spec.encoder_dropout, rng);
  if (spec.use_projector) {
    m.projector = MlpParams::init(projector_widths(spec), spec.activation, spec.projector_dropout, rng);
  }
  return m;
}

bool model_matches(const Model& model, const ModelSpec& spec, std::size_t input_dim) {
  if (model.encoder.widths() != encoder_widths(spec, input_dim)) return false;
  if (model.projector.has_value() != spec.use_projector) return false;
  return !model.projector || model.projector->widths() == projector_widths(spec);
}

Model initial_model(const ModelSpec& spec, std::size_t input_dim, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "init"));
  return init_model(spec, input_dim, rng);
}

std::vector<std::string> TrainConfig::violations(std::size_t dataset_size) const {
  std::vector<std::string> v;
  if (!(temperature > 0.0) || !std::isfinite(temperature)) v.push_back("train.temperature must be > 0");
  if (batch_size == 0) v.push_back("train.batch_size must be > 0");
  if (batch_size > dataset_size) v.push_back("train.batch_size must be <= dataset size");
  if (queue_size == 0 || (batch_size != 0 && queue_size % batch_size != 0)) {
    v.push_back("train.queue_size must be a positive multiple of train.batch_size");
  }
  if (!(lr >= 0.0)) v.push_back("train.lr must be >= 0");
  if (!(sgd_momentum >= 0.0 && sgd_momentum <= 1.0)) v.push_back("train.sgd_momentum must be in [0,1]");
  if (!(weight_decay >= 0.0)) v.push_back("train.weight_decay must be >= 0");
  if (!(key_momentum >= 0.0 && key_momentum <= 1.0)) v.push_back("train.key_momentum must be in [0,1]");
  if (epochs == 0) v.push_back("train.epochs must be > 0");
  try {
    aug.validate();
  } catch (const Error& e) {
    v.push_back(e.what());
  }
  try {
    model.validate();
  } catch (const Error& e) {
    v.push_back(e.what());
  }
  return v;
}

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : "; ") + s;
  return out;
}

}  // namespace

void TrainConfig::validate(std::size_t dataset_size) const {
  const auto v = violations(dataset_size);
  if (!v.empty()) throw Error(ErrorKind::validation, "invalid train config: " + join(v));
}

namespace {

void blend(std::span<double> key, std::span<const double> query, double m) {
  for (std::size_t i = 0; i < key.size(); ++i) key[i] = m * key[i] + (1.0 - m) * query[i];
}

void blend_mlp(MlpParams& key, const MlpParams& query, double m) {
  if (key.layers.size() != query.layers.size()) throw Error(ErrorKind::dimension_mismatch, "momentum_update: layer count");
  for (std::size_t l = 0; l < key.layers.size(); ++l) {
    auto& k = key.layers[l];
    const auto& q = query.layers[l];
    if (k.weight.rows() != q.weight.rows() || k.weight.cols() != q.weight.cols() || k.bias.size() != q.bias.size()) {
      throw Error(ErrorKind::dimension_mismatch, "momentum_update: shape mismatch in layer " + std::to_string(l));
    }
  }
  for (std::size_t l = 0; l < key.layers.size(); ++l) {
    blend(key.layers[l].weight.data(), query.layers[l].weight.data(), m);
    blend(key.layers[l].bias, query.layers[l].bias, m);
  }
}

Matrix gather_views(const Dataset& data, const std::vector<std::size_t>& order, std::size_t start,
                    std::size_t count, const AugSpec& aug, Rng& rng, Matrix* second) {
  const auto& samples = data.train();
  const std::size_t dim = data.spec().ambient_dim;
  Matrix first(count, dim);
  if (second) *second = Matrix(count, dim);
  for (std::size_t i = 0; i < count; ++i) {
    const Sample& s = samples[order[start + i]];
    if (second) {
      auto [a, b] = positive_pair(data, s, aug, rng);
      std::copy(a.features.begin(), a.features.end(), first.row(i).begin());
      std::copy(b.features.begin(), b.features.end(), second->row(i).begin());
    } else {
      auto a = augment(data, s, aug, rng);
      std::copy(a.features.begin(), a.features.end(), first.row(i).begin());
    }
  }
  return first;
}

// Fills the queue with `model` head embeddings of augmented views of a
// random subset of the train split.
void prime_queue(NegativeQueue& queue, const Model& model, const Dataset& data, const AugSpec& aug,
                 std::size_t batch, Rng& rng) {
  const std::size_t n = data.train().size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::size_t> prime(queue.capacity());
  for (std::size_t i = 0; i < prime.size(); ++i) prime[i] = order[i % n];
  for (std::size_t filled = 0; filled < prime.size();) {
    const std::size_t count = std::min(batch, prime.size() - filled);
    queue.enqueue(model_embed_head(model, gather_views(data, prime, filled, count, aug, rng, nullptr)));
    filled += count;
  }
}

}  // namespace

void momentum_update(const MomentumPair& pair) {
  if (pair.query == nullptr || pair.key == nullptr) throw Error(ErrorKind::invalid_argument, "momentum_update: null model");
  if (!(pair.momentum >= 0.0 && pair.momentum <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, "momentum_update: momentum must be in [0,1]");
  }
  if (pair.query->projector.has_value() != pair.key->projector.has_value()) {
    throw Error(ErrorKind::dimension_mismatch, "momentum_update: projector presence differs");
  }
  blend_mlp(pair.key->encoder, pair.query->encoder, pair.momentum);
  if (pair.key->projector) blend_mlp(*pair.key->projector, *pair.query->projector, pair.momentum);
}

TrainResult train(const Dataset& data, const TrainConfig& config, std::uint64_t seed, const EpochCallback& on_epoch) {
  const std::size_t n = data.train().size();
  if (n == 0) throw Error(ErrorKind::invalid_argument, "train: dataset is empty");
  config.validate(n);
  const std::size_t input_dim = data.spec().ambient_dim;

  TrainResult result;
  if (config.init_checkpoint.empty()) {
    result.model = initial_model(config.model, input_dim, seed);
  } else {
    result.model = load_model(config.init_checkpoint);
    if (!model_matches(result.model, config.model, input_dim)) {
      throw Error(ErrorKind::dimension_mismatch,
                  "train: init checkpoint " + config.init_checkpoint + " does not match the model spec");
    }
  }
  result.key_model = result.model;
  result.queue = NegativeQueue(config.queue_size, result.model.head_width());
  Rng queue_rng(derive_seed(seed, "queue"));
  prime_queue(result.queue, result.key_model, data, config.aug, config.batch_size, queue_rng);

  Rng shuffle_rng(derive_seed(seed, "shuffle"));
  Rng aug_rng(derive_seed(seed, "augment"));
  Rng dropout_rng(derive_seed(seed, "dropout"));
  ModelOptimizer opt = ModelOptimizer::for_model(result.model, config.lr, config.sgd_momentum, config.weight_decay);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t steps = n / config.batch_size;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = cosine_lr(epoch, config.epochs, config.lr);
    opt.set_learning_rate(lr);
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    EpochStats stats{epoch, 0.0, 0.0, lr};
    for (std::size_t step = 0; step < steps; ++step) {
      Matrix key_views;
      const Matrix query_views =
          gather_views(data, order, step * config.batch_size, config.batch_size, config.aug, aug_rng, &key_views);
      BatchLoss loss;
      check_step("train", [&] {
        ModelForward fwd = model_forward(result.model, query_views, true, dropout_rng);
        const Matrix keys = model_embed_head(result.key_model, key_views);
        loss = info_nce_batch(fwd.embedding, keys, result.queue, config.temperature);
        if (!std::isfinite(loss.mean_loss)) throw Error(ErrorKind::divergence, "non-finite loss");
        ModelGrads grads = model_backward(fwd, loss.query_grad);
        sgd_step(result.model, grads, opt);
        momentum_update(MomentumPair{&result.model, &result.key_model, config.key_momentum});
        result.queue.enqueue(keys);
      }, epoch, step);
      stats.loss += loss.mean_loss;
      stats.batch_inst_disc += loss.accuracy;
    }
    stats.loss /= static_cast<double>(steps);
    stats.batch_inst_disc /= static_cast<double>(steps);
    result.stats.push_back(stats);
    if (on_epoch) on_epoch(stats, result.model);
  }
  return result;
}

std::vector<std::string> DistillConfig::violations(std::size_t dataset_size) const {
  std::vector<std::string> v;
  if (!(tau_student > 0.0)) v.push_back("distill.tau_student must be > 0");
  if (!(tau_teacher > 0.0)) v.push_back("distill.tau_teacher must be > 0");
  if (batch_size == 0 || batch_size > dataset_size) v.push_back("distill.batch_size must be in [1, dataset size]");
  if (queue_size == 0 || (batch_size != 0 && queue_size % batch_size != 0)) {
    v.push_back("distill.queue_size must be a positive multiple of distill.batch_size");
  }
  if (!(lr >= 0.0)) v.push_back("distill.lr must be >= 0");
  if (!(sgd_momentum >= 0.0 && sgd_momentum <= 1.0)) v.push_back("distill.sgd_momentum must be in [0,1]");
  if (!(weight_decay >= 0.0)) v.push_back("distill.weight_decay must be >= 0");
  try {
    aug.validate();
    student.validate();
  } catch (const Error& e) {
    v.push_back(e.what());
  }
  return v;
}

DistillResult distill_init(const Dataset& data, const Model& teacher, const DistillConfig& config, std::uint64_t seed) {
  const std::size_t n = data.train().size();
  if (n == 0) throw Error(ErrorKind::invalid_argument, "distill_init: dataset is empty");
  if (const auto v = config.violations(n); !v.empty()) {
    throw Error(ErrorKind::validation, "invalid distill config: " + join(v));
  }
  const std::size_t input_dim = data.spec().ambient_dim;
  teacher.validate();
  if (teacher.input_width() != input_dim) {
    throw Error(ErrorKind::dimension_mismatch, "distill_init: teacher input width != dataset dimension");
  }
  DistillResult result;
  result.student = initial_model(config.student, input_dim, seed);
  if (teacher.head_width() != result.student.head_width()) {
    throw Error(ErrorKind::dimension_mismatch, "distill_init: teacher output dim " +
                                                   std::to_string(teacher.head_width()) + " != student output dim " +
                                                   std::to_string(result.student.head_width()));
  }
  if (config.epochs == 0) return result;

  Rng shuffle_rng(derive_seed(seed, "distill-shuffle"));
  Rng aug_rng(derive_seed(seed, "distill-augment"));
  Rng dropout_rng(derive_seed(seed, "distill-dropout"));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  NegativeQueue queue(config.queue_size, teacher.head_width());
  prime_queue(queue, teacher, data, config.aug, config.batch_size, aug_rng);

  ModelOptimizer opt =
      ModelOptimizer::for_model(result.student, config.lr, config.sgd_momentum, config.weight_decay);
  const std::size_t steps = n / config.batch_size;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = cosine_lr(epoch, config.epochs, config.lr);
    opt.set_learning_rate(lr);
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    EpochStats stats{epoch, 0.0, 0.0, lr};
    for (std::size_t step = 0; step < steps; ++step) {
      const Matrix views = gather_views(data, order, step * config.batch_size, config.batch_size, config.aug, aug_rng, nullptr);
      BatchLoss loss;
      check_step("distill_init", [&] {
        const Matrix targets = model_embed_head(teacher, views);
        ModelForward fwd = model_forward(result.student, views, true, dropout_rng);
        loss = seed_distill_batch(fwd.embedding, targets, queue, config.tau_student, config.tau_teacher);
        if (!std::isfinite(loss.mean_loss)) throw Error(ErrorKind::divergence, "non-finite loss");
        ModelGrads grads = model_backward(fwd, loss.query_grad);
        sgd_step(result.student, grads, opt);
        queue.enqueue(targets);
      }, epoch, step);
      stats.loss += loss.mean_loss;
      stats.batch_inst_disc += loss.accuracy;
    }
    stats.loss /= static_cast<double>(steps);
    stats.batch_inst_disc /= static_cast<double>(steps);
    result.stats.push_back(stats);
  }
  return result;
}

}  // namespace repspace
