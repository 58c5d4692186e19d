#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "repspace/model.hpp"
#include "repspace/queue.hpp"
#include "repspace/synthetic.hpp"

namespace repspace {

/// Encoder and projector architecture. The encoder maps ambient features
/// through `encoder_hidden` to `representation_dim`; the projector (when
/// enabled) maps that through `projector_hidden` to `projector_out`.
struct ModelSpec {
  std::vector<std::size_t> encoder_hidden{64};
  std::size_t representation_dim = 16;
  Activation activation = Activation::relu;
  double encoder_dropout = 0.0;
  bool use_projector = true;
  std::vector<std::size_t> projector_hidden{32};
  std::size_t projector_out = 16;
  double projector_dropout = 0.0;

  void validate() const;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Fresh model with Glorot-uniform weights drawn from `rng`.
Model init_model(const ModelSpec& spec, std::size_t input_dim, Rng& rng);

/// True if `model` has exactly the layer widths `spec` describes.
bool model_matches(const Model& model, const ModelSpec& spec, std::size_t input_dim);

struct TrainConfig {
  double temperature = 0.1;
  std::size_t queue_size = 256;
  std::size_t batch_size = 64;
  double lr = 0.06;
  double sgd_momentum = 0.9;
  double weight_decay = 1e-4;
  double key_momentum = 0.999;
  std::size_t epochs = 50;
  AugSpec aug = strong_aug();
  ModelSpec model;
  std::string init_checkpoint;  // empty: random init

  /// Returns one message per violated field (empty when valid).
  std::vector<std::string> violations(std::size_t dataset_size) const;
  void validate(std::size_t dataset_size) const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;
  double batch_inst_disc = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  Model model;      // query encoder (+ projector)
  Model key_model;  // momentum copy
  NegativeQueue queue{1, 1};
  std::vector<EpochStats> stats;
};

/// Query/key parameter pair of the momentum encoder.
struct MomentumPair {
  const Model* query = nullptr;
  Model* key = nullptr;
  double momentum = 0.999;
};

/// theta_k <- m * theta_k + (1 - m) * theta_q, elementwise over every layer.
void momentum_update(const MomentumPair& pair);

using EpochCallback = std::function<void(const EpochStats&, const Model&)>;

/// Momentum-contrast training on the dataset's train split. Each step
/// draws two views per sample, runs the query model with gradients and the
/// key model without, applies InfoNCE against the queue, takes an SGD
/// step, updates the key model and enqueues the keys. The queue starts
/// filled with key-model embeddings of augmented train samples. Fully
/// deterministic in `seed`.
/// Throws ErrorKind::divergence (with epoch and step) on a non-finite loss.
TrainResult train(const Dataset& data, const TrainConfig& config, std::uint64_t seed,
                  const EpochCallback& on_epoch = {});

/// The random init train() and distill_init() start from for `seed`.
Model initial_model(const ModelSpec& spec, std::size_t input_dim, std::uint64_t seed);

struct DistillConfig {
  std::size_t epochs = 2;
  double tau_student = 0.1;
  double tau_teacher = 0.1;
  std::size_t queue_size = 256;
  std::size_t batch_size = 64;
  double lr = 0.06;
  double sgd_momentum = 0.9;
  double weight_decay = 1e-4;
  AugSpec aug = baseline_aug();
  ModelSpec student;

  std::vector<std::string> violations(std::size_t dataset_size) const;
  friend bool operator==(const DistillConfig&, const DistillConfig&) = default;
};

struct DistillResult {
  Model student;
  std::vector<EpochStats> stats;
};

/// Trains a student to match the teacher's similarity distribution over a
/// queue of teacher head embeddings (plus the teacher's own embedding of the
/// sample). The student starts from initial_model(seed), so epochs = 0
/// returns exactly that init.
DistillResult distill_init(const Dataset& data, const Model& teacher, const DistillConfig& config,
                           std::uint64_t seed);

}  // namespace repspace
