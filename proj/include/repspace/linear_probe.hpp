#pragma once

#include <cstdint>

#include "repspace/embeddings.hpp"

namespace repspace {

/// Multinomial logistic regression trained with plain minibatch SGD on
/// frozen unit-norm embeddings. The learning rate follows a cosine decay
/// over epochs; weights start uniform in +-0.01 from `seed`. With
/// `standardize`, every feature is shifted and scaled by its train-split
/// mean and standard deviation first (constant features are only centered).
struct LinearProbeConfig {
  std::size_t epochs = 100;
  double lr = 1.0;
  std::size_t batch = 64;
  std::uint64_t seed = 7;
  bool standardize = true;

  friend bool operator==(const LinearProbeConfig&, const LinearProbeConfig&) = default;
};

struct LinearProbeResult {
  double test_accuracy = 0.0;
  double train_accuracy = 0.0;
  Matrix weight;  // (classes, d), acts on standardized features
  std::vector<double> bias;
  std::vector<double> mean;   // per feature; zeros without standardize
  std::vector<double> scale;  // per feature; ones without standardize
};

LinearProbeResult linear_probe_fit(const EmbeddingMatrix& train, const LabelVector& train_labels,
                                   const EmbeddingMatrix& test, const LabelVector& test_labels,
                                   const LinearProbeConfig& config);

/// Top-1 test accuracy. Throws if the training labels hold a single class.
double linear_probe(const EmbeddingMatrix& train, const LabelVector& train_labels, const EmbeddingMatrix& test,
                    const LabelVector& test_labels, const LinearProbeConfig& config);

}  // namespace repspace
