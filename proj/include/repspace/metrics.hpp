#pragma once

#include <cstddef>

#include "repspace/embeddings.hpp"

namespace repspace {

// Representation-space metrics over unit-norm embeddings.
//
// The kernels in this namespace parallelize their outer loop with OpenMP.
// Every reduction accumulates per-row partials which are then summed in row
// order, so results are bitwise identical for any thread count. The
// straightforward single-threaded versions live in repspace::serial.

/// Mean squared distance over the pairs. Range [0, 4].
double alignment(const PairSet& pairs, const EmbeddingMatrix& emb);

/// log of the mean over distinct unordered pairs of exp(-t |x - y|^2).
/// Range (-4t, 0].
double uniformity(const EmbeddingMatrix& emb, double t = 2.0);

/// Class-balanced mean over classes of the mean squared distance between
/// distinct same-class pairs. Every class in [0, C) needs >= 2 members.
double intra_class_alignment(const EmbeddingMatrix& emb, const LabelVector& labels);

/// 1 - intra / 2, intra in [0, 4].
double tolerance(double intra_class_alignment);

/// Fraction of queries whose most similar anchor (cosine, ties to the lower
/// index) is the anchor with the same row index.
double inst_disc_accuracy(const EmbeddingMatrix& anchors, const EmbeddingMatrix& queries);

/// k-NN top-1 accuracy. Neighbours are ranked by cosine similarity with
/// ties to the lower train index; the majority label wins and a vote tie
/// goes to the tied class whose member ranks closest.
double knn_accuracy(const EmbeddingMatrix& train, const LabelVector& train_labels,
                    const EmbeddingMatrix& test, const LabelVector& test_labels, std::size_t k);

struct BestNn {
  double accuracy = 0.0;
  std::size_t k = 1;
};

/// Max of knn_accuracy over k in {1, 3, ..., k_max}; smallest k on ties.
BestNn best_nn(const EmbeddingMatrix& train, const LabelVector& train_labels,
               const EmbeddingMatrix& test, const LabelVector& test_labels, std::size_t k_max = 101);

namespace serial {

double alignment(const PairSet& pairs, const EmbeddingMatrix& emb);
double uniformity(const EmbeddingMatrix& emb, double t = 2.0);
double intra_class_alignment(const EmbeddingMatrix& emb, const LabelVector& labels);
double inst_disc_accuracy(const EmbeddingMatrix& anchors, const EmbeddingMatrix& queries);
double knn_accuracy(const EmbeddingMatrix& train, const LabelVector& train_labels,
                    const EmbeddingMatrix& test, const LabelVector& test_labels, std::size_t k);
BestNn best_nn(const EmbeddingMatrix& train, const LabelVector& train_labels,
               const EmbeddingMatrix& test, const LabelVector& test_labels, std::size_t k_max = 101);

}  // namespace serial

namespace detail {

// Shared argument checks; both implementations apply the same contract.
void check_pairs(const PairSet& pairs, const EmbeddingMatrix& emb);
void check_uniformity(const EmbeddingMatrix& emb, double t);
std::vector<std::vector<std::size_t>> members_by_class(const EmbeddingMatrix& emb, const LabelVector& labels);
void check_inst_disc(const EmbeddingMatrix& anchors, const EmbeddingMatrix& queries);
void check_knn(const EmbeddingMatrix& train, const LabelVector& train_labels, const EmbeddingMatrix& test,
               const LabelVector& test_labels, std::size_t k);

/// Vote among the first k entries of `ranked` (train indices, closest
/// first) under the tie rules documented on knn_accuracy.
std::uint32_t vote(std::span<const std::size_t> ranked, const LabelVector& train_labels, std::size_t k,
                   std::vector<std::size_t>& scratch_counts);

}  // namespace detail

}  // namespace repspace
