// Single-threaded reference versions of the metric kernels. Kept for
// cross-checking the parallel kernels and as the benchmark baseline.

#include <algorithm>
#include <cmath>
#include <numeric>

#include "repspace/error.hpp"
#include "repspace/metrics.hpp"

namespace repspace::serial {

double alignment(const PairSet& pairs, const EmbeddingMatrix& emb) {
  detail::check_pairs(pairs, emb);
  double sum = 0.0;
  for (const auto& [a, b] : pairs.pairs) sum += squared_distance(emb.row(a), emb.row(b));
  return sum / static_cast<double>(pairs.size());
}

double uniformity(const EmbeddingMatrix& emb, double t) {
  detail::check_uniformity(emb, t);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < emb.n(); ++i) {
    for (std::size_t j = i + 1; j < emb.n(); ++j) {
      sum += std::exp(-t * squared_distance(emb.row(i), emb.row(j)));
      ++count;
    }
  }
  return std::log(sum / static_cast<double>(count));
}

double intra_class_alignment(const EmbeddingMatrix& emb, const LabelVector& labels) {
  const auto members = detail::members_by_class(emb, labels);
  double total = 0.0;
  for (const auto& m : members) {
    double s = 0.0;
    std::size_t count = 0;
    for (std::size_t a = 0; a < m.size(); ++a) {
      for (std::size_t b = a + 1; b < m.size(); ++b) {
        s += squared_distance(emb.row(m[a]), emb.row(m[b]));
        ++count;
      }
    }
    total += s / static_cast<double>(count);
  }
  return total / static_cast<double>(members.size());
}

double inst_disc_accuracy(const EmbeddingMatrix& anchors, const EmbeddingMatrix& queries) {
  detail::check_inst_disc(anchors, queries);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < queries.n(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < anchors.n(); ++j) {
      if (dot(queries.row(i), anchors.row(j)) > dot(queries.row(i), anchors.row(best))) best = j;
    }
    correct += best == i;
  }
  return static_cast<double>(correct) / static_cast<double>(queries.n());
}

namespace {

std::vector<std::size_t> full_ranking(const EmbeddingMatrix& train, std::span<const double> query) {
  std::vector<double> sims(train.n());
  for (std::size_t j = 0; j < train.n(); ++j) sims[j] = dot(query, train.row(j));
  std::vector<std::size_t> order(train.n());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });
  return order;
}

}  // namespace

double knn_accuracy(const EmbeddingMatrix& train, const LabelVector& train_labels, const EmbeddingMatrix& test,
                    const LabelVector& test_labels, std::size_t k) {
  detail::check_knn(train, train_labels, test, test_labels, k);
  std::vector<std::size_t> counts(std::max(train_labels.num_classes(), test_labels.num_classes()));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.n(); ++i) {
    const auto order = full_ranking(train, test.row(i));
    correct += detail::vote(order, train_labels, k, counts) == test_labels.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(test.n());
}

BestNn best_nn(const EmbeddingMatrix& train, const LabelVector& train_labels, const EmbeddingMatrix& test,
               const LabelVector& test_labels, std::size_t k_max) {
  detail::check_knn(train, train_labels, test, test_labels, k_max);
  BestNn best{-1.0, 1};
  for (std::size_t k = 1; k <= k_max; k += 2) {
    const double acc = serial::knn_accuracy(train, train_labels, test, test_labels, k);
    if (acc > best.accuracy) best = {acc, k};
  }
  return best;
}

}  // namespace repspace::serial
