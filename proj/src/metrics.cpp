#include "repspace/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "repspace/error.hpp"

namespace repspace {

namespace detail {

void check_pairs(const PairSet& pairs, const EmbeddingMatrix& emb) {
  if (pairs.empty()) throw Error(ErrorKind::invalid_argument, "alignment: empty pair set");
  pairs.validate(emb.n());
}

void check_uniformity(const EmbeddingMatrix& emb, double t) {
  if (emb.n() < 2) throw Error(ErrorKind::invalid_argument, "uniformity: need n >= 2");
  if (!(t > 0.0)) throw Error(ErrorKind::invalid_argument, "uniformity: t must be > 0");
}

std::vector<std::vector<std::size_t>> members_by_class(const EmbeddingMatrix& emb, const LabelVector& labels) {
  if (labels.size() != emb.n()) {
    throw Error(ErrorKind::dimension_mismatch, "intra_class_alignment: label count != embedding rows");
  }
  std::vector<std::vector<std::size_t>> members(labels.num_classes());
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels.labels[i]].push_back(i);
  for (std::size_t c = 0; c < members.size(); ++c) {
    if (members[c].size() < 2) {
      throw Error(ErrorKind::invalid_argument,
                  "intra_class_alignment: class " + std::to_string(c) + " has " +
                      std::to_string(members[c].size()) + " member(s), need >= 2");
    }
  }
  return members;
}

void check_inst_disc(const EmbeddingMatrix& anchors, const EmbeddingMatrix& queries) {
  if (anchors.n() != queries.n()) throw Error(ErrorKind::dimension_mismatch, "inst_disc_accuracy: row count mismatch");
  if (anchors.d() != queries.d()) throw Error(ErrorKind::dimension_mismatch, "inst_disc_accuracy: dimension mismatch");
}

void check_knn(const EmbeddingMatrix& train, const LabelVector& train_labels, const EmbeddingMatrix& test,
               const LabelVector& test_labels, std::size_t k) {
  if (k % 2 == 0) throw Error(ErrorKind::invalid_argument, "knn: k must be odd, got " + std::to_string(k));
  if (k > train.n()) {
    throw Error(ErrorKind::invalid_argument,
                "knn: k = " + std::to_string(k) + " exceeds train size " + std::to_string(train.n()));
  }
  if (train_labels.size() != train.n() || test_labels.size() != test.n()) {
    throw Error(ErrorKind::dimension_mismatch, "knn: label count != embedding rows");
  }
  if (train.d() != test.d()) throw Error(ErrorKind::dimension_mismatch, "knn: dimension mismatch");
}

std::uint32_t vote(std::span<const std::size_t> ranked, const LabelVector& train_labels, std::size_t k,
                   std::vector<std::size_t>& counts) {
  std::fill(counts.begin(), counts.end(), 0);
  std::size_t best = 0;
  for (std::size_t j = 0; j < k; ++j) best = std::max(best, ++counts[train_labels.labels[ranked[j]]]);
  for (std::size_t j = 0; j < k; ++j) {
    const auto label = train_labels.labels[ranked[j]];
    if (counts[label] == best) return label;
  }
  return train_labels.labels[ranked[0]];
}

}  // namespace detail

namespace {

// Train indices of the `depth` most similar rows, closest first.
void rank_neighbours(const EmbeddingMatrix& train, std::span<const double> query, std::size_t depth,
                     std::vector<double>& sims, std::vector<std::size_t>& order) {
  const std::size_t n = train.n();
  sims.resize(n);
  order.resize(n);
  for (std::size_t j = 0; j < n; ++j) sims[j] = dot(query, train.row(j));
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto closer = [&](std::size_t a, std::size_t b) { return sims[a] > sims[b] || (sims[a] == sims[b] && a < b); };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(depth), order.end(), closer);
}

// correct[i * ks + t] = 1 when test row i is classified right at k = 2t + 1.
std::vector<std::uint8_t> knn_hits(const EmbeddingMatrix& train, const LabelVector& train_labels,
                                   const EmbeddingMatrix& test, const LabelVector& test_labels,
                                   std::size_t k_max, std::size_t k_min) {
  const std::size_t ks = (k_max - k_min) / 2 + 1;
  const std::size_t n_test = test.n();
  const std::size_t classes = std::max(train_labels.num_classes(), test_labels.num_classes());
  std::vector<std::uint8_t> hits(n_test * ks, 0);
  const auto n = static_cast<std::ptrdiff_t>(n_test);
#pragma omp parallel
  {
    std::vector<double> sims;
    std::vector<std::size_t> order;
    std::vector<std::size_t> counts(classes);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
      const auto i = static_cast<std::size_t>(ii);
      rank_neighbours(train, test.row(i), k_max, sims, order);
      for (std::size_t t = 0; t < ks; ++t) {
        const std::size_t k = k_min + 2 * t;
        hits[i * ks + t] = detail::vote(order, train_labels, k, counts) == test_labels.labels[i];
      }
    }
  }
  return hits;
}

}  // namespace

double alignment(const PairSet& pairs, const EmbeddingMatrix& emb) {
  detail::check_pairs(pairs, emb);
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
  std::vector<double> partial(pairs.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < n; ++p) {
    const auto& [a, b] = pairs.pairs[static_cast<std::size_t>(p)];
    partial[static_cast<std::size_t>(p)] = squared_distance(emb.row(a), emb.row(b));
  }
  double sum = 0.0;
  for (double v : partial) sum += v;
  return sum / static_cast<double>(pairs.size());
}

double uniformity(const EmbeddingMatrix& emb, double t) {
  detail::check_uniformity(emb, t);
  const std::size_t n = emb.n();
  std::vector<double> partial(n, 0.0);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double s = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) s += std::exp(-t * squared_distance(emb.row(i), emb.row(j)));
    partial[i] = s;
  }
  double sum = 0.0;
  for (double v : partial) sum += v;
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return std::log(sum / pairs);
}

double intra_class_alignment(const EmbeddingMatrix& emb, const LabelVector& labels) {
  const auto members = detail::members_by_class(emb, labels);
  std::vector<double> class_mean(members.size(), 0.0);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t cc = 0; cc < static_cast<std::ptrdiff_t>(members.size()); ++cc) {
    const auto& m = members[static_cast<std::size_t>(cc)];
    double s = 0.0;
    for (std::size_t a = 0; a < m.size(); ++a) {
      double row = 0.0;
      for (std::size_t b = a + 1; b < m.size(); ++b) row += squared_distance(emb.row(m[a]), emb.row(m[b]));
      s += row;
    }
    const double pairs = static_cast<double>(m.size()) * static_cast<double>(m.size() - 1) / 2.0;
    class_mean[static_cast<std::size_t>(cc)] = s / pairs;
  }
  double sum = 0.0;
  for (double v : class_mean) sum += v;
  return sum / static_cast<double>(members.size());
}

double tolerance(double intra) {
  if (!(intra >= 0.0 && intra <= 4.0)) {
    throw Error(ErrorKind::invalid_argument, "tolerance: intra-class alignment must be in [0,4]");
  }
  return 1.0 - intra / 2.0;
}

double inst_disc_accuracy(const EmbeddingMatrix& anchors, const EmbeddingMatrix& queries) {
  detail::check_inst_disc(anchors, queries);
  const std::size_t n = anchors.n();
  std::vector<std::uint8_t> hit(n, 0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    std::size_t best = 0;
    double best_sim = dot(queries.row(i), anchors.row(0));
    for (std::size_t j = 1; j < n; ++j) {
      const double s = dot(queries.row(i), anchors.row(j));
      if (s > best_sim) {
        best_sim = s;
        best = j;
      }
    }
    hit[i] = best == i;
  }
  std::size_t correct = 0;
  for (auto h : hit) correct += h;
  return static_cast<double>(correct) / static_cast<double>(n);
}

double knn_accuracy(const EmbeddingMatrix& train, const LabelVector& train_labels, const EmbeddingMatrix& test,
                    const LabelVector& test_labels, std::size_t k) {
  detail::check_knn(train, train_labels, test, test_labels, k);
  const auto hits = knn_hits(train, train_labels, test, test_labels, k, k);
  std::size_t correct = 0;
  for (auto h : hits) correct += h;
  return static_cast<double>(correct) / static_cast<double>(test.n());
}

BestNn best_nn(const EmbeddingMatrix& train, const LabelVector& train_labels, const EmbeddingMatrix& test,
               const LabelVector& test_labels, std::size_t k_max) {
  detail::check_knn(train, train_labels, test, test_labels, k_max);
  const auto hits = knn_hits(train, train_labels, test, test_labels, k_max, 1);
  const std::size_t ks = (k_max - 1) / 2 + 1;
  std::vector<std::size_t> correct(ks, 0);
  for (std::size_t i = 0; i < test.n(); ++i)
    for (std::size_t t = 0; t < ks; ++t) correct[t] += hits[i * ks + t];
  BestNn best{-1.0, 1};
  for (std::size_t t = 0; t < ks; ++t) {
    const double acc = static_cast<double>(correct[t]) / static_cast<double>(test.n());
    if (acc > best.accuracy) best = {acc, 2 * t + 1};
  }
  return best;
}

}  // namespace repspace
