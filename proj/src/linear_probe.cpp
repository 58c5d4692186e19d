#include "repspace/linear_probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "repspace/error.hpp"
#include "repspace/optim.hpp"
#include "repspace/rng.hpp"

namespace repspace {

namespace {

std::uint32_t predict(const Matrix& w, const std::vector<double>& b, std::span<const double> x) {
  std::uint32_t best = 0;
  double best_score = 0.0;
  for (std::size_t c = 0; c < w.rows(); ++c) {
    const double s = dot(w.row(c), x) + b[c];
    if (c == 0 || s > best_score) {
      best_score = s;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return best;
}

double accuracy(const Matrix& w, const std::vector<double>& b, const Matrix& x, const LabelVector& y) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) correct += predict(w, b, x.row(i)) == y.labels[i];
  return static_cast<double>(correct) / static_cast<double>(x.rows());
}

Matrix apply(const Matrix& x, const std::vector<double>& mean, const std::vector<double>& scale) {
  Matrix out = x;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = (row[j] - mean[j]) / scale[j];
  }
  return out;
}

}  // namespace

LinearProbeResult linear_probe_fit(const EmbeddingMatrix& train, const LabelVector& train_labels,
                                   const EmbeddingMatrix& test, const LabelVector& test_labels,
                                   const LinearProbeConfig& config) {
  if (train_labels.size() != train.n() || test_labels.size() != test.n()) {
    throw Error(ErrorKind::dimension_mismatch, "linear_probe: label count != embedding rows");
  }
  if (train.d() != test.d()) throw Error(ErrorKind::dimension_mismatch, "linear_probe: dimension mismatch");
  if (std::set<std::uint32_t>(train_labels.labels.begin(), train_labels.labels.end()).size() < 2) {
    throw Error(ErrorKind::invalid_argument, "linear_probe: training labels contain a single class");
  }
  if (config.batch == 0) throw Error(ErrorKind::invalid_argument, "linear_probe: batch must be > 0");
  if (!(config.lr >= 0.0)) throw Error(ErrorKind::invalid_argument, "linear_probe: lr must be >= 0");

  const std::size_t classes = std::max(train_labels.num_classes(), test_labels.num_classes());
  const std::size_t d = train.d();
  Rng rng(config.seed);
  LinearProbeResult r;
  r.weight = Matrix(classes, d);
  for (double& w : r.weight.data()) w = rng.uniform(-0.01, 0.01);
  r.bias.assign(classes, 0.0);
  r.mean.assign(d, 0.0);
  r.scale.assign(d, 1.0);
  if (config.standardize) {
    const double n = static_cast<double>(train.n());
    for (std::size_t i = 0; i < train.n(); ++i) {
      for (std::size_t j = 0; j < d; ++j) r.mean[j] += train.row(i)[j] / n;
    }
    std::vector<double> var(d, 0.0);
    for (std::size_t i = 0; i < train.n(); ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        const double c = train.row(i)[j] - r.mean[j];
        var[j] += c * c / n;
      }
    }
    for (std::size_t j = 0; j < d; ++j) r.scale[j] = var[j] > 1e-24 ? std::sqrt(var[j]) : 1.0;
  }
  const Matrix xtrain = apply(train.matrix(), r.mean, r.scale);
  const Matrix xtest = apply(test.matrix(), r.mean, r.scale);

  std::vector<std::size_t> order(train.n());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> logits(classes);
  Matrix grad_w(classes, d);
  std::vector<double> grad_b(classes);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = cosine_lr(epoch, config.epochs, config.lr);
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch) {
      const std::size_t end = std::min(order.size(), start + config.batch);
      std::fill(grad_w.data().begin(), grad_w.data().end(), 0.0);
      std::fill(grad_b.begin(), grad_b.end(), 0.0);
      for (std::size_t p = start; p < end; ++p) {
        const auto x = xtrain.row(order[p]);
        double max_logit = -INFINITY;
        for (std::size_t c = 0; c < classes; ++c) {
          logits[c] = dot(r.weight.row(c), x) + r.bias[c];
          max_logit = std::max(max_logit, logits[c]);
        }
        double z = 0.0;
        for (double& l : logits) {
          l = std::exp(l - max_logit);
          z += l;
        }
        const auto y = train_labels.labels[order[p]];
        for (std::size_t c = 0; c < classes; ++c) {
          const double g = logits[c] / z - (c == y ? 1.0 : 0.0);
          auto gw = grad_w.row(c);
          for (std::size_t j = 0; j < d; ++j) gw[j] += g * x[j];
          grad_b[c] += g;
        }
      }
      const double step = lr / static_cast<double>(end - start);
      auto w = r.weight.data();
      auto gw = grad_w.data();
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * gw[i];
      for (std::size_t c = 0; c < classes; ++c) r.bias[c] -= step * grad_b[c];
    }
  }
  r.train_accuracy = accuracy(r.weight, r.bias, xtrain, train_labels);
  r.test_accuracy = accuracy(r.weight, r.bias, xtest, test_labels);
  return r;
}

double linear_probe(const EmbeddingMatrix& train, const LabelVector& train_labels, const EmbeddingMatrix& test,
                    const LabelVector& test_labels, const LinearProbeConfig& config) {
  return linear_probe_fit(train, train_labels, test, test_labels, config).test_accuracy;
}

}  // namespace repspace
