#include "repspace/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "repspace/error.hpp"

namespace repspace {

std::pair<std::vector<double>, Matrix> symmetric_eigen(Matrix a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw Error(ErrorKind::dimension_mismatch, "symmetric_eigen: matrix not square");
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  std::vector<double> values(n);
  Matrix vectors(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = a(order[i], order[i]);
    for (std::size_t k = 0; k < n; ++k) vectors(i, k) = v(k, order[i]);
  }
  return {values, vectors};
}

Pca2d pca_2d(const Matrix& rows) {
  const std::size_t n = rows.rows();
  const std::size_t d = rows.cols();
  if (n < 3) throw Error(ErrorKind::invalid_argument, "pca_2d: need n >= 3");
  if (d < 2) throw Error(ErrorKind::invalid_argument, "pca_2d: need d >= 2");
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) mean[j] += rows(i, j);
  for (double& m : mean) m /= static_cast<double>(n);
  Matrix centered(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) centered(i, j) = rows(i, j) - mean[j];
  Matrix cov = matmul_atb(centered, centered);
  for (double& x : cov.data()) x /= static_cast<double>(n);

  auto [values, vectors] = symmetric_eigen(cov);
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  if (!(total > 0.0) || values[1] <= 1e-12 * total) {
    throw Error(ErrorKind::invalid_argument, "pca_2d: centered data has rank < 2");
  }
  Pca2d out;
  out.components = Matrix(2, d);
  for (std::size_t c = 0; c < 2; ++c) {
    auto comp = vectors.row(c);
    std::size_t arg = 0;
    for (std::size_t j = 1; j < d; ++j) {
      if (std::abs(comp[j]) > std::abs(comp[arg])) arg = j;
    }
    const double sign = comp[arg] < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < d; ++j) out.components(c, j) = sign * comp[j];
    out.explained_variance_ratio[c] = std::max(values[c], 0.0) / total;
  }
  out.coords = matmul_abt(centered, out.components);
  return out;
}

}  // namespace repspace
