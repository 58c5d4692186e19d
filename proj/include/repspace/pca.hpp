#pragma once

#include <array>

#include "repspace/embeddings.hpp"

namespace repspace {

struct Pca2d {
  Matrix coords;      // (n, 2)
  Matrix components;  // (2, d), unit rows
  std::array<double, 2> explained_variance_ratio{};
};

/// Projection of the centered rows onto the top two principal components.
/// Each component's sign is chosen so its largest-magnitude loading is
/// positive. Throws if n < 3 or the centered data has rank < 2.
Pca2d pca_2d(const Matrix& rows);
inline Pca2d pca_2d(const EmbeddingMatrix& emb) { return pca_2d(emb.matrix()); }

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in descending order and eigenvectors as matching rows.
std::pair<std::vector<double>, Matrix> symmetric_eigen(Matrix a);

}  // namespace repspace
