#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "repspace/matrix.hpp"

namespace repspace {

inline constexpr double kUnitNormTolerance = 1e-6;

/// n unit-norm rows of dimension d (n >= 1, d >= 2).
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  /// Validates shape, finiteness and |row| = 1 within 1e-6.
  explicit EmbeddingMatrix(Matrix rows);

  /// Normalizes each row first; throws on zero rows.
  static EmbeddingMatrix normalized(Matrix rows);

  std::size_t n() const noexcept { return m_.rows(); }
  std::size_t d() const noexcept { return m_.cols(); }
  std::span<const double> row(std::size_t i) const { return m_.row(i); }
  const Matrix& matrix() const noexcept { return m_; }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  Matrix m_;
};

/// Class index per row.
struct LabelVector {
  std::vector<std::uint32_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  /// max label + 1 (0 when empty).
  std::size_t num_classes() const noexcept;

  friend bool operator==(const LabelVector&, const LabelVector&) = default;
};

/// Ordered row-index pairs into one EmbeddingMatrix.
struct PairSet {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }
  /// Throws ErrorKind::invalid_argument if any index is >= n.
  void validate(std::size_t n) const;
};

// EMB1: "EMB1", u32 n, u32 d, n*d f64. All little-endian.
std::vector<char> encode_embeddings(const EmbeddingMatrix& m);
EmbeddingMatrix decode_embeddings(const std::vector<char>& bytes);
void write_embeddings(const EmbeddingMatrix& m, const std::string& path);
EmbeddingMatrix read_embeddings(const std::string& path);

// LBL1: "LBL1", u32 n, n u32 labels.
std::vector<char> encode_labels(const LabelVector& labels);
LabelVector decode_labels(const std::vector<char>& bytes);
void write_labels(const LabelVector& labels, const std::string& path);
LabelVector read_labels(const std::string& path);

// FEA1: same layout as EMB1 without the unit-norm requirement. Used for raw
// dataset features and eval-set inputs.
std::vector<char> encode_features(const Matrix& m);
Matrix decode_features(const std::vector<char>& bytes);
void write_features(const Matrix& m, const std::string& path);
Matrix read_features(const std::string& path);

// Convenience CSV (one row per line, shortest round-trip decimal). No
// bit-exactness guarantee beyond what the decimal form gives.
void write_matrix_csv(const Matrix& m, const std::string& path);
Matrix read_matrix_csv(const std::string& path);

/// Shortest decimal that parses back to exactly `x`.
std::string format_double(double x);

}  // namespace repspace
