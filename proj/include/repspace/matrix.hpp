#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace repspace {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> v);
double squared_distance(std::span<const double> a, std::span<const double> b);

/// Returns v / ||v||. Throws ErrorKind::zero_norm for the zero vector.
std::vector<double> l2_normalize(std::span<const double> v);

/// Normalizes every row in place; throws on any zero row.
void l2_normalize_rows(Matrix& m);

// Serial products; fixed summation order so results are bit-stable.
Matrix matmul(const Matrix& a, const Matrix& b);      // A * B
Matrix matmul_abt(const Matrix& a, const Matrix& b);  // A * B^T
Matrix matmul_atb(const Matrix& a, const Matrix& b);  // A^T * B

Matrix transpose(const Matrix& m);

/// Stacks rows of `top` above rows of `bottom`.
Matrix vstack(const Matrix& top, const Matrix& bottom);

}  // namespace repspace
