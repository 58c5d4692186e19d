#pragma once

#include "repspace/matrix.hpp"

namespace repspace {

/// Fixed-capacity FIFO of unit-norm key embeddings (the negative
/// dictionary). Once full, each enqueue evicts exactly as many of the
/// oldest keys as it inserts.
class NegativeQueue {
 public:
  NegativeQueue(std::size_t capacity, std::size_t dim);

  std::size_t capacity() const noexcept { return buffer_.rows(); }
  std::size_t dim() const noexcept { return buffer_.cols(); }
  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }
  bool full() const noexcept { return size_ == capacity(); }

  /// Appends the rows of `keys` (oldest first). Throws if the batch is larger
  /// than the capacity, has the wrong width, or any row is not unit-norm.
  void enqueue(const Matrix& keys);

  /// i-th oldest entry, i < size().
  std::span<const double> at(std::size_t i) const;

  /// Entries oldest first, shape (size, dim).
  Matrix snapshot() const;

 private:
  Matrix buffer_;
  std::size_t size_ = 0;
  std::size_t head_ = 0;  // slot of the oldest entry
};

}  // namespace repspace
