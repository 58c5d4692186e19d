#include "repspace/queue.hpp"

#include <algorithm>
#include <cmath>

#include "repspace/embeddings.hpp"
#include "repspace/error.hpp"

namespace repspace {

NegativeQueue::NegativeQueue(std::size_t capacity, std::size_t dim) : buffer_(capacity, dim) {
  if (capacity == 0 || dim == 0) throw Error(ErrorKind::invalid_argument, "NegativeQueue: capacity and dim must be > 0");
}

void NegativeQueue::enqueue(const Matrix& keys) {
  if (keys.rows() > capacity()) {
    throw Error(ErrorKind::invalid_argument, "NegativeQueue: batch larger than capacity");
  }
  if (keys.cols() != dim()) throw Error(ErrorKind::dimension_mismatch, "NegativeQueue: key width mismatch");
  for (std::size_t r = 0; r < keys.rows(); ++r) {
    const double norm = std::sqrt(squared_norm(keys.row(r)));
    if (!(std::abs(norm - 1.0) <= kUnitNormTolerance)) {
      throw Error(ErrorKind::norm_violation, "NegativeQueue: key " + std::to_string(r) + " is not unit-norm");
    }
  }
  for (std::size_t r = 0; r < keys.rows(); ++r) {
    const std::size_t slot = (head_ + size_) % capacity();
    std::copy(keys.row(r).begin(), keys.row(r).end(), buffer_.row(slot).begin());
    if (size_ < capacity()) {
      ++size_;
    } else {
      head_ = (head_ + 1) % capacity();
    }
  }
}

std::span<const double> NegativeQueue::at(std::size_t i) const {
  if (i >= size_) throw Error(ErrorKind::invalid_argument, "NegativeQueue: index out of range");
  return buffer_.row((head_ + i) % capacity());
}

Matrix NegativeQueue::snapshot() const {
  Matrix out(size_, dim());
  for (std::size_t i = 0; i < size_; ++i) {
    auto src = at(i);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace repspace
