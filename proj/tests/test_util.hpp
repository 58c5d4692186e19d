#pragma once

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

#include "repspace/embeddings.hpp"
#include "repspace/rng.hpp"

namespace repspace::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = scale * rng.normal();
  return m;
}

inline EmbeddingMatrix random_unit(std::size_t n, std::size_t d, Rng& rng) {
  return EmbeddingMatrix::normalized(random_matrix(n, d, rng));
}

/// Labels in [0, classes) with every class present at least `min_per_class` times.
inline LabelVector random_labels(std::size_t n, std::uint32_t classes, Rng& rng, std::size_t min_per_class = 1) {
  LabelVector l;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t forced = static_cast<std::size_t>(classes) * min_per_class;
    l.labels.push_back(i < forced ? static_cast<std::uint32_t>(i % classes)
                                  : static_cast<std::uint32_t>(rng.below(classes)));
  }
  rng.shuffle(std::span<std::uint32_t>(l.labels));
  return l;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("repspace_" + tag + "_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Entries whose magnitude is below the floor are compared on an absolute scale,
// since central differences carry ~1e-11 of rounding noise at step 1e-5.
inline constexpr double kRelativeFloor = 1e-6;

inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), kRelativeFloor});
  return std::abs(a - b) / scale;
}

}  // namespace repspace::testing
