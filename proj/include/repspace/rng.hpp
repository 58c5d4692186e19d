#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace repspace {

/// splitmix64 finalizer. Used for every seed derivation in the project.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Child seed for stream `index` of `root`. Adding streams never changes
/// the seeds of existing ones.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept;

/// Child seed keyed by a purpose tag ("eval", "probe", ...).
std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) noexcept;

// Deterministic generator. Distributions are implemented here rather than
// with <random> distributions, whose algorithms differ between standard
// libraries, so the same seed yields the same bytes on every toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, one draw per call).
  double normal();
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace repspace
