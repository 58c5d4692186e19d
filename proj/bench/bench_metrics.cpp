#include <benchmark/benchmark.h>

#include "repspace/metrics.hpp"
#include "repspace/rng.hpp"

using namespace repspace;

namespace {

EmbeddingMatrix random_unit(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(n, d);
  for (double& x : m.data()) x = rng.normal();
  return EmbeddingMatrix::normalized(std::move(m));
}

LabelVector random_labels(std::size_t n, std::uint32_t classes, std::uint64_t seed) {
  Rng rng(seed);
  LabelVector l;
  for (std::size_t i = 0; i < n; ++i) l.labels.push_back(static_cast<std::uint32_t>(i < classes ? i : rng.below(classes)));
  return l;
}

constexpr std::size_t kDim = 64;

void BM_Uniformity(benchmark::State& state) {
  const auto emb = random_unit(state.range(0), kDim, 1);
  for (auto _ : state) benchmark::DoNotOptimize(uniformity(emb));
}

void BM_UniformitySerial(benchmark::State& state) {
  const auto emb = random_unit(state.range(0), kDim, 1);
  for (auto _ : state) benchmark::DoNotOptimize(serial::uniformity(emb));
}

void BM_IntraClass(benchmark::State& state) {
  const auto emb = random_unit(state.range(0), kDim, 2);
  const auto labels = random_labels(state.range(0), 10, 3);
  for (auto _ : state) benchmark::DoNotOptimize(intra_class_alignment(emb, labels));
}

void BM_IntraClassSerial(benchmark::State& state) {
  const auto emb = random_unit(state.range(0), kDim, 2);
  const auto labels = random_labels(state.range(0), 10, 3);
  for (auto _ : state) benchmark::DoNotOptimize(serial::intra_class_alignment(emb, labels));
}

void BM_InstDisc(benchmark::State& state) {
  const auto a = random_unit(state.range(0), kDim, 4);
  const auto q = random_unit(state.range(0), kDim, 5);
  for (auto _ : state) benchmark::DoNotOptimize(inst_disc_accuracy(a, q));
}

void BM_InstDiscSerial(benchmark::State& state) {
  const auto a = random_unit(state.range(0), kDim, 4);
  const auto q = random_unit(state.range(0), kDim, 5);
  for (auto _ : state) benchmark::DoNotOptimize(serial::inst_disc_accuracy(a, q));
}

void BM_BestNn(benchmark::State& state) {
  const auto train = random_unit(state.range(0), kDim, 6);
  const auto train_labels = random_labels(state.range(0), 10, 7);
  const auto test = random_unit(500, kDim, 8);
  const auto test_labels = random_labels(500, 10, 9);
  for (auto _ : state) benchmark::DoNotOptimize(best_nn(train, train_labels, test, test_labels));
}

void BM_BestNnSerial(benchmark::State& state) {
  const auto train = random_unit(state.range(0), kDim, 6);
  const auto train_labels = random_labels(state.range(0), 10, 7);
  const auto test = random_unit(500, kDim, 8);
  const auto test_labels = random_labels(500, 10, 9);
  for (auto _ : state) benchmark::DoNotOptimize(serial::best_nn(train, train_labels, test, test_labels));
}

}  // namespace

BENCHMARK(BM_Uniformity)->Arg(500)->Arg(2000);
BENCHMARK(BM_UniformitySerial)->Arg(500)->Arg(2000);
BENCHMARK(BM_IntraClass)->Arg(500)->Arg(2000);
BENCHMARK(BM_IntraClassSerial)->Arg(500)->Arg(2000);
BENCHMARK(BM_InstDisc)->Arg(500)->Arg(2000);
BENCHMARK(BM_InstDiscSerial)->Arg(500)->Arg(2000);
BENCHMARK(BM_BestNn)->Arg(1000)->Arg(4000);
BENCHMARK(BM_BestNnSerial)->Arg(1000)->Arg(4000);

BENCHMARK_MAIN();
