// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "repspace/checkpoint.hpp"
#include "repspace/error.hpp"
#include "repspace/harness.hpp"
#include "repspace/linear_probe.hpp"
#include "repspace/losses.hpp"
#include "repspace/metrics.hpp"

using namespace repspace;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

constexpr double kFdStep = 1e-5;
constexpr double kFdTolerance = 1e-4;

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Matrix gaussian(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m(r, c);
  for (double& x : m.data()) x = rng.normal();
  return m;
}

Matrix unit_rows(std::size_t r, std::size_t c, Rng& rng) {
  Matrix m = gaussian(r, c, rng);
  l2_normalize_rows(m);
  return m;
}

NegativeQueue queue_of(std::size_t k, std::size_t d, Rng& rng) {
  NegativeQueue q(k, d);
  q.enqueue(unit_rows(k, d, rng));
  return q;
}

double fd_worst(const std::vector<double>& x, const std::vector<double>& g,
                const std::function<double(const std::vector<double>&)>& f) {
  return repspace::testing::vector_fd_error(x, g, f, kFdStep);
}

// Gradient of a batch loss w.r.t. the query rows, checked by perturbing the
// rows directly.
double batch_query_fd(const Matrix& queries, const Matrix& analytic, const std::function<double(const Matrix&)>& f) {
  std::vector<double> x(queries.data().begin(), queries.data().end());
  std::vector<double> g(analytic.data().begin(), analytic.data().end());
  return fd_worst(x, g, [&](const std::vector<double>& v) { return f(Matrix(queries.rows(), queries.cols(), v)); });
}

Outcome criterion1() {
  double worst_nce = 0, worst_simple = 0, worst_seed = 0, worst_model = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(1000 + seed);
    const double tau = rng.uniform(0.05, 0.5);
    const NegativeQueue q = queue_of(12, 6, rng);
    const Matrix queries = unit_rows(4, 6, rng), keys = unit_rows(4, 6, rng);

    // InfoNCE: similarity level and through the query vectors.
    std::vector<double> s(9);
    for (double& v : s) v = rng.uniform(-1, 1);
    const auto r = info_nce_from_similarities(s[0], std::span(s).subspan(1), tau);
    worst_nce = std::max(worst_nce, fd_worst(s, r.grad, [&](const std::vector<double>& x) {
                           return info_nce_from_similarities(x[0], std::span(x).subspan(1), tau).loss;
                         }));
    const BatchLoss b = info_nce_batch(queries, keys, q, tau);
    worst_nce = std::max(worst_nce, batch_query_fd(queries, b.query_grad, [&](const Matrix& m) {
                           return info_nce_batch(m, keys, q, tau).mean_loss;
                         }));

    // simple loss over similarities.
    const double lambda = rng.uniform(0.0, 1.0);
    const auto rs = simple_loss_from_similarities(s[0], std::span(s).subspan(1), lambda);
    worst_simple = std::max(worst_simple, fd_worst(s, rs.grad, [&](const std::vector<double>& x) {
                              return simple_loss_from_similarities(x[0], std::span(x).subspan(1), lambda).loss;
                            }));

    // SEED distillation: similarity level and through the student rows.
    std::vector<double> t(9);
    for (double& v : t) v = rng.uniform(-1, 1);
    const double ts = rng.uniform(0.05, 0.5), tt = rng.uniform(0.05, 0.5);
    const auto rd = seed_distill_from_similarities(s, t, ts, tt);
    worst_seed = std::max(worst_seed, fd_worst(s, rd.grad, [&](const std::vector<double>& x) {
                            return seed_distill_from_similarities(x, t, ts, tt).loss;
                          }));
    const BatchLoss bd = seed_distill_batch(queries, keys, q, ts, tt);
    worst_seed = std::max(worst_seed, batch_query_fd(queries, bd.query_grad, [&](const Matrix& m) {
                            return seed_distill_batch(m, keys, q, ts, tt).mean_loss;
                          }));

    // Encoder -> projector -> normalize -> InfoNCE, every parameter.
    ModelSpec spec;
    spec.encoder_hidden = {8};
    spec.representation_dim = 5;
    spec.projector_hidden = {10};
    spec.projector_out = 6;
    Model model = init_model(spec, 7, rng);
    const Matrix x = gaussian(4, 7, rng);
    Rng unused(0);
    ModelForward fwd = model_forward(model, x, true, unused);
    const BatchLoss loss = info_nce_batch(fwd.embedding, keys, q, tau);
    const auto analytic = repspace::testing::flatten(model_backward(fwd, loss.query_grad));
    worst_model = std::max(worst_model, repspace::testing::model_fd_error(model, analytic, [&](const Model& m) {
                             return info_nce_batch(model_embed_head(m, x), keys, q, tau).mean_loss;
                           }, kFdStep));
  }
  Outcome o;
  o.pass = worst_nce <= kFdTolerance && worst_simple <= kFdTolerance && worst_seed <= kFdTolerance &&
           worst_model <= kFdTolerance;
  o.detail = "max rel err infonce " + fmt("%.2e", worst_nce) + ", simple " + fmt("%.2e", worst_simple) + ", seed " +
             fmt("%.2e", worst_seed) + ", encoder+projector " + fmt("%.2e", worst_model);
  return o;
}

LabelVector labels_of(std::size_t n, std::uint32_t classes, std::size_t min_each, Rng& rng) {
  LabelVector l;
  for (std::size_t i = 0; i < n; ++i) {
    l.labels.push_back(i < classes * min_each ? static_cast<std::uint32_t>(i % classes)
                                              : static_cast<std::uint32_t>(rng.below(classes)));
  }
  rng.shuffle(std::span<std::uint32_t>(l.labels));
  return l;
}

EmbeddingMatrix clustered(const LabelVector& l, std::size_t d, double noise, Rng& rng, bool quantize) {
  Matrix centers = gaussian(l.num_classes(), d, rng);
  Matrix m(l.size(), d);
  for (std::size_t i = 0; i < l.size(); ++i) {
    for (std::size_t t = 0; t < d; ++t) {
      m(i, t) = centers(l.labels[i], t) + noise * rng.normal();
      if (quantize) m(i, t) = std::round(m(i, t));
    }
    if (squared_norm(m.row(i)) == 0.0) m(i, 0) = 1.0;
  }
  return EmbeddingMatrix::normalized(m);
}

Outcome criterion2() {
  Rng rng(2024);
  std::size_t mismatches = 0;
  double worst_mean = 0.0;
  for (int instance = 0; instance < 20; ++instance) {
    const std::size_t n = 50 + rng.below(451);
    const std::size_t d = 2 + rng.below(15);
    const auto classes = static_cast<std::uint32_t>(2 + rng.below(7));
    const bool quantize = instance % 4 == 3;  // exact similarity ties
    const auto labels = labels_of(n, classes, 2, rng);
    const auto emb = clustered(labels, d, 1.0, rng, quantize);
    Matrix views = emb.matrix();
    for (double& x : views.data()) x += 0.3 * rng.normal();
    const auto queries = EmbeddingMatrix::normalized(views);
    const std::size_t n_test = 20 + rng.below(81);
    Matrix test_rows(n_test, d);
    LabelVector test_labels;
    for (std::size_t i = 0; i < n_test; ++i) {
      const std::size_t src = rng.below(n);
      for (std::size_t t = 0; t < d; ++t) test_rows(i, t) = emb.row(src)[t] + 0.5 * rng.normal();
      if (quantize) {
        for (std::size_t t = 0; t < d; ++t) test_rows(i, t) = std::round(test_rows(i, t));
        if (squared_norm(test_rows.row(i)) == 0.0) test_rows(i, 0) = 1.0;
      }
      test_labels.labels.push_back(rng.bernoulli(0.8) ? labels.labels[src] : static_cast<std::uint32_t>(rng.below(classes)));
    }
    const auto test = EmbeddingMatrix::normalized(test_rows);
    PairSet pairs;
    for (std::size_t p = 0; p < n; ++p) pairs.pairs.emplace_back(rng.below(n), rng.below(n));
    const double t_unif = rng.uniform(0.5, 4.0);

    const double o_align = oracle::alignment(pairs, emb);
    const double o_unif = oracle::uniformity(emb, t_unif);
    const double o_intra = oracle::intra_class(emb, labels);
    for (double v : {alignment(pairs, emb), serial::alignment(pairs, emb)}) worst_mean = std::max(worst_mean, std::abs(v - o_align));
    for (double v : {uniformity(emb, t_unif), serial::uniformity(emb, t_unif)}) worst_mean = std::max(worst_mean, std::abs(v - o_unif));
    for (double v : {intra_class_alignment(emb, labels), serial::intra_class_alignment(emb, labels)}) {
      worst_mean = std::max(worst_mean, std::abs(v - o_intra));
    }

    const double o_disc = oracle::inst_disc(emb, queries);
    mismatches += inst_disc_accuracy(emb, queries) != o_disc;
    mismatches += serial::inst_disc_accuracy(emb, queries) != o_disc;

    const std::size_t k_max = std::min<std::size_t>(101, n % 2 == 0 ? n - 1 : n);
    const auto all = oracle::knn_all(emb, labels, test, test_labels, k_max);
    for (int probe = 0; probe < 3; ++probe) {
      const std::size_t k = 2 * rng.below((k_max + 1) / 2) + 1;
      mismatches += knn_accuracy(emb, labels, test, test_labels, k) != all[(k - 1) / 2];
      mismatches += serial::knn_accuracy(emb, labels, test, test_labels, k) != all[(k - 1) / 2];
    }
    const auto o_best = oracle::best_nn(emb, labels, test, test_labels, k_max);
    for (const BestNn& b : {best_nn(emb, labels, test, test_labels, k_max), serial::best_nn(emb, labels, test, test_labels, k_max)}) {
      mismatches += b.accuracy != o_best.accuracy || b.k != o_best.k;
    }
  }
  Outcome o;
  o.pass = mismatches == 0 && worst_mean <= 1e-12;
  o.detail = "argmax-metric mismatches " + std::to_string(mismatches) + ", max |mean - oracle| " + fmt("%.2e", worst_mean);
  return o;
}

Outcome criterion3() {
  Rng rng(33);
  double worst_dir = 0.0, worst_mass = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> negs(8);
    for (double& v : negs) v = rng.uniform(-1, 1);
    const double s_pos = rng.uniform(-1, 1);
    const auto big = info_nce_from_similarities(s_pos, negs, 100.0);
    const auto simple = simple_loss_from_similarities(s_pos, negs, 1.0 / 8.0);
    const double nb = std::sqrt(squared_norm(big.grad)), ns = std::sqrt(squared_norm(simple.grad));
    double gap = 0.0;
    for (std::size_t i = 0; i < big.grad.size(); ++i) gap += std::pow(big.grad[i] / nb - simple.grad[i] / ns, 2);
    worst_dir = std::max(worst_dir, std::sqrt(gap));

    // Distinct negatives with the positive below the hardest one.
    std::vector<double> hard(8);
    for (std::size_t i = 0; i < hard.size(); ++i) hard[i] = -0.9 + 0.2 * static_cast<double>(i) + rng.uniform(0, 0.05);
    rng.shuffle(std::span<double>(hard));
    const std::size_t arg = std::max_element(hard.begin(), hard.end()) - hard.begin();
    const double pos = hard[arg] - rng.uniform(0.01, 0.5);
    const auto small = info_nce_from_similarities(pos, hard, 0.001);
    double total = 0.0, off = 0.0;
    for (std::size_t i = 0; i < small.grad.size(); ++i) {
      total += std::abs(small.grad[i]);
      if (i != 0 && i != arg + 1) off += std::abs(small.grad[i]);
    }
    worst_mass = std::max(worst_mass, off / total);
  }
  Outcome o;
  o.pass = worst_dir <= 0.01 && worst_mass < 1e-6;
  o.detail = "tau=100 max unit-direction distance " + fmt("%.3e", worst_dir) + ", tau=0.001 max off-support mass " +
             fmt("%.3e", worst_mass);
  return o;
}

Outcome criterion4() {
  Rng rng(44);
  double worst_tol = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 6 + rng.below(60);
    const auto labels = labels_of(n, 3, 2, rng);
    const auto e = clustered(labels, 2 + rng.below(6), rng.uniform(0.1, 2.0), rng, false);
    const double intra = intra_class_alignment(e, labels);
    worst_tol = std::max(worst_tol, std::abs(tolerance(intra) - (1.0 - intra / 2.0)));
  }

  std::size_t queue_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t cap = 1 + rng.below(16);
    NegativeQueue q(cap, 3);
    std::deque<std::vector<double>> ref;
    bool ok = true;
    const std::size_t ops = 1 + rng.below(12);
    for (std::size_t op = 0; op < ops && ok; ++op) {
      const Matrix keys = unit_rows(1 + rng.below(cap), 3, rng);
      q.enqueue(keys);
      for (std::size_t r = 0; r < keys.rows(); ++r) ref.emplace_back(keys.row(r).begin(), keys.row(r).end());
      while (ref.size() > cap) ref.pop_front();
      ok = q.size() == ref.size() && q.size() <= cap;
    }
    for (std::size_t i = 0; ok && i < ref.size(); ++i) ok = std::equal(ref[i].begin(), ref[i].end(), q.at(i).begin());
    queue_failures += !ok;
  }

  double worst_contraction = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ModelSpec spec;
    const Model query = init_model(spec, 8, rng);
    Model key = init_model(spec, 8, rng);
    const double m = rng.uniform();
    auto dist = [&](Model& k) {
      Model qq = query;
      auto pk = repspace::testing::parameters(k), pq = repspace::testing::parameters(qq);
      double s = 0.0;
      for (std::size_t i = 0; i < pk.size(); ++i) s += (*pk[i] - *pq[i]) * (*pk[i] - *pq[i]);
      return std::sqrt(s);
    };
    const double before = dist(key);
    momentum_update(MomentumPair{&query, &key, m});
    worst_contraction = std::max(worst_contraction, std::abs(dist(key) - m * before) / before);
  }

  std::size_t dominance_failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 10 + rng.below(150);
    const auto tl = labels_of(n, 4, 1, rng);
    const auto train = clustered(tl, 5, rng.uniform(0.2, 2.0), rng, trial % 3 == 0);
    const auto sl = labels_of(30, 4, 1, rng);
    const auto test = clustered(sl, 5, 1.0, rng, false);
    const std::size_t k_max = std::min<std::size_t>(101, n % 2 == 0 ? n - 1 : n);
    const BestNn b = best_nn(train, tl, test, sl, k_max);
    for (std::size_t k = 1; k <= k_max; k += 2) dominance_failures += b.accuracy < knn_accuracy(train, tl, test, sl, k);
  }

  Outcome o;
  o.pass = worst_tol <= 1e-9 && queue_failures == 0 && worst_contraction <= 1e-12 && dominance_failures == 0;
  o.detail = "tolerance err " + fmt("%.1e", worst_tol) + ", queue failures " + std::to_string(queue_failures) +
             "/1000, contraction rel err " + fmt("%.1e", worst_contraction) + ", best-NN < kNN cases " +
             std::to_string(dominance_failures);
  return o;
}

struct PresetRuns {
  std::vector<MetricsReport> small, large, small_strong;
};

PresetRuns preset_runs(const Dataset& data) {
  PresetRuns out;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig s = small_encoder_preset(), l = large_encoder_preset(), sp = small_encoder_preset();
    s.seed = l.seed = sp.seed = seed;
    sp.train.aug = strong_aug();
    out.small.push_back(run_experiment(data, s, "small").eval.report);
    out.large.push_back(run_experiment(data, l, "large").eval.report);
    out.small_strong.push_back(run_experiment(data, sp, "small aug+").eval.report);
  }
  return out;
}

Outcome criterion5(const PresetRuns& runs) {
  int hits = 0;
  std::string per_seed;
  for (std::size_t i = 0; i < runs.small.size(); ++i) {
    const auto& s = runs.small[i];
    const auto& l = runs.large[i];
    const bool ok = std::abs(s.inst_disc_top1 - l.inst_disc_top1) <= 0.05 &&
                    s.intra_class_alignment > l.intra_class_alignment && s.linear_probe_top1 < l.linear_probe_top1;
    hits += ok;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s[id %.3f/%.3f intra %.3f/%.3f probe %.3f/%.3f]", per_seed.empty() ? "" : " ",
                  s.inst_disc_top1, l.inst_disc_top1, s.intra_class_alignment, l.intra_class_alignment,
                  s.linear_probe_top1, l.linear_probe_top1);
    per_seed += buf;
  }
  return {hits >= 4, std::to_string(hits) + "/5 seeds (small/large) " + per_seed};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

Outcome criterion6(const PresetRuns& runs) {
  std::vector<double> base, strong;
  for (std::size_t i = 0; i < runs.small.size(); ++i) {
    base.push_back(runs.small[i].linear_probe_top1);
    strong.push_back(runs.small_strong[i].linear_probe_top1);
  }
  const double gap = median(strong) - median(base);
  char buf[128];
  std::snprintf(buf, sizeof buf, "median probe aug+ %.3f vs baseline %.3f (gap %.1f points)", median(strong), median(base),
                100.0 * gap);
  return {gap > 0.05, buf};
}

Outcome criterion7(const Dataset& data, const fs::path& scratch) {
  int hits = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig l = large_encoder_preset();
    l.seed = seed;
    const Model teacher = train(data, l.train, seed).model;
    double nn[2];
    int idx = 0;
    for (std::size_t epochs : {std::size_t{2}, std::size_t{10}}) {
      RunConfig s = small_encoder_preset();
      s.seed = seed;
      s.distill.epochs = epochs;
      const DistillResult d = distill_init(data, teacher, s.distill_config(), seed);
      const std::string path = (scratch / ("student_" + std::to_string(seed) + "_" + std::to_string(epochs) + ".rlns")).string();
      save_model(path, d.student);
      s.train.init_checkpoint = path;
      nn[idx++] = run_experiment(data, s, "post-ssl").eval.report.best_nn_top1;
    }
    hits += nn[1] >= nn[0];
    per_seed += fmt(" [%.3f", nn[0]) + fmt(" -> %.3f]", nn[1]);
  }
  return {hits >= 4, std::to_string(hits) + "/5 seeds with best-NN(10) >= best-NN(2):" + per_seed};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion8(const fs::path& scratch) {
  fs::create_directories(scratch);
  RunConfig c;
  c.deterministic = true;
  c.train.epochs = 5;
  c.eval.probe.epochs = 30;
  std::vector<std::string> diffs;
  std::string ckpt[2];
  for (int run = 0; run < 2; ++run) {
    RunConfig r = c;
    r.out_dir = (scratch / ("train" + std::to_string(run))).string();
    if (cmd_train(r) != kExitOk) return {false, "train failed"};
    ckpt[run] = (fs::path(r.out_dir) / "checkpoint.rlns").string();
    RunConfig e = c;
    e.out_dir = (scratch / ("eval" + std::to_string(run))).string();
    std::fflush(stdout);
    if (cmd_evaluate(e, ckpt[run], (fs::path(r.out_dir) / "dataset" / "manifest.txt").string()) != kExitOk) {
      return {false, "evaluate failed"};
    }
  }
  if (slurp(ckpt[0]) != slurp(ckpt[1])) diffs.push_back("checkpoint");
  if (slurp(scratch / "train0" / "stats.csv") != slurp(scratch / "train1" / "stats.csv")) diffs.push_back("stats.csv");
  if (slurp(scratch / "eval0" / "metrics.csv") != slurp(scratch / "eval1" / "metrics.csv")) diffs.push_back("metrics.csv");

  {
    std::ofstream grid(scratch / "grid.cfg");
    grid << "train.temperature = 0.05, 0.2\naug.preset = baseline, aug+\n";
  }
  RunConfig base = c;
  base.train.epochs = 3;
  for (int run = 0; run < 2; ++run) {
    const int code = cmd_sweep((scratch / "grid.cfg").string(), &base, 17, 2, (scratch / ("sweep" + std::to_string(run))).string());
    if (code != kExitOk) return {false, "sweep exit " + std::to_string(code)};
  }
  if (slurp(scratch / "sweep0" / "sweep.csv") != slurp(scratch / "sweep1" / "sweep.csv")) diffs.push_back("sweep.csv");
  if (slurp(scratch / "sweep0" / "sweep.md") != slurp(scratch / "sweep1" / "sweep.md")) diffs.push_back("sweep.md");
  std::string d;
  for (const auto& x : diffs) d += " " + x;
  return {diffs.empty(), diffs.empty() ? "checkpoint, stats, metrics and sweep outputs byte-identical across two runs"
                                       : "differences in:" + d};
}

Outcome criterion9() {
  Rng rng(99);
  Matrix tr(1000, 16), te(1000, 16);
  LabelVector tl, sl;
  for (std::size_t i = 0; i < 1000; ++i) {
    for (Matrix* m : {&tr, &te}) {
      for (std::size_t t = 0; t < 16; ++t) (*m)(i, t) = 0.3 * rng.normal();
      (*m)(i, 0) += i % 2 == 0 ? 1.5 : -1.5;
    }
    tl.labels.push_back(static_cast<std::uint32_t>(i % 2));
    sl.labels.push_back(static_cast<std::uint32_t>(i % 2));
  }
  const double separable = linear_probe(EmbeddingMatrix::normalized(tr), tl, EmbeddingMatrix::normalized(te), sl,
                                        LinearProbeConfig{});

  const auto ptl = labels_of(2000, 10, 1, rng);
  const auto psl = labels_of(2000, 10, 1, rng);
  Rng crng(5);
  const Matrix centers = gaussian(10, 16, crng);
  auto cloud = [&](const LabelVector& l) {
    Matrix m(l.size(), 16);
    for (std::size_t i = 0; i < l.size(); ++i)
      for (std::size_t t = 0; t < 16; ++t) m(i, t) = centers(l.labels[i], t) + 0.5 * rng.normal();
    return EmbeddingMatrix::normalized(m);
  };
  const auto train = cloud(ptl), test = cloud(psl);
  LabelVector shuffled_train = ptl, shuffled_test = psl;
  rng.shuffle(std::span<std::uint32_t>(shuffled_train.labels));
  rng.shuffle(std::span<std::uint32_t>(shuffled_test.labels));
  const double permuted = linear_probe(train, shuffled_train, test, shuffled_test, LinearProbeConfig{});
  return {separable >= 0.99 && std::abs(permuted - 0.1) <= 0.05,
          fmt("separable %.4f", separable) + fmt(", permuted labels %.4f (chance 0.1)", permuted)};
}

template <typename F>
bool rejects(F&& f, ErrorKind kind) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

Outcome criterion10(const fs::path& scratch) {
  Rng rng(10);
  std::vector<std::string> failed;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };

  const auto emb = EmbeddingMatrix(unit_rows(25, 7, rng));
  write_embeddings(emb, (scratch / "e.emb").string());
  const auto emb_back = read_embeddings((scratch / "e.emb").string());
  check(emb_back == emb && encode_embeddings(emb_back) == encode_embeddings(emb), "EMB1 round trip");
  auto bytes = encode_embeddings(emb);
  auto bad = bytes;
  bad[0] = 'Q';
  check(rejects([&] { decode_embeddings(bad); }, ErrorKind::bad_magic), "EMB1 magic");
  bad = bytes;
  bad.resize(bad.size() - 1);
  check(rejects([&] { decode_embeddings(bad); }, ErrorKind::truncated), "EMB1 truncation");
  bad = bytes;
  const double half = 0.5;
  std::memcpy(bad.data() + 12, &half, 8);
  for (std::size_t t = 1; t < 7; ++t) std::memset(bad.data() + 12 + 8 * t, 0, 8);
  check(rejects([&] { decode_embeddings(bad); }, ErrorKind::norm_violation), "EMB1 norm violation");
  const double nan = std::nan("");
  std::memcpy(bad.data() + 12, &nan, 8);
  check(rejects([&] { decode_embeddings(bad); }, ErrorKind::non_finite), "EMB1 non-finite");

  LabelVector labels;
  for (int i = 0; i < 40; ++i) labels.labels.push_back(static_cast<std::uint32_t>(rng.below(1u << 31)));
  write_labels(labels, (scratch / "l.lbl").string());
  check(read_labels((scratch / "l.lbl").string()) == labels, "LBL1 round trip");
  auto lb = encode_labels(labels);
  lb[2] = 'X';
  check(rejects([&] { decode_labels(lb); }, ErrorKind::bad_magic), "LBL1 magic");
  lb = encode_labels(labels);
  lb.resize(lb.size() - 2);
  check(rejects([&] { decode_labels(lb); }, ErrorKind::truncated), "LBL1 truncation");

  ModelSpec spec;
  spec.encoder_dropout = 0.25;
  const Model model = init_model(spec, 32, rng);
  save_model((scratch / "m.rlns").string(), model);
  const Model model_back = load_model((scratch / "m.rlns").string());
  const auto mb = encode_model(model);
  check(model_back == model && slurp(scratch / "m.rlns") == std::string(mb.begin(), mb.end()), "RLNS round trip");
  auto mbad = mb;
  mbad[1] = 'X';
  check(rejects([&] { decode_model(mbad); }, ErrorKind::bad_magic), "RLNS magic");
  mbad = mb;
  mbad[4] = 2;
  check(rejects([&] { decode_model(mbad); }, ErrorKind::bad_version), "RLNS version");
  mbad = mb;
  mbad.resize(mb.size() / 3);
  check(rejects([&] { decode_model(mbad); }, ErrorKind::truncated), "RLNS truncation");

  RunConfig c = large_encoder_preset();
  c.seed = rng.next();
  c.train.temperature = 0.07;
  c.data.within_class_sigma = 0.1 + 0.2;
  c.distill.teacher = "teacher.rlns";
  c.to_kv().save((scratch / "c.cfg").string());
  check(RunConfig::load((scratch / "c.cfg").string()) == c && RunConfig::parse(c.render()).render() == c.render(),
        "config round trip");
  check(rejects([] { RunConfig::parse("train.temprature = 0.1\n"); }, ErrorKind::validation), "config unknown key");
  check(rejects([] { RunConfig::parse("train.epochs = -3\n"); }, ErrorKind::validation), "config bad value");
  check(rejects([] { RunConfig::parse("just text\n"); }, ErrorKind::validation), "config malformed line");

  std::string d;
  for (const auto& f : failed) d += " " + f;
  return {failed.empty(), failed.empty() ? "EMB1, LBL1, RLNS and config round trips bit-exact; 13 malformed inputs rejected"
                                         : "failed:" + d};
}

}  // namespace

int main() {
  const fs::path scratch = fs::temp_directory_path() / ("repspace_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  int failures = 0;
  auto report = [&](int id, const char* title, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("%s criterion %d: %s (%s; %.1fs)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "gradient correctness", criterion1);
  report(2, "metric oracle equivalence", criterion2);
  report(3, "temperature limits", criterion3);
  report(4, "structural invariants", criterion4);
  const Dataset data = generate(DatasetSpec{});
  PresetRuns runs;
  bool have_runs = false;
  auto ensure_runs = [&]() {
    if (!have_runs) {
      runs = preset_runs(data);
      have_runs = true;
    }
    return runs;
  };
  report(5, "over-clustering of the small encoder", [&] { return criterion5(ensure_runs()); });
  report(6, "augmentation strength", [&] { return criterion6(ensure_runs()); });
  report(7, "distilled-init ordering", [&] { return criterion7(data, scratch); });
  report(8, "reproducibility", [&] {
    std::ostringstream sink;
    auto* saved = std::cout.rdbuf(sink.rdbuf());
    Outcome o;
    try {
      o = criterion8(scratch / "c8");
    } catch (...) {
      std::cout.rdbuf(saved);
      throw;
    }
    std::cout.rdbuf(saved);
    return o;
  });
  report(9, "linear probe sanity", criterion9);
  report(10, "file formats", [&] { return criterion10(scratch); });

  fs::remove_all(scratch);
  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
