#include "repspace/harness.hpp"

#include <omp.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "repspace/checkpoint.hpp"
#include "repspace/error.hpp"
#include "repspace/metrics.hpp"

namespace repspace {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << text;
}

int report_error(const std::exception& e) {
  std::cerr << "error: " << e.what() << '\n';
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return err->kind() == ErrorKind::validation ? kExitValidation : kExitRuntime;
  }
  return kExitRuntime;
}

// Pins OpenMP to one thread for the scope when deterministic execution is
// requested.
class ThreadScope {
 public:
  explicit ThreadScope(bool single) : saved_(omp_get_max_threads()) {
    if (single) omp_set_num_threads(1);
  }
  ~ThreadScope() { omp_set_num_threads(saved_); }
  ThreadScope(const ThreadScope&) = delete;
  ThreadScope& operator=(const ThreadScope&) = delete;

 private:
  int saved_;
};

KeyValues manifest_for(const RunConfig& config, const std::string& command) {
  KeyValues kv = config.to_kv();
  kv.set("manifest.command", command);
  return kv;
}

}  // namespace

Evaluation evaluate_model(const Model& model, const Dataset& data, const RunConfig& config,
                          const std::string& run_key) {
  const EvalSettings& es = config.eval;
  const EvalSet set = build_eval_set(data, es.split, aug_preset(es.aug_preset), derive_seed(data.spec().seed, "evalset"),
                                     es.samples_per_class);
  const EvalEmbeddings emb = embed_eval_set(model, set, EmbedHead::backbone);

  const std::size_t n = set.size();
  PairSet positives;
  for (std::size_t i = 0; i < n; ++i) positives.pairs.emplace_back(i, n + i);
  const EmbeddingMatrix views(vstack(emb.view1.matrix(), emb.view2.matrix()));

  const EmbeddingMatrix db(model_embed_backbone(model, data.features(Split::train)));
  const LabelVector db_labels{data.labels(Split::train)};

  Evaluation out;
  MetricsReport& r = out.report;
  r.run = run_key;
  r.alignment = alignment(positives, views);
  r.uniformity = uniformity(emb.anchors, es.uniformity_t);
  r.intra_class_alignment = intra_class_alignment(emb.anchors, emb.labels);
  r.tolerance = tolerance(r.intra_class_alignment);
  r.inst_disc_top1 = inst_disc_accuracy(emb.view1, emb.view2);
  const BestNn nn = best_nn(db, db_labels, emb.anchors, emb.labels, es.k_max);
  r.best_nn_top1 = nn.accuracy;
  r.best_nn_k = nn.k;
  r.linear_probe_top1 = linear_probe(db, db_labels, emb.anchors, emb.labels, es.probe);
  r.validate(es.k_max);
  try {
    out.pca = pca_2d(emb.anchors);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::invalid_argument) throw;
    out.pca.coords = Matrix(n, 2);
    out.pca.components = Matrix(2, emb.anchors.d());
  }
  return out;
}

RunOutcome run_experiment(const Dataset& data, const RunConfig& config, const std::string& run_key) {
  config.validate();
  ThreadScope threads(config.deterministic);
  RunOutcome out;
  out.train = train(data, config.train, config.seed);
  out.eval = evaluate_model(out.train.model, data, config, run_key);
  return out;
}

void write_dataset(const Dataset& data, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path root(dir);
  write_features(data.features(Split::train), (root / "train.fea").string());
  write_labels(LabelVector{data.labels(Split::train)}, (root / "train.lbl").string());
  write_features(data.features(Split::validation), (root / "validation.fea").string());
  write_labels(LabelVector{data.labels(Split::validation)}, (root / "validation.lbl").string());
  RunConfig spec_holder;
  spec_holder.data = data.spec();
  const KeyValues all = spec_holder.to_kv();
  KeyValues kv;
  for (const auto& [k, v] : all.entries()) {
    if (k.rfind("data.", 0) == 0) kv.set(k, v);
  }
  kv.set("dataset.checksum", dataset_checksum(data));
  kv.set("dataset.train_features", "train.fea");
  kv.set("dataset.train_labels", "train.lbl");
  kv.set("dataset.validation_features", "validation.fea");
  kv.set("dataset.validation_labels", "validation.lbl");
  kv.save((root / "manifest.txt").string());
}

Dataset load_dataset(const std::string& manifest_path) {
  const KeyValues kv = KeyValues::load(manifest_path);
  RunConfig holder;
  for (const auto& [k, v] : kv.entries()) {
    if (k.rfind("data.", 0) == 0) holder.set(k, v);
  }
  Dataset data = generate(holder.data);
  if (kv.contains("dataset.checksum") && kv.get("dataset.checksum") != dataset_checksum(data)) {
    throw Error(ErrorKind::validation, manifest_path + ": regenerated dataset does not match recorded checksum");
  }
  return data;
}

std::string stats_csv(const std::vector<EpochStats>& stats) {
  std::string out = "epoch,loss,batch_inst_disc,lr\n";
  for (const auto& s : stats) {
    out += std::to_string(s.epoch) + "," + format_double(s.loss) + "," + format_double(s.batch_inst_disc) + "," +
           format_double(s.lr) + "\n";
  }
  return out;
}

OverclusterVerdict overcluster_verdict(const MetricsReport& small, const MetricsReport& large,
                                       const ReportSettings& settings) {
  OverclusterVerdict v;
  v.alignment_delta = small.alignment - large.alignment;
  v.intra_delta = small.intra_class_alignment - large.intra_class_alignment;
  v.over_clustered = std::abs(v.alignment_delta) <= settings.alignment_band && v.intra_delta > settings.intra_margin;
  v.text = v.over_clustered ? "over-clustered" : "no over-clustering gap";
  return v;
}

RunConfig small_encoder_preset() {
  RunConfig c;
  c.train.aug = baseline_aug();
  c.train.epochs = 100;
  c.train.model.encoder_hidden = {12};
  c.train.model.use_projector = false;
  return c;
}

RunConfig large_encoder_preset() {
  RunConfig c = small_encoder_preset();
  c.train.model.encoder_hidden = {512};
  return c;
}

SweepGrid SweepGrid::parse(const std::string& text, const std::string& base_dir) {
  const KeyValues kv = KeyValues::parse(text, "grid");
  SweepGrid g;
  RunConfig probe;
  for (const auto& [k, v] : kv.entries()) {
    if (k == "grid.base") {
      g.base_config = fs::path(v).is_absolute() || base_dir.empty() ? v : (fs::path(base_dir) / v).string();
    } else if (k == "grid.cap") {
      g.cap = std::stoull(v);
    } else {
      auto values = split_list(v);
      if (values.empty()) throw Error(ErrorKind::validation, "grid axis '" + k + "' has no values");
      for (const auto& value : values) {
        RunConfig scratch = probe;
        scratch.set(k, value);
      }
      g.axes.emplace_back(k, std::move(values));
    }
  }
  return g;
}

SweepGrid SweepGrid::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), fs::path(path).parent_path().string());
}

std::size_t SweepGrid::size() const {
  std::size_t n = 1;
  for (const auto& [k, values] : axes) {
    if (n > (std::size_t{1} << 40) / values.size()) return std::size_t{1} << 40;
    n *= values.size();
  }
  return n;
}

std::vector<std::pair<std::string, std::string>> SweepGrid::point(std::size_t index) const {
  std::vector<std::pair<std::string, std::string>> out(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    const auto& [key, values] = axes[a];
    out[a] = {key, values[index % values.size()]};
    index /= values.size();
  }
  return out;
}

std::vector<SweepRow> run_sweep(const SweepGrid& grid, const RunConfig& base, std::uint64_t root_seed,
                                std::size_t workers, const std::string& out_dir) {
  const std::size_t total = grid.size();
  if (total > grid.cap) {
    throw Error(ErrorKind::validation, "sweep grid has " + std::to_string(total) + " points, cap is " +
                                           std::to_string(grid.cap));
  }
  const Dataset data = generate(base.data);
  std::vector<SweepRow> rows(total);
  std::atomic<std::size_t> next{0};
  workers = std::max<std::size_t>(1, std::min(workers, total));

  auto work = [&]() {
    // Workers share the machine; keep OpenMP regions single-threaded.
    if (workers > 1) omp_set_num_threads(1);
    for (std::size_t i = next++; i < total; i = next++) {
      SweepRow& row = rows[i];
      row.point = i;
      row.seed = derive_seed(root_seed, i);
      std::string key;
      try {
        RunConfig cfg = base;
        for (const auto& [k, v] : grid.point(i)) {
          cfg.set(k, v);
          key += (key.empty() ? "" : ";") + k + "=" + v;
        }
        cfg.seed = row.seed;
        char dir[32];
        std::snprintf(dir, sizeof dir, "point_%03zu", i);
        cfg.out_dir = (fs::path(out_dir) / dir).string();
        cfg.validate();
        if (key.empty()) key = "base";
        RunOutcome outcome = run_experiment(data, cfg, key);
        fs::create_directories(cfg.out_dir);
        save_model((fs::path(cfg.out_dir) / "checkpoint.rlns").string(), outcome.train.model);
        write_text(fs::path(cfg.out_dir) / "stats.csv", stats_csv(outcome.train.stats));
        write_text(fs::path(cfg.out_dir) / "metrics.csv", metrics_csv({outcome.eval.report}));
        manifest_for(cfg, "sweep-point").save((fs::path(cfg.out_dir) / "manifest.txt").string());
        row.report = outcome.eval.report;
        row.ok = true;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
        row.report.run = key;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return rows;
}

namespace {

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '|') c = ';';
  }
  return s;
}

}  // namespace

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string("point,seed,status,") + kMetricsCsvHeader + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.point) + "," + std::to_string(r.seed) + ",";
    if (r.ok) {
      out += "ok," + metrics_csv_row(r.report) + "\n";
    } else {
      out += "failed: " + sanitize(r.error) + "," + sanitize(r.report.run) + ",,,,,,,,\n";
    }
  }
  return out;
}

std::string sweep_markdown(const std::vector<SweepRow>& rows) {
  std::vector<MetricsReport> ok;
  std::string failed;
  for (const auto& r : rows) {
    if (r.ok) ok.push_back(r.report);
    else failed += "- point " + std::to_string(r.point) + " (" + r.report.run + "): " + sanitize(r.error) + "\n";
  }
  std::string out = metrics_markdown(ok);
  if (!failed.empty()) out += "\nFailed points:\n" + failed;
  return out;
}

int cmd_train(const RunConfig& config) {
  try {
    config.validate();
    ThreadScope threads(config.deterministic);
    const fs::path out(config.out_dir);
    fs::create_directories(out);
    const Dataset data = generate(config.data);
    write_dataset(data, (out / "dataset").string());
    const TrainResult result = train(data, config.train, config.seed);
    save_model((out / "checkpoint.rlns").string(), result.model);
    write_text(out / "stats.csv", stats_csv(result.stats));
    KeyValues manifest = manifest_for(config, "train");
    manifest.set("manifest.checkpoint", "checkpoint.rlns");
    manifest.set("manifest.checkpoint_checksum", file_checksum((out / "checkpoint.rlns").string()));
    manifest.set("manifest.stats", "stats.csv");
    manifest.set("manifest.dataset", "dataset/manifest.txt");
    manifest.save((out / "manifest.txt").string());
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(e);
  }
}

int cmd_evaluate(const RunConfig& config, const std::string& checkpoint, const std::string& dataset_manifest) {
  try {
    config.validate();
    ThreadScope threads(config.deterministic);
    const fs::path out(config.out_dir);
    fs::create_directories(out);
    const Model model = load_model(checkpoint);
    const Dataset data = dataset_manifest.empty() ? generate(config.data) : load_dataset(dataset_manifest);
    if (model.input_width() != data.spec().ambient_dim) {
      throw Error(ErrorKind::dimension_mismatch, "checkpoint input width " + std::to_string(model.input_width()) +
                                                     " != dataset dimension " +
                                                     std::to_string(data.spec().ambient_dim));
    }
    RunConfig resolved = config;
    resolved.data = data.spec();
    const Evaluation ev = evaluate_model(model, data, resolved, fs::path(checkpoint).stem().string());
    write_text(out / "metrics.csv", metrics_csv({ev.report}));
    write_text(out / "metrics.txt", metrics_table({ev.report}));
    write_matrix_csv(ev.pca.coords, (out / "pca.csv").string());
    KeyValues manifest = manifest_for(resolved, "evaluate");
    manifest.set("manifest.checkpoint", checkpoint);
    manifest.set("manifest.checkpoint_checksum", file_checksum(checkpoint));
    manifest.set("manifest.metrics", "metrics.csv");
    manifest.set("manifest.pca", "pca.csv");
    manifest.save((out / "manifest.txt").string());
    std::cout << metrics_table({ev.report});
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(e);
  }
}

int cmd_sweep(const std::string& grid_path, const RunConfig* base_override, std::uint64_t root_seed,
              std::size_t workers, const std::string& out_dir) {
  try {
    const SweepGrid grid = SweepGrid::load(grid_path);
    RunConfig base;
    if (base_override) base = *base_override;
    else if (!grid.base_config.empty()) base = RunConfig::load(grid.base_config);
    base.validate();
    if (grid.size() > grid.cap) {
      throw Error(ErrorKind::validation, "sweep grid has " + std::to_string(grid.size()) + " points, cap is " +
                                             std::to_string(grid.cap));
    }
    fs::create_directories(out_dir);
    const auto rows = run_sweep(grid, base, root_seed, workers, out_dir);
    write_text(fs::path(out_dir) / "sweep.csv", sweep_csv(rows));
    write_text(fs::path(out_dir) / "sweep.md", sweep_markdown(rows));
    KeyValues manifest = manifest_for(base, "sweep");
    manifest.set("manifest.grid", grid_path);
    manifest.set("manifest.root_seed", std::to_string(root_seed));
    manifest.set("manifest.points", std::to_string(rows.size()));
    manifest.save((fs::path(out_dir) / "manifest.txt").string());
    std::cout << sweep_markdown(rows);
    for (const auto& r : rows) {
      if (!r.ok) return kExitSweepPartial;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(e);
  }
}

int cmd_distill_init(const RunConfig& config) {
  try {
    config.validate();
    if (config.distill.teacher.empty()) throw Error(ErrorKind::validation, "distill.teacher must name a checkpoint");
    ThreadScope threads(config.deterministic);
    const fs::path out(config.out_dir);
    fs::create_directories(out);
    const Model teacher = load_model(config.distill.teacher);
    const Dataset data = generate(config.data);
    const DistillResult result = distill_init(data, teacher, config.distill_config(), config.seed);
    save_model((out / "student.rlns").string(), result.student);
    write_text(out / "distill_stats.csv", stats_csv(result.stats));
    KeyValues manifest = manifest_for(config, "distill-init");
    manifest.set("manifest.teacher", config.distill.teacher);
    manifest.set("manifest.teacher_checksum", file_checksum(config.distill.teacher));
    manifest.set("manifest.epochs", std::to_string(config.distill.epochs));
    manifest.set("manifest.student", "student.rlns");
    manifest.set("manifest.student_checksum", file_checksum((out / "student.rlns").string()));
    manifest.save((out / "manifest.txt").string());
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(e);
  }
}

int cmd_overcluster_report(const RunConfig& small, const RunConfig& large, const std::string& out_dir) {
  try {
    small.validate();
    large.validate();
    if (!(small.data == large.data)) {
      throw Error(ErrorKind::validation, "overcluster-report: both configs must describe the same dataset");
    }
    const fs::path out(out_dir);
    fs::create_directories(out);
    const Dataset data = generate(small.data);
    const RunOutcome s = run_experiment(data, small, "small");
    const RunOutcome l = run_experiment(data, large, "large");
    const OverclusterVerdict v = overcluster_verdict(s.eval.report, l.eval.report, small.report);
    save_model((out / "small.rlns").string(), s.train.model);
    save_model((out / "large.rlns").string(), l.train.model);
    write_text(out / "overcluster.csv", metrics_csv({s.eval.report, l.eval.report}));
    std::string md = metrics_markdown({s.eval.report, l.eval.report});
    md += "\nalignment delta (small - large): " + format_double(v.alignment_delta) + "\n";
    md += "intra-class alignment delta (small - large): " + format_double(v.intra_delta) + "\n";
    md += "verdict: " + v.text + "\n";
    write_text(out / "overcluster.md", md);
    KeyValues manifest = manifest_for(small, "overcluster-report");
    const KeyValues large_kv = large.to_kv();
    for (const auto& [k, val] : large_kv.entries()) manifest.set("large." + k, val);
    manifest.set("manifest.verdict", v.text);
    manifest.save((out / "manifest.txt").string());
    std::cout << md;
    return kExitOk;
  } catch (const std::exception& e) {
    return report_error(e);
  }
}

}  // namespace repspace
