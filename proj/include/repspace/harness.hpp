#pragma once

#include <string>
#include <vector>

#include "repspace/config.hpp"
#include "repspace/eval_set.hpp"
#include "repspace/pca.hpp"
#include "repspace/report.hpp"

namespace repspace {

// Process exit codes of the command-line harness.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitRuntime = 2,
  kExitSweepPartial = 3,
};

struct Evaluation {
  MetricsReport report;
  Pca2d pca;
};

/// Full metric row for `model` on the dataset. The eval set is drawn from
/// the configured split with a seed derived from the dataset seed, so every
/// model evaluated on one dataset sees the same tuples. k-NN and the linear
/// probe use the clean train split as database / training set and the eval
/// anchors as queries. When the anchors span fewer than two directions the
/// PCA coordinates are all zero.
Evaluation evaluate_model(const Model& model, const Dataset& data, const RunConfig& config,
                          const std::string& run_key);

struct RunOutcome {
  TrainResult train;
  Evaluation eval;
};

/// train() followed by evaluate_model(), in memory.
RunOutcome run_experiment(const Dataset& data, const RunConfig& config, const std::string& run_key);

// Dataset persistence: manifest.txt (the DatasetSpec plus a checksum) next
// to train/validation features (FEA1) and labels (LBL1). Loading
// regenerates from the DatasetSpec and checks the checksum.
void write_dataset(const Dataset& data, const std::string& dir);
Dataset load_dataset(const std::string& manifest_path);

std::string stats_csv(const std::vector<EpochStats>& stats);

struct OverclusterVerdict {
  bool over_clustered = false;
  double alignment_delta = 0.0;  // small - large
  double intra_delta = 0.0;      // small - large
  std::string text;
};

OverclusterVerdict overcluster_verdict(const MetricsReport& small, const MetricsReport& large,
                                       const ReportSettings& settings);

/// Default capacity pair: identical except for encoder width.
RunConfig small_encoder_preset();
RunConfig large_encoder_preset();

struct SweepGrid {
  std::string base_config;  // resolved path, empty = built-in defaults
  std::size_t cap = 64;
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;

  static SweepGrid load(const std::string& path);
  static SweepGrid parse(const std::string& text, const std::string& base_dir);
  std::size_t size() const;
  /// Overrides of point `index`; the last axis varies fastest.
  std::vector<std::pair<std::string, std::string>> point(std::size_t index) const;
};

struct SweepRow {
  std::size_t point = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  MetricsReport report;
};

/// Runs every grid point (bounded worker pool) and returns rows in point
/// order. Per-point seeds are derive_seed(root_seed, index).
std::vector<SweepRow> run_sweep(const SweepGrid& grid, const RunConfig& base, std::uint64_t root_seed,
                                std::size_t workers, const std::string& out_dir);

std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string sweep_markdown(const std::vector<SweepRow>& rows);

// Command implementations behind the CLI. Each writes into config.out_dir
// and returns an ExitCode; errors are reported on stderr.
int cmd_train(const RunConfig& config);
int cmd_evaluate(const RunConfig& config, const std::string& checkpoint, const std::string& dataset_manifest);
int cmd_sweep(const std::string& grid_path, const RunConfig* base_override, std::uint64_t root_seed,
              std::size_t workers, const std::string& out_dir);
int cmd_distill_init(const RunConfig& config);
int cmd_overcluster_report(const RunConfig& small, const RunConfig& large, const std::string& out_dir);

}  // namespace repspace
