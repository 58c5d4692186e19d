#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "repspace/kv.hpp"
#include "repspace/linear_probe.hpp"
#include "repspace/synthetic.hpp"
#include "repspace/trainer.hpp"

namespace repspace {

struct EvalSettings {
  std::size_t k_max = 101;
  std::size_t samples_per_class = 50;
  std::string aug_preset = "baseline";
  double uniformity_t = 2.0;
  Split split = Split::validation;
  LinearProbeConfig probe;

  friend bool operator==(const EvalSettings&, const EvalSettings&) = default;
};

/// Thresholds of the over-clustering verdict: the smaller model is flagged
/// when its alignment is within `alignment_band` of the larger model's and
/// its intra-class alignment exceeds the larger model's by more than
/// `intra_margin`.
struct ReportSettings {
  double alignment_band = 0.15;
  double intra_margin = 0.05;

  friend bool operator==(const ReportSettings&, const ReportSettings&) = default;
};

struct DistillSettings {
  std::size_t epochs = 2;
  double tau_student = 0.1;
  double tau_teacher = 0.1;
  std::size_t queue_size = 256;
  std::size_t batch_size = 64;
  double lr = 0.06;
  std::string teacher;  // checkpoint path

  friend bool operator==(const DistillSettings&, const DistillSettings&) = default;
};

// Everything one run needs. Serialized as flat `key = value` text with a
// module prefix per key (run., data., aug., model., train., eval., distill.,
// report.).
struct RunConfig {
  std::uint64_t seed = 1;
  bool deterministic = true;
  std::string out_dir = "out";
  DatasetSpec data;
  TrainConfig train;
  EvalSettings eval;
  DistillSettings distill;
  ReportSettings report;

  /// Applies one key. Throws ErrorKind::validation for unknown keys or
  /// unparseable values.
  void set(const std::string& key, const std::string& value);

  /// Keys under manifest. are skipped, so run manifests load as configs.
  static RunConfig from_kv(const KeyValues& kv);
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);

  KeyValues to_kv() const;
  std::string render() const;

  /// Every violated field, across all sections.
  std::vector<std::string> violations() const;
  void validate() const;

  DistillConfig distill_config() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

}  // namespace repspace
