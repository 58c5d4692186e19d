#pragma once

#include <string>
#include <vector>

namespace repspace {

/// One row of every representation-space metric for a run.
struct MetricsReport {
  std::string run;
  double alignment = 0.0;
  double uniformity = 0.0;
  double intra_class_alignment = 0.0;
  double tolerance = 0.0;
  double inst_disc_top1 = 0.0;
  double best_nn_top1 = 0.0;
  std::size_t best_nn_k = 1;
  double linear_probe_top1 = 0.0;

  /// tolerance identity, accuracies in [0,1], best_nn_k odd and <= k_max.
  void validate(std::size_t k_max) const;
  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Column order of every metrics CSV.
inline constexpr const char* kMetricsCsvHeader =
    "run,alignment,uniformity,intra_class_alignment,tolerance,inst_disc_top1,best_nn_top1,best_nn_k,"
    "linear_probe_top1";

std::string metrics_csv_row(const MetricsReport& r);
std::string metrics_csv(const std::vector<MetricsReport>& rows);
MetricsReport parse_metrics_csv_row(const std::string& line);

/// Aligned, human-readable table with one line per report.
std::string metrics_table(const std::vector<MetricsReport>& rows);

/// Same content as a markdown table.
std::string metrics_markdown(const std::vector<MetricsReport>& rows);

}  // namespace repspace
