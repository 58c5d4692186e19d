#include "repspace/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "repspace/embeddings.hpp"
#include "repspace/error.hpp"
#include "repspace/kv.hpp"

namespace repspace {

void MetricsReport::validate(std::size_t k_max) const {
  if (std::abs(tolerance - (1.0 - intra_class_alignment / 2.0)) > 1e-9) {
    throw Error(ErrorKind::validation, "MetricsReport: tolerance != 1 - intra/2");
  }
  for (double acc : {inst_disc_top1, best_nn_top1, linear_probe_top1}) {
    if (!(acc >= 0.0 && acc <= 1.0)) throw Error(ErrorKind::validation, "MetricsReport: accuracy outside [0,1]");
  }
  if (best_nn_k % 2 == 0 || best_nn_k > k_max) {
    throw Error(ErrorKind::validation, "MetricsReport: best_nn_k must be odd and <= k_max");
  }
}

std::string metrics_csv_row(const MetricsReport& r) {
  std::string run = r.run;
  std::replace(run.begin(), run.end(), ',', ';');
  return run + "," + format_double(r.alignment) + "," + format_double(r.uniformity) + "," +
         format_double(r.intra_class_alignment) + "," + format_double(r.tolerance) + "," +
         format_double(r.inst_disc_top1) + "," + format_double(r.best_nn_top1) + "," +
         std::to_string(r.best_nn_k) + "," + format_double(r.linear_probe_top1);
}

std::string metrics_csv(const std::vector<MetricsReport>& rows) {
  std::string out = std::string(kMetricsCsvHeader) + "\n";
  for (const auto& r : rows) out += metrics_csv_row(r) + "\n";
  return out;
}

MetricsReport parse_metrics_csv_row(const std::string& line) {
  const auto cells = split_list(line);
  if (cells.size() != 9) throw Error(ErrorKind::validation, "metrics csv: expected 9 columns");
  MetricsReport r;
  r.run = cells[0];
  r.alignment = std::stod(cells[1]);
  r.uniformity = std::stod(cells[2]);
  r.intra_class_alignment = std::stod(cells[3]);
  r.tolerance = std::stod(cells[4]);
  r.inst_disc_top1 = std::stod(cells[5]);
  r.best_nn_top1 = std::stod(cells[6]);
  r.best_nn_k = std::stoul(cells[7]);
  r.linear_probe_top1 = std::stod(cells[8]);
  return r;
}

namespace {

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::vector<std::vector<std::string>> cells(const std::vector<MetricsReport>& rows) {
  std::vector<std::vector<std::string>> out;
  out.push_back({"run", "inst-disc", "align", "intra-align", "tolerance", "uniformity", "best-NN", "k", "linear"});
  for (const auto& r : rows) {
    out.push_back({r.run, fixed(100.0 * r.inst_disc_top1, 1), fixed(r.alignment, 4),
                   fixed(r.intra_class_alignment, 4), fixed(r.tolerance, 4), fixed(r.uniformity, 4),
                   fixed(100.0 * r.best_nn_top1, 1), std::to_string(r.best_nn_k),
                   fixed(100.0 * r.linear_probe_top1, 1)});
  }
  return out;
}

}  // namespace

std::string metrics_table(const std::vector<MetricsReport>& rows) {
  const auto table = cells(rows);
  std::vector<std::size_t> width(table[0].size(), 0);
  for (const auto& row : table)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::ostringstream out;
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << "  ";
      const std::string pad(width[c] - row[c].size(), ' ');
      out << (c == 0 ? row[c] + pad : pad + row[c]);
    }
    out << '\n';
  }
  return out.str();
}

std::string metrics_markdown(const std::vector<MetricsReport>& rows) {
  const auto table = cells(rows);
  std::ostringstream out;
  for (std::size_t r = 0; r < table.size(); ++r) {
    out << '|';
    for (const auto& cell : table[r]) out << ' ' << cell << " |";
    out << '\n';
    if (r == 0) {
      out << '|';
      for (std::size_t c = 0; c < table[r].size(); ++c) out << (c == 0 ? " --- |" : " ---: |");
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace repspace
