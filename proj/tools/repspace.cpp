#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "repspace/error.hpp"
#include "repspace/harness.hpp"

using namespace repspace;

namespace {

struct Common {
  std::vector<std::string> configs;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, Common& c, bool many_configs = false) {
  auto* opt = cmd->add_option("--config", c.configs, "key = value config file");
  if (!many_configs) opt->expected(0, 1);
  cmd->add_option("--seed", c.seed, "override run.seed");
  cmd->add_flag("--deterministic", c.deterministic, "single-threaded kernels (bitwise reproducible)");
  cmd->add_option("--out", c.out, "output directory");
}

RunConfig resolve(const std::string& path, const Common& c, const RunConfig& fallback) {
  RunConfig cfg = path.empty() ? fallback : RunConfig::load(path);
  if (c.seed) cfg.seed = *c.seed;
  if (c.deterministic) cfg.deterministic = true;
  if (c.out) cfg.out_dir = *c.out;
  return cfg;
}

int guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::validation ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrastive representation-space experiments on synthetic data"};
  app.require_subcommand(1);

  Common train_opts, eval_opts, sweep_opts, distill_opts, oc_opts;
  std::string checkpoint, dataset, grid;
  std::size_t workers = 1;

  auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
  add_common(train_cmd, train_opts);

  auto* eval_cmd = app.add_subcommand("evaluate", "compute the metric row of a checkpoint");
  add_common(eval_cmd, eval_opts);
  eval_cmd->add_option("--checkpoint", checkpoint, "model checkpoint (.rlns)")->required();
  eval_cmd->add_option("--dataset", dataset, "dataset manifest written by train");

  auto* sweep_cmd = app.add_subcommand("sweep", "run every point of a parameter grid");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--grid", grid, "grid file")->required();
  sweep_cmd->add_option("--workers", workers, "concurrent grid points")->check(CLI::PositiveNumber);

  auto* distill_cmd = app.add_subcommand("distill-init", "distill a student init from a teacher checkpoint");
  add_common(distill_cmd, distill_opts);

  auto* oc_cmd = app.add_subcommand("overcluster-report", "train small and large encoders and compare them");
  add_common(oc_cmd, oc_opts, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  auto first = [](const Common& c) { return c.configs.empty() ? std::string() : c.configs.front(); };

  if (*train_cmd) {
    return guarded([&] { return cmd_train(resolve(first(train_opts), train_opts, RunConfig{})); });
  }
  if (*eval_cmd) {
    return guarded([&] { return cmd_evaluate(resolve(first(eval_opts), eval_opts, RunConfig{}), checkpoint, dataset); });
  }
  if (*sweep_cmd) {
    return guarded([&] {
      std::string base_path = first(sweep_opts);
      if (base_path.empty()) base_path = SweepGrid::load(grid).base_config;
      const RunConfig base = resolve(base_path, sweep_opts, RunConfig{});
      return cmd_sweep(grid, &base, base.seed, workers, base.out_dir);
    });
  }
  if (*distill_cmd) {
    return guarded([&] { return cmd_distill_init(resolve(first(distill_opts), distill_opts, RunConfig{})); });
  }
  if (*oc_cmd) {
    return guarded([&] {
      if (oc_opts.configs.size() > 2) throw Error(ErrorKind::validation, "overcluster-report takes at most two --config");
      const RunConfig small =
          resolve(oc_opts.configs.size() > 0 ? oc_opts.configs[0] : "", oc_opts, small_encoder_preset());
      const RunConfig large =
          resolve(oc_opts.configs.size() > 1 ? oc_opts.configs[1] : "", oc_opts, large_encoder_preset());
      return cmd_overcluster_report(small, large, oc_opts.out ? *oc_opts.out : small.out_dir);
    });
  }
  return kExitOk;
}
