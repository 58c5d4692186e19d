#include "repspace/eval_set.hpp"

#include <algorithm>
#include <filesystem>

#include "repspace/error.hpp"
#include "repspace/kv.hpp"

namespace repspace {

EvalSet build_eval_set(const Dataset& data, Split split, const AugSpec& aug, std::uint64_t seed,
                       std::size_t samples_per_class) {
  if (samples_per_class == 0) throw Error(ErrorKind::invalid_argument, "build_eval_set: samples_per_class must be > 0");
  aug.validate();
  const auto& samples = data.split(split);
  const std::size_t classes = data.spec().classes;
  std::vector<std::vector<std::size_t>> by_class(classes);
  for (std::size_t i = 0; i < samples.size(); ++i) by_class[samples[i].label].push_back(i);
  for (std::size_t c = 0; c < classes; ++c) {
    if (by_class[c].size() < samples_per_class) {
      throw Error(ErrorKind::invalid_argument,
                  "build_eval_set: class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                      " samples, need " + std::to_string(samples_per_class));
    }
  }

  Rng pick_rng(derive_seed(seed, "pick"));
  Rng view_rng(derive_seed(seed, "views"));
  const std::size_t n = classes * samples_per_class;
  const std::size_t dim = data.spec().ambient_dim;
  EvalSet set;
  set.seed = seed;
  set.aug_spec_id = aug.id;
  set.samples_per_class = samples_per_class;
  set.anchors = Matrix(n, dim);
  set.view1 = Matrix(n, dim);
  set.view2 = Matrix(n, dim);
  std::size_t row = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    auto idx = by_class[c];
    pick_rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t k = 0; k < samples_per_class; ++k, ++row) {
      const Sample& s = samples[idx[k]];
      auto [a, b] = positive_pair(data, s, aug, view_rng);
      std::copy(s.features.begin(), s.features.end(), set.anchors.row(row).begin());
      std::copy(a.features.begin(), a.features.end(), set.view1.row(row).begin());
      std::copy(b.features.begin(), b.features.end(), set.view2.row(row).begin());
      set.labels.labels.push_back(s.label);
      set.instance_ids.push_back(s.instance_id);
    }
  }
  return set;
}

EvalEmbeddings embed_eval_set(const Model& model, const EvalSet& set, EmbedHead head) {
  if (model.input_width() != set.anchors.cols()) {
    throw Error(ErrorKind::dimension_mismatch,
                "embed_eval_set: encoder input width " + std::to_string(model.input_width()) +
                    " != eval set dimension " + std::to_string(set.anchors.cols()));
  }
  auto embed = [&](const Matrix& x) {
    return EmbeddingMatrix(head == EmbedHead::backbone ? model_embed_backbone(model, x) : model_embed_head(model, x));
  };
  return EvalEmbeddings{embed(set.anchors), embed(set.view1), embed(set.view2), set.labels};
}

void write_eval_set(const EvalSet& set, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path root(dir);
  write_features(set.anchors, (root / "anchors.fea").string());
  write_features(set.view1, (root / "view1.fea").string());
  write_features(set.view2, (root / "view2.fea").string());
  write_labels(set.labels, (root / "labels.lbl").string());
  LabelVector ids;
  for (auto id : set.instance_ids) ids.labels.push_back(static_cast<std::uint32_t>(id));
  write_labels(ids, (root / "instances.lbl").string());
  KeyValues kv;
  kv.set("evalset.seed", std::to_string(set.seed));
  kv.set("evalset.aug_spec", set.aug_spec_id);
  kv.set("evalset.samples_per_class", std::to_string(set.samples_per_class));
  kv.set("evalset.anchors", std::to_string(set.size()));
  kv.set("evalset.views", std::to_string(2 * set.size()));
  kv.set("evalset.dim", std::to_string(set.anchors.cols()));
  kv.set("evalset.anchors_file", "anchors.fea");
  kv.set("evalset.view1_file", "view1.fea");
  kv.set("evalset.view2_file", "view2.fea");
  kv.set("evalset.labels_file", "labels.lbl");
  kv.set("evalset.instances_file", "instances.lbl");
  kv.save((root / "manifest.txt").string());
}

EvalSet read_eval_set(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  const auto kv = KeyValues::load((root / "manifest.txt").string());
  EvalSet set;
  set.seed = std::stoull(kv.get("evalset.seed"));
  set.aug_spec_id = kv.get("evalset.aug_spec");
  set.samples_per_class = std::stoull(kv.get("evalset.samples_per_class"));
  set.anchors = read_features((root / kv.get("evalset.anchors_file")).string());
  set.view1 = read_features((root / kv.get("evalset.view1_file")).string());
  set.view2 = read_features((root / kv.get("evalset.view2_file")).string());
  set.labels = read_labels((root / kv.get("evalset.labels_file")).string());
  for (auto id : read_labels((root / kv.get("evalset.instances_file")).string()).labels) set.instance_ids.push_back(id);
  const std::size_t n = std::stoull(kv.get("evalset.anchors"));
  if (set.anchors.rows() != n || set.view1.rows() != n || set.view2.rows() != n || set.labels.size() != n ||
      set.instance_ids.size() != n) {
    throw Error(ErrorKind::dimension_mismatch, "read_eval_set: file row counts disagree with manifest");
  }
  return set;
}

}  // namespace repspace
