#pragma once

#include <cstdint>
#include <string>

#include "repspace/embeddings.hpp"
#include "repspace/model.hpp"
#include "repspace/synthetic.hpp"

namespace repspace {

/// Static pre-generated (anchor, view1, view2, label) tuples. Row i of each
/// matrix belongs to the same source sample.
struct EvalSet {
  std::uint64_t seed = 0;
  std::string aug_spec_id;
  std::size_t samples_per_class = 0;
  Matrix anchors;
  Matrix view1;
  Matrix view2;
  LabelVector labels;
  std::vector<std::uint64_t> instance_ids;

  std::size_t size() const noexcept { return anchors.rows(); }
  friend bool operator==(const EvalSet&, const EvalSet&) = default;
};

/// Picks samples_per_class samples of every class from `split` (random
/// subset, ordered by class then draw) and draws two views of each.
/// Deterministic in (seed, aug).
EvalSet build_eval_set(const Dataset& data, Split split, const AugSpec& aug, std::uint64_t seed,
                       std::size_t samples_per_class);

enum class EmbedHead { backbone, projector };

struct EvalEmbeddings {
  EmbeddingMatrix anchors;
  EmbeddingMatrix view1;
  EmbeddingMatrix view2;
  LabelVector labels;
};

/// Eval-mode embedding of every row. Metrics use the backbone head.
EvalEmbeddings embed_eval_set(const Model& model, const EvalSet& set, EmbedHead head = EmbedHead::backbone);

/// Writes manifest.txt plus anchors/view1/view2 (FEA1) and labels (LBL1)
/// into `dir`.
void write_eval_set(const EvalSet& set, const std::string& dir);
EvalSet read_eval_set(const std::string& dir);

}  // namespace repspace
