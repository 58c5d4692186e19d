#include <gtest/gtest.h>

#include <cstring>
#include <fstream>

#include "repspace/checkpoint.hpp"
#include "repspace/config.hpp"
#include "repspace/embeddings.hpp"
#include "repspace/error.hpp"
#include "repspace/eval_set.hpp"
#include "repspace/kv.hpp"
#include "repspace/trainer.hpp"
#include "test_util.hpp"

using namespace repspace;
using repspace::testing::random_matrix;
using repspace::testing::random_unit;
using repspace::testing::TempDir;

namespace {

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no exception";
  return ErrorKind::io;
}

std::vector<char> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void put_f64(std::vector<char>& bytes, std::size_t offset, double x) {
  std::memcpy(bytes.data() + offset, &x, sizeof x);
}

DatasetSpec tiny_spec() {
  DatasetSpec s;
  s.classes = 3;
  s.n_per_class = 8;
  s.val_per_class = 6;
  s.ambient_dim = 16;
  s.seed = 9;
  return s;
}

Model random_model(std::uint64_t seed, bool projector) {
  ModelSpec spec;
  spec.encoder_hidden = {6};
  spec.representation_dim = 5;
  spec.use_projector = projector;
  spec.projector_hidden = {7};
  spec.projector_out = 4;
  Rng rng(seed);
  return init_model(spec, 16, rng);
}

}  // namespace

TEST(EmbeddingsFile, RoundTripIsBitIdentical) {
  TempDir dir("emb");
  const EmbeddingMatrix m(Matrix(2, 3, {0.6, 0.8, 0.0, 0.0, -1.0, 0.0}));
  write_embeddings(m, dir.file("a.emb"));
  EXPECT_EQ(read_embeddings(dir.file("a.emb")), m);

  Rng rng(1);
  const EmbeddingMatrix r = random_unit(37, 9, rng);
  write_embeddings(r, dir.file("r.emb"));
  const EmbeddingMatrix back = read_embeddings(dir.file("r.emb"));
  ASSERT_EQ(back.matrix().size(), r.matrix().size());
  EXPECT_EQ(std::memcmp(back.matrix().data().data(), r.matrix().data().data(), r.matrix().size() * 8), 0);
}

TEST(EmbeddingsFile, LayoutIsLittleEndianHeaderThenRows) {
  const EmbeddingMatrix m(Matrix(1, 2, {1.0, 0.0}));
  const auto bytes = encode_embeddings(m);
  ASSERT_EQ(bytes.size(), 4u + 4 + 4 + 16);
  EXPECT_EQ(std::string(bytes.data(), 4), "EMB1");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 2);
  double x;
  std::memcpy(&x, bytes.data() + 12, 8);
  EXPECT_EQ(x, 1.0);
}

TEST(EmbeddingsFile, MalformedInputsHaveDistinctKinds) {
  const EmbeddingMatrix m(Matrix(2, 2, {1.0, 0.0, 0.0, 1.0}));
  auto bytes = encode_embeddings(m);

  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(kind_of([&] { decode_embeddings(bad_magic); }), ErrorKind::bad_magic);

  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  EXPECT_EQ(kind_of([&] { decode_embeddings(truncated); }), ErrorKind::truncated);
  EXPECT_EQ(kind_of([&] { decode_embeddings(std::vector<char>(bytes.begin(), bytes.begin() + 6)); }),
            ErrorKind::truncated);

  auto half_norm = bytes;
  put_f64(half_norm, 12, 0.5);
  EXPECT_EQ(kind_of([&] { decode_embeddings(half_norm); }), ErrorKind::norm_violation);

  auto nan = bytes;
  put_f64(nan, 12, std::nan(""));
  EXPECT_EQ(kind_of([&] { decode_embeddings(nan); }), ErrorKind::non_finite);

  EXPECT_EQ(kind_of([] { read_embeddings("/nonexistent/dir/x.emb"); }), ErrorKind::io);
}

TEST(EmbeddingMatrix, Invariants) {
  EXPECT_EQ(kind_of([] { EmbeddingMatrix(Matrix(1, 1, {1.0})); }), ErrorKind::invalid_argument);
  EXPECT_EQ(kind_of([] { EmbeddingMatrix(Matrix(1, 2, {0.5, 0.0})); }), ErrorKind::norm_violation);
  EXPECT_EQ(kind_of([] { EmbeddingMatrix::normalized(Matrix(1, 2, {0.0, 0.0})); }), ErrorKind::zero_norm);
  const auto n = EmbeddingMatrix::normalized(Matrix(1, 2, {3.0, 4.0}));
  EXPECT_NEAR(n.row(0)[0], 0.6, 1e-15);
  PairSet p{{{0, 1}}};
  EXPECT_THROW(p.validate(1), Error);
  EXPECT_NO_THROW(p.validate(2));
}

TEST(LabelsFile, RoundTripAndMalformed) {
  TempDir dir("lbl");
  const LabelVector l{{0, 3, 1, 1, 2, 0}};
  write_labels(l, dir.file("l.lbl"));
  EXPECT_EQ(read_labels(dir.file("l.lbl")), l);
  EXPECT_EQ(l.num_classes(), 4u);

  auto bytes = encode_labels(l);
  EXPECT_EQ(std::string(bytes.data(), 4), "LBL1");
  auto bad = bytes;
  bad[3] = '2';
  EXPECT_EQ(kind_of([&] { decode_labels(bad); }), ErrorKind::bad_magic);
  bytes.pop_back();
  EXPECT_EQ(kind_of([&] { decode_labels(bytes); }), ErrorKind::truncated);
}

TEST(FeaturesFile, RoundTripAllowsAnyNorm) {
  TempDir dir("fea");
  Rng rng(3);
  const Matrix m = random_matrix(5, 7, rng, 10.0);
  write_features(m, dir.file("f.fea"));
  EXPECT_EQ(read_features(dir.file("f.fea")), m);
  auto bytes = encode_features(m);
  bytes[1] = 'Z';
  EXPECT_EQ(kind_of([&] { decode_features(bytes); }), ErrorKind::bad_magic);
}

TEST(CsvMatrix, ShortestDecimalRoundTrips) {
  TempDir dir("csv");
  Rng rng(4);
  const Matrix m = random_matrix(4, 3, rng);
  write_matrix_csv(m, dir.file("m.csv"));
  EXPECT_EQ(read_matrix_csv(dir.file("m.csv")), m);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.0), "-2");
}

TEST(Checkpoint, RoundTripIsBitExact) {
  TempDir dir("ckpt");
  for (bool projector : {false, true}) {
    const Model m = random_model(5, projector);
    const std::string path = dir.file(projector ? "p.rlns" : "e.rlns");
    save_model(path, m);
    const Model back = load_model(path);
    EXPECT_EQ(back, m);
    EXPECT_EQ(encode_model(back), read_bytes(path));
    EXPECT_EQ(file_checksum(path).size(), 16u);
  }
}

TEST(Checkpoint, LayoutMatchesRecordDescription) {
  MlpParams p;
  p.activation = Activation::relu;
  p.dropout_p = 0.5;
  p.layers.push_back({Matrix(1, 2, {1.5, -2.0}), {0.25}});
  const auto bytes = encode_mlp(p);
  ASSERT_EQ(bytes.size(), 4u + 1 + 4 + 4 + 4 + 16 + 8 + 1 + 8);
  EXPECT_EQ(std::string(bytes.data(), 4), "RLNS");
  EXPECT_EQ(bytes[4], kCheckpointVersion);
  EXPECT_EQ(bytes[5], 1);   // layer count
  EXPECT_EQ(bytes[9], 2);   // in width
  EXPECT_EQ(bytes[13], 1);  // out width
  double w;
  std::memcpy(&w, bytes.data() + 17, 8);
  EXPECT_EQ(w, 1.5);
  EXPECT_EQ(bytes[41], 1);  // activation
  std::size_t offset = 0;
  EXPECT_EQ(decode_mlp(bytes, offset), p);
  EXPECT_EQ(offset, bytes.size());
}

TEST(Checkpoint, MalformedInputs) {
  const auto bytes = encode_model(random_model(6, true));
  auto magic = bytes;
  magic[0] = 'r';
  EXPECT_EQ(kind_of([&] { decode_model(magic); }), ErrorKind::bad_magic);
  auto version = bytes;
  version[4] = 9;
  EXPECT_EQ(kind_of([&] { decode_model(version); }), ErrorKind::bad_version);
  for (std::size_t cut : {std::size_t{3}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
    const std::vector<char> t(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_EQ(kind_of([&] { decode_model(t); }), ErrorKind::truncated) << "cut " << cut;
  }
  auto trailing = bytes;
  trailing.push_back(0);
  trailing.push_back(0);
  trailing.push_back(0);
  trailing.push_back(0);
  EXPECT_THROW(decode_model(trailing), Error);
  EXPECT_EQ(kind_of([] { load_model("/nonexistent/m.rlns"); }), ErrorKind::io);
}

TEST(KeyValues, ParseCommentsAndOverrides) {
  const auto kv = KeyValues::parse("# header\na = 1\n\n  b=two words  # note\na = 3\n");
  EXPECT_EQ(kv.get("a"), "3");
  EXPECT_EQ(kv.get("b"), "two words");
  EXPECT_EQ(kv.get_or("c", "x"), "x");
  EXPECT_FALSE(kv.contains("c"));
  EXPECT_EQ(kind_of([] { KeyValues::parse("novalue\n"); }), ErrorKind::validation);
  EXPECT_EQ(KeyValues::parse(kv.render()).entries(), kv.entries());
  EXPECT_EQ(split_list(" 1, 2 ,3"), (std::vector<std::string>{"1", "2", "3"}));
}

TEST(RunConfigFile, RenderParseRoundTrip) {
  RunConfig c;
  c.seed = 123456789012345ULL;
  c.out_dir = "runs/x";
  c.data.classes = 4;
  c.data.within_class_sigma = 0.1 + 0.2;
  c.train.temperature = 0.05;
  c.train.aug = baseline_aug();
  c.train.model.encoder_hidden = {12, 7};
  c.train.model.use_projector = false;
  c.train.init_checkpoint = "init.rlns";
  c.eval.k_max = 31;
  c.eval.probe.standardize = false;
  c.distill.teacher = "teacher.rlns";
  c.report.intra_margin = 0.125;
  EXPECT_EQ(RunConfig::parse(c.render()), c);
  EXPECT_EQ(RunConfig::parse(RunConfig{}.render()), RunConfig{});

  TempDir dir("cfg");
  c.to_kv().save(dir.file("c.cfg"));
  EXPECT_EQ(RunConfig::load(dir.file("c.cfg")), c);
}

TEST(RunConfigFile, RandomizedRoundTrip) {
  Rng rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    RunConfig c;
    c.seed = rng.next();
    c.train.temperature = rng.uniform(0.01, 1.0);
    c.train.lr = rng.uniform(0.0, 0.5);
    c.train.key_momentum = rng.uniform();
    c.data.shortcut_scale = rng.uniform(0.1, 5.0);
    c.train.aug.jitter_sigma = rng.uniform(0.0, 0.3);
    c.train.aug.id = "custom";
    c.eval.probe.lr = rng.uniform(0.01, 2.0);
    EXPECT_EQ(RunConfig::parse(c.render()), c);
  }
}

TEST(RunConfigFile, UnknownKeysAndBadValuesAreValidationErrors) {
  EXPECT_EQ(kind_of([] { RunConfig::parse("train.bogus = 1\n"); }), ErrorKind::validation);
  EXPECT_EQ(kind_of([] { RunConfig::parse("train.temperature = abc\n"); }), ErrorKind::validation);
  RunConfig c;
  c.train.temperature = -1.0;
  c.data.classes = 1;
  const auto v = c.violations();
  ASSERT_GE(v.size(), 2u);
  try {
    c.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
    EXPECT_NE(std::string(e.what()).find("temperature"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("classes"), std::string::npos);
  }
}

TEST(EvalSet, SizesAndDeterminism) {
  DatasetSpec spec;
  spec.seed = 3;
  const Dataset data = generate(spec);
  const EvalSet a = build_eval_set(data, Split::validation, baseline_aug(), 11, 50);
  EXPECT_EQ(a.size(), 500u);
  EXPECT_EQ(a.view1.rows() + a.view2.rows(), 1000u);
  std::vector<std::size_t> per_class(10, 0);
  for (auto l : a.labels.labels) ++per_class[l];
  for (auto c : per_class) EXPECT_EQ(c, 50u);
  EXPECT_EQ(build_eval_set(data, Split::validation, baseline_aug(), 11, 50), a);
  EXPECT_NE(build_eval_set(data, Split::validation, baseline_aug(), 12, 50).view1, a.view1);
  EXPECT_THROW(build_eval_set(data, Split::validation, baseline_aug(), 11, 0), Error);
  try {
    build_eval_set(data, Split::validation, baseline_aug(), 11, 51);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("class"), std::string::npos);
  }
}

TEST(EvalSet, WriteReadRoundTrip) {
  TempDir dir("evalset");
  const Dataset data = generate(tiny_spec());
  const EvalSet a = build_eval_set(data, Split::train, strong_aug(), 4, 5);
  write_eval_set(a, dir.path().string());
  EXPECT_EQ(read_eval_set(dir.path().string()), a);
}

TEST(EmbedEvalSet, IdentityEncoderGivesNormalizedInputs) {
  EvalSet set;
  set.anchors = Matrix(2, 3, {3.0, 4.0, 0.0, 0.0, 0.0, 2.0});
  set.view1 = Matrix(2, 3, {1.0, 1.0, 0.0, 0.0, 5.0, 0.0});
  set.view2 = set.anchors;
  set.labels.labels = {0, 1};
  Model m;
  m.encoder.activation = Activation::none;
  m.encoder.layers.push_back({Matrix::identity(3), {0.0, 0.0, 0.0}});
  const EvalEmbeddings e = embed_eval_set(m, set);
  EXPECT_NEAR(e.anchors.row(0)[0], 0.6, 1e-15);
  EXPECT_NEAR(e.anchors.row(0)[1], 0.8, 1e-15);
  EXPECT_EQ(e.anchors.row(1)[2], 1.0);
  EXPECT_NEAR(e.view1.row(0)[0], std::sqrt(0.5), 1e-15);
  EXPECT_EQ(e.labels, set.labels);
}

TEST(EmbedEvalSet, DeterministicUnitRowsAndHeadSelection) {
  const Dataset data = generate(tiny_spec());
  const EvalSet set = build_eval_set(data, Split::validation, baseline_aug(), 2, 4);
  const Model m = random_model(8, true);
  const EvalEmbeddings a = embed_eval_set(m, set);
  const EvalEmbeddings b = embed_eval_set(m, set);
  EXPECT_EQ(a.anchors, b.anchors);
  EXPECT_EQ(a.view2, b.view2);
  for (std::size_t i = 0; i < a.view1.n(); ++i) EXPECT_NEAR(squared_norm(a.view1.row(i)), 1.0, 1e-12);
  const EvalEmbeddings head = embed_eval_set(m, set, EmbedHead::projector);
  EXPECT_NE(head.anchors.matrix(), a.anchors.matrix());
  EXPECT_EQ(a.anchors.d(), 5u);
  EXPECT_EQ(head.anchors.d(), 4u);

  Model wrong = m;
  Rng rng(1);
  wrong.encoder = MlpParams::init(std::vector<std::size_t>{17, 5}, Activation::relu, 0.0, rng);
  EXPECT_EQ(kind_of([&] { embed_eval_set(wrong, set); }), ErrorKind::dimension_mismatch);
}
