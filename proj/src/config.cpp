#include "repspace/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "repspace/embeddings.hpp"
#include "repspace/error.hpp"

namespace repspace {

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw Error(ErrorKind::validation, key + ": expected " + expected + ", got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(x)) bad_value(key, v, "a finite number");
  return x;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return x;
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  return static_cast<std::size_t>(parse_u64(key, v));
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "true or false");
}

std::vector<std::size_t> parse_widths(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(v)) out.push_back(parse_size(key, item));
  return out;
}

std::string render_widths(const std::vector<std::size_t>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) out += (i ? "," : "") + std::to_string(w[i]);
  return out;
}

Activation parse_activation(const std::string& key, const std::string& v) {
  if (v == "relu") return Activation::relu;
  if (v == "none") return Activation::none;
  bad_value(key, v, "relu or none");
}

const char* render_activation(Activation a) { return a == Activation::relu ? "relu" : "none"; }

void set_aug_field(AugSpec& aug, const std::string& key, const std::string& field, const std::string& value) {
  if (field == "preset") {
    aug = value == "custom" ? AugSpec{} : aug_preset(value);
    return;
  }
  const AugSpec before = aug;
  const double x = parse_double(key, value);
  if (field == "jitter_sigma") aug.jitter_sigma = x;
  else if (field == "shortcut_resample_p") aug.shortcut_resample_p = x;
  else if (field == "scale_lo") aug.scale_lo = x;
  else if (field == "scale_hi") aug.scale_hi = x;
  else if (field == "mask_p") aug.mask_p = x;
  else throw Error(ErrorKind::validation, "unknown config key '" + key + "'");
  if (!(aug == before)) aug.id = "custom";
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto dot_pos = key.find('.');
  const std::string section = key.substr(0, dot_pos);
  const std::string field = dot_pos == std::string::npos ? "" : key.substr(dot_pos + 1);
  auto unknown = [&]() { throw Error(ErrorKind::validation, "unknown config key '" + key + "'"); };

  if (section == "run") {
    if (field == "seed") seed = parse_u64(key, value);
    else if (field == "deterministic") deterministic = parse_bool(key, value);
    else if (field == "out") out_dir = value;
    else unknown();
  } else if (section == "data") {
    if (field == "classes") data.classes = parse_size(key, value);
    else if (field == "n_per_class") data.n_per_class = parse_size(key, value);
    else if (field == "val_per_class") data.val_per_class = parse_size(key, value);
    else if (field == "latent_dim") data.latent_dim = parse_size(key, value);
    else if (field == "shortcut_dim") data.shortcut_dim = parse_size(key, value);
    else if (field == "ambient_dim") data.ambient_dim = parse_size(key, value);
    else if (field == "within_class_sigma") data.within_class_sigma = parse_double(key, value);
    else if (field == "shortcut_scale") data.shortcut_scale = parse_double(key, value);
    else if (field == "min_center_angle_deg") data.min_center_angle_deg = parse_double(key, value);
    else if (field == "seed") data.seed = parse_u64(key, value);
    else unknown();
  } else if (section == "aug") {
    set_aug_field(train.aug, key, field, value);
  } else if (section == "model") {
    ModelSpec& m = train.model;
    if (field == "encoder_hidden") m.encoder_hidden = parse_widths(key, value);
    else if (field == "representation_dim") m.representation_dim = parse_size(key, value);
    else if (field == "activation") m.activation = parse_activation(key, value);
    else if (field == "encoder_dropout") m.encoder_dropout = parse_double(key, value);
    else if (field == "use_projector") m.use_projector = parse_bool(key, value);
    else if (field == "projector_hidden") m.projector_hidden = parse_widths(key, value);
    else if (field == "projector_out") m.projector_out = parse_size(key, value);
    else if (field == "projector_dropout") m.projector_dropout = parse_double(key, value);
    else unknown();
  } else if (section == "train") {
    if (field == "temperature") train.temperature = parse_double(key, value);
    else if (field == "queue_size") train.queue_size = parse_size(key, value);
    else if (field == "batch_size") train.batch_size = parse_size(key, value);
    else if (field == "lr") train.lr = parse_double(key, value);
    else if (field == "sgd_momentum") train.sgd_momentum = parse_double(key, value);
    else if (field == "weight_decay") train.weight_decay = parse_double(key, value);
    else if (field == "key_momentum") train.key_momentum = parse_double(key, value);
    else if (field == "epochs") train.epochs = parse_size(key, value);
    else if (field == "init") train.init_checkpoint = value == "random" ? "" : value;
    else unknown();
  } else if (section == "eval") {
    if (field == "k_max") eval.k_max = parse_size(key, value);
    else if (field == "samples_per_class") eval.samples_per_class = parse_size(key, value);
    else if (field == "aug_preset") {
      aug_preset(value);
      eval.aug_preset = value;
    } else if (field == "uniformity_t") eval.uniformity_t = parse_double(key, value);
    else if (field == "split") {
      if (value == "validation") eval.split = Split::validation;
      else if (value == "train") eval.split = Split::train;
      else bad_value(key, value, "validation or train");
    } else if (field == "probe_epochs") eval.probe.epochs = parse_size(key, value);
    else if (field == "probe_lr") eval.probe.lr = parse_double(key, value);
    else if (field == "probe_batch") eval.probe.batch = parse_size(key, value);
    else if (field == "probe_seed") eval.probe.seed = parse_u64(key, value);
    else if (field == "probe_standardize") eval.probe.standardize = parse_bool(key, value);
    else unknown();
  } else if (section == "distill") {
    if (field == "epochs") distill.epochs = parse_size(key, value);
    else if (field == "tau_student") distill.tau_student = parse_double(key, value);
    else if (field == "tau_teacher") distill.tau_teacher = parse_double(key, value);
    else if (field == "queue_size") distill.queue_size = parse_size(key, value);
    else if (field == "batch_size") distill.batch_size = parse_size(key, value);
    else if (field == "lr") distill.lr = parse_double(key, value);
    else if (field == "teacher") distill.teacher = value;
    else unknown();
  } else if (section == "report") {
    if (field == "alignment_band") report.alignment_band = parse_double(key, value);
    else if (field == "intra_margin") report.intra_margin = parse_double(key, value);
    else unknown();
  } else {
    unknown();
  }
}

RunConfig RunConfig::from_kv(const KeyValues& kv) {
  RunConfig c;
  std::vector<std::string> errors;
  for (const auto& [k, v] : kv.entries()) {
    if (k.rfind("manifest.", 0) == 0) continue;
    try {
      c.set(k, v);
    } catch (const Error& e) {
      errors.push_back(e.what());
    }
  }
  if (!errors.empty()) {
    std::string msg = "config errors:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw Error(ErrorKind::validation, msg);
  }
  return c;
}

RunConfig RunConfig::parse(const std::string& text) { return from_kv(KeyValues::parse(text)); }
RunConfig RunConfig::load(const std::string& path) { return from_kv(KeyValues::load(path)); }

KeyValues RunConfig::to_kv() const {
  KeyValues kv;
  auto num = [](double x) { return format_double(x); };
  kv.set("run.seed", std::to_string(seed));
  kv.set("run.deterministic", deterministic ? "true" : "false");
  kv.set("run.out", out_dir);
  kv.set("data.classes", std::to_string(data.classes));
  kv.set("data.n_per_class", std::to_string(data.n_per_class));
  kv.set("data.val_per_class", std::to_string(data.val_per_class));
  kv.set("data.latent_dim", std::to_string(data.latent_dim));
  kv.set("data.shortcut_dim", std::to_string(data.shortcut_dim));
  kv.set("data.ambient_dim", std::to_string(data.ambient_dim));
  kv.set("data.within_class_sigma", num(data.within_class_sigma));
  kv.set("data.shortcut_scale", num(data.shortcut_scale));
  kv.set("data.min_center_angle_deg", num(data.min_center_angle_deg));
  kv.set("data.seed", std::to_string(data.seed));
  kv.set("aug.preset", train.aug.id);
  kv.set("aug.jitter_sigma", num(train.aug.jitter_sigma));
  kv.set("aug.shortcut_resample_p", num(train.aug.shortcut_resample_p));
  kv.set("aug.scale_lo", num(train.aug.scale_lo));
  kv.set("aug.scale_hi", num(train.aug.scale_hi));
  kv.set("aug.mask_p", num(train.aug.mask_p));
  const ModelSpec& m = train.model;
  kv.set("model.encoder_hidden", render_widths(m.encoder_hidden));
  kv.set("model.representation_dim", std::to_string(m.representation_dim));
  kv.set("model.activation", render_activation(m.activation));
  kv.set("model.encoder_dropout", num(m.encoder_dropout));
  kv.set("model.use_projector", m.use_projector ? "true" : "false");
  kv.set("model.projector_hidden", render_widths(m.projector_hidden));
  kv.set("model.projector_out", std::to_string(m.projector_out));
  kv.set("model.projector_dropout", num(m.projector_dropout));
  kv.set("train.temperature", num(train.temperature));
  kv.set("train.queue_size", std::to_string(train.queue_size));
  kv.set("train.batch_size", std::to_string(train.batch_size));
  kv.set("train.lr", num(train.lr));
  kv.set("train.sgd_momentum", num(train.sgd_momentum));
  kv.set("train.weight_decay", num(train.weight_decay));
  kv.set("train.key_momentum", num(train.key_momentum));
  kv.set("train.epochs", std::to_string(train.epochs));
  kv.set("train.init", train.init_checkpoint.empty() ? "random" : train.init_checkpoint);
  kv.set("eval.k_max", std::to_string(eval.k_max));
  kv.set("eval.samples_per_class", std::to_string(eval.samples_per_class));
  kv.set("eval.aug_preset", eval.aug_preset);
  kv.set("eval.uniformity_t", num(eval.uniformity_t));
  kv.set("eval.split", eval.split == Split::validation ? "validation" : "train");
  kv.set("eval.probe_epochs", std::to_string(eval.probe.epochs));
  kv.set("eval.probe_lr", num(eval.probe.lr));
  kv.set("eval.probe_batch", std::to_string(eval.probe.batch));
  kv.set("eval.probe_seed", std::to_string(eval.probe.seed));
  kv.set("eval.probe_standardize", eval.probe.standardize ? "true" : "false");
  kv.set("distill.epochs", std::to_string(distill.epochs));
  kv.set("distill.tau_student", num(distill.tau_student));
  kv.set("distill.tau_teacher", num(distill.tau_teacher));
  kv.set("distill.queue_size", std::to_string(distill.queue_size));
  kv.set("distill.batch_size", std::to_string(distill.batch_size));
  kv.set("distill.lr", num(distill.lr));
  kv.set("distill.teacher", distill.teacher);
  kv.set("report.alignment_band", num(report.alignment_band));
  kv.set("report.intra_margin", num(report.intra_margin));
  return kv;
}

std::string RunConfig::render() const { return to_kv().render(); }

DistillConfig RunConfig::distill_config() const {
  DistillConfig d;
  d.epochs = distill.epochs;
  d.tau_student = distill.tau_student;
  d.tau_teacher = distill.tau_teacher;
  d.queue_size = distill.queue_size;
  d.batch_size = distill.batch_size;
  d.lr = distill.lr;
  d.sgd_momentum = train.sgd_momentum;
  d.weight_decay = train.weight_decay;
  d.aug = train.aug;
  d.student = train.model;
  return d;
}

std::vector<std::string> RunConfig::violations() const {
  std::vector<std::string> v;
  try {
    data.validate();
  } catch (const Error& e) {
    v.push_back(e.what());
  }
  const std::size_t n_train = data.classes * data.n_per_class;
  for (auto& s : train.violations(n_train)) v.push_back(std::move(s));
  if (eval.k_max % 2 == 0) v.push_back("eval.k_max must be odd");
  if (eval.k_max > n_train) v.push_back("eval.k_max must be <= train split size");
  if (eval.samples_per_class == 0) v.push_back("eval.samples_per_class must be > 0");
  const std::size_t split_per_class = eval.split == Split::validation ? data.val_per_class : data.n_per_class;
  if (eval.samples_per_class > split_per_class) {
    v.push_back("eval.samples_per_class must be <= samples per class in the evaluated split");
  }
  if (eval.samples_per_class < 2) v.push_back("eval.samples_per_class must be >= 2 for intra-class alignment");
  if (!(eval.uniformity_t > 0.0)) v.push_back("eval.uniformity_t must be > 0");
  if (eval.probe.batch == 0) v.push_back("eval.probe_batch must be > 0");
  if (!(eval.probe.lr >= 0.0)) v.push_back("eval.probe_lr must be >= 0");
  if (!(report.alignment_band >= 0.0)) v.push_back("report.alignment_band must be >= 0");
  if (!(report.intra_margin >= 0.0)) v.push_back("report.intra_margin must be >= 0");
  for (auto& s : distill_config().violations(n_train)) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(std::move(s));
  }
  return v;
}

void RunConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg = "invalid config:";
  for (const auto& s : v) msg += "\n  " + s;
  throw Error(ErrorKind::validation, msg);
}

}  // namespace repspace
