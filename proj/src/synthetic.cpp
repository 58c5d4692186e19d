#include "repspace/synthetic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "repspace/error.hpp"

namespace repspace {

namespace {

constexpr int kCenterAttempts = 10000;
constexpr double kJitterTruncation = 3.0;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::validation, what);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void DatasetSpec::validate() const {
  require(classes >= 2, "data.classes must be >= 2");
  require(n_per_class >= 1, "data.n_per_class must be >= 1");
  require(latent_dim >= 2, "data.latent_dim must be >= 2");
  require(ambient_dim >= latent_dim + shortcut_dim, "data.ambient_dim must be >= latent_dim + shortcut_dim");
  require(within_class_sigma > 0.0 && std::isfinite(within_class_sigma), "data.within_class_sigma must be > 0");
  require(shortcut_scale >= 0.0 && std::isfinite(shortcut_scale), "data.shortcut_scale must be >= 0");
  require(min_center_angle_deg >= 0.0 && min_center_angle_deg < 180.0,
          "data.min_center_angle_deg must be in [0, 180)");
}

void AugSpec::validate() const {
  require(jitter_sigma >= 0.0 && std::isfinite(jitter_sigma), "aug.jitter_sigma must be >= 0");
  require(is_probability(shortcut_resample_p), "aug.shortcut_resample_p must be in [0,1]");
  require(is_probability(mask_p), "aug.mask_p must be in [0,1]");
  require(scale_lo > 0.0 && scale_lo <= scale_hi && std::isfinite(scale_hi), "aug.scale range must satisfy 0 < lo <= hi");
}

bool AugSpec::dominates(const AugSpec& o) const {
  return jitter_sigma >= o.jitter_sigma && shortcut_resample_p >= o.shortcut_resample_p && mask_p >= o.mask_p;
}

AugSpec identity_aug() { return AugSpec{"none", 0.0, 0.0, 1.0, 1.0, 0.0}; }

// Weak augmentation: semantic jitter only, shortcut untouched across views.
AugSpec baseline_aug() { return AugSpec{"baseline", 0.10, 0.0, 0.9, 1.1, 0.0}; }

// Strengthened augmentation: most shortcut coordinates redrawn per view.
AugSpec strong_aug() { return AugSpec{"aug+", 0.12, 0.9, 0.9, 1.1, 0.02}; }

AugSpec aug_preset(const std::string& name) {
  if (name == "baseline") return baseline_aug();
  if (name == "aug+") return strong_aug();
  if (name == "none") return identity_aug();
  throw Error(ErrorKind::validation, "unknown augmentation preset '" + name + "'");
}

std::vector<double> Dataset::embed(std::span<const double> semantic, std::span<const double> shortcut) const {
  std::vector<double> out(spec_.ambient_dim, 0.0);
  const std::size_t ld = spec_.latent_dim;
  for (std::size_t a = 0; a < spec_.ambient_dim; ++a) {
    auto row = basis_.row(a);
    double s = 0.0;
    for (std::size_t j = 0; j < ld; ++j) s += row[j] * semantic[j];
    for (std::size_t j = 0; j < shortcut.size(); ++j) s += row[ld + j] * shortcut[j];
    out[a] = s;
  }
  return out;
}

Matrix Dataset::features(Split s) const {
  const auto& samples = split(s);
  Matrix m(samples.size(), spec_.ambient_dim);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::copy(samples[i].features.begin(), samples[i].features.end(), m.row(i).begin());
  }
  return m;
}

std::vector<std::uint32_t> Dataset::labels(Split s) const {
  std::vector<std::uint32_t> out;
  for (const auto& x : split(s)) out.push_back(x.label);
  return out;
}

std::uint32_t Dataset::nearest_center(std::span<const double> semantic) const {
  const double norm = std::sqrt(squared_norm(semantic));
  std::uint32_t best = 0;
  double best_cos = -2.0;
  for (std::size_t c = 0; c < centers_.rows(); ++c) {
    const double cs = norm > 0.0 ? dot(centers_.row(c), semantic) / norm : 0.0;
    if (cs > best_cos) {
      best_cos = cs;
      best = static_cast<std::uint32_t>(c);
    }
  }
  return best;
}

namespace {

Matrix draw_centers(const DatasetSpec& spec, Rng& rng) {
  const double max_cos = std::cos(spec.min_center_angle_deg * std::numbers::pi / 180.0);
  Matrix centers(spec.classes, spec.latent_dim);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < kCenterAttempts && !placed; ++attempt) {
      std::vector<double> v(spec.latent_dim);
      for (double& x : v) x = rng.normal();
      if (squared_norm(v) == 0.0) continue;
      v = l2_normalize(v);
      placed = true;
      for (std::size_t p = 0; p < c && placed; ++p) {
        if (dot(centers.row(p), v) > max_cos) placed = false;
      }
      if (placed) std::copy(v.begin(), v.end(), centers.row(c).begin());
    }
    if (!placed) {
      throw Error(ErrorKind::invalid_argument,
                  "generate: cannot place " + std::to_string(spec.classes) + " centers in latent_dim " +
                      std::to_string(spec.latent_dim) + " with min angle " +
                      std::to_string(spec.min_center_angle_deg) + " deg");
    }
  }
  return centers;
}

// Gram-Schmidt on a Gaussian matrix: ambient x k with orthonormal columns.
Matrix draw_basis(std::size_t ambient, std::size_t k, Rng& rng) {
  Matrix cols(k, ambient);  // one candidate column per row, transposed at the end
  for (std::size_t j = 0; j < k; ++j) {
    for (;;) {
      auto v = cols.row(j);
      for (double& x : v) x = rng.normal();
      for (std::size_t p = 0; p < j; ++p) {
        const double proj = dot(cols.row(p), v);
        auto q = cols.row(p);
        for (std::size_t i = 0; i < ambient; ++i) v[i] -= proj * q[i];
      }
      const double norm = std::sqrt(squared_norm(v));
      if (norm > 1e-8) {
        for (double& x : v) x /= norm;
        break;
      }
    }
  }
  return transpose(cols);
}

}  // namespace

Dataset generate(const DatasetSpec& spec) {
  spec.validate();
  Dataset d;
  d.spec_ = spec;
  Rng center_rng(derive_seed(spec.seed, "centers"));
  d.centers_ = draw_centers(spec, center_rng);
  Rng basis_rng(derive_seed(spec.seed, "basis"));
  d.basis_ = draw_basis(spec.ambient_dim, spec.latent_dim + spec.shortcut_dim, basis_rng);

  std::uint64_t next_id = 0;
  auto fill = [&](std::vector<Sample>& out, std::size_t per_class, std::string_view tag) {
    Rng rng(derive_seed(spec.seed, tag));
    out.reserve(per_class * spec.classes);
    for (std::size_t c = 0; c < spec.classes; ++c) {
      for (std::size_t i = 0; i < per_class; ++i) {
        Sample s;
        s.label = static_cast<std::uint32_t>(c);
        s.instance_id = next_id++;
        s.semantic.resize(spec.latent_dim);
        for (std::size_t j = 0; j < spec.latent_dim; ++j) {
          s.semantic[j] = d.centers_(c, j) + spec.within_class_sigma * rng.normal();
        }
        s.shortcut.resize(spec.shortcut_dim);
        for (double& x : s.shortcut) x = spec.shortcut_scale * rng.normal();
        s.features = d.embed(s.semantic, s.shortcut);
        out.push_back(std::move(s));
      }
    }
  };
  fill(d.train_, spec.n_per_class, "train");
  fill(d.validation_, spec.val_per_class, "validation");
  return d;
}

View augment(const Dataset& data, const Sample& x, const AugSpec& aug, Rng& rng) {
  View v{x.semantic, x.shortcut, {}};
  const double scale = aug.scale_lo == aug.scale_hi ? aug.scale_lo : rng.uniform(aug.scale_lo, aug.scale_hi);
  for (double& s : v.semantic) {
    if (aug.jitter_sigma > 0.0) {
      const double z = std::clamp(rng.normal(), -kJitterTruncation, kJitterTruncation);
      s += aug.jitter_sigma * z;
    }
    s *= scale;
  }
  const double shortcut_scale = data.spec().shortcut_scale;
  for (double& s : v.shortcut) {
    if (aug.shortcut_resample_p > 0.0 && rng.bernoulli(aug.shortcut_resample_p)) {
      s = shortcut_scale * rng.normal();
    }
  }
  if (aug.mask_p > 0.0) {
    for (double& s : v.semantic) {
      if (rng.bernoulli(aug.mask_p)) s = 0.0;
    }
    for (double& s : v.shortcut) {
      if (rng.bernoulli(aug.mask_p)) s = 0.0;
    }
  }
  v.features = data.embed(v.semantic, v.shortcut);
  return v;
}

std::pair<View, View> positive_pair(const Dataset& data, const Sample& x, const AugSpec& aug, Rng& rng) {
  View a = augment(data, x, aug, rng);
  View b = augment(data, x, aug, rng);
  return {std::move(a), std::move(b)};
}

std::string dataset_checksum(const Dataset& data) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  auto feed = [&](double x) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xFF;
      h *= 0x100000001B3ULL;
    }
  };
  for (auto s : {Split::train, Split::validation}) {
    for (const auto& x : data.split(s)) {
      for (double f : x.features) feed(f);
      feed(static_cast<double>(x.label));
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace repspace
