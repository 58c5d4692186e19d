#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "repspace/matrix.hpp"
#include "repspace/rng.hpp"

namespace repspace {

/// Parameters of the clustered dataset with a per-instance shortcut code.
struct DatasetSpec {
  std::size_t classes = 10;
  std::size_t n_per_class = 100;   // train split
  std::size_t val_per_class = 50;  // validation split
  std::size_t latent_dim = 8;
  std::size_t shortcut_dim = 4;
  std::size_t ambient_dim = 32;
  double within_class_sigma = 0.15;
  double shortcut_scale = 2.0;
  double min_center_angle_deg = 60.0;
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

/// Augmentation family. Semantic coordinates get additive jitter (truncated
/// at +-3 sigma) and a multiplicative scale; shortcut coordinates are
/// independently redrawn with probability shortcut_resample_p; every
/// structured coordinate is zeroed with probability mask_p (the stand-in for
/// blur-like information loss).
struct AugSpec {
  std::string id = "custom";
  double jitter_sigma = 0.0;
  double shortcut_resample_p = 0.0;
  double scale_lo = 1.0;
  double scale_hi = 1.0;
  double mask_p = 0.0;

  void validate() const;
  /// Coordinatewise comparison on (jitter, resample, mask).
  bool dominates(const AugSpec& other) const;
  friend bool operator==(const AugSpec&, const AugSpec&) = default;
};

AugSpec identity_aug();
AugSpec baseline_aug();
AugSpec strong_aug();  // "aug+"
/// Looks up "baseline", "aug+" or "none"; throws for other names.
AugSpec aug_preset(const std::string& name);

struct Sample {
  std::vector<double> semantic;  // latent_dim
  std::vector<double> shortcut;  // shortcut_dim
  std::vector<double> features;  // ambient_dim
  std::uint32_t label = 0;
  std::uint64_t instance_id = 0;
};

enum class Split { train, validation };

class Dataset {
 public:
  const DatasetSpec& spec() const noexcept { return spec_; }
  const Matrix& centers() const noexcept { return centers_; }
  /// ambient_dim x (latent_dim + shortcut_dim), orthonormal columns.
  const Matrix& basis() const noexcept { return basis_; }

  const std::vector<Sample>& split(Split s) const { return s == Split::train ? train_ : validation_; }
  const std::vector<Sample>& train() const noexcept { return train_; }
  const std::vector<Sample>& validation() const noexcept { return validation_; }

  /// Maps structured coordinates into ambient space.
  std::vector<double> embed(std::span<const double> semantic, std::span<const double> shortcut) const;

  /// Feature rows of a split, shape (n, ambient_dim).
  Matrix features(Split s) const;
  std::vector<std::uint32_t> labels(Split s) const;

  /// Nearest class center by cosine in latent space.
  std::uint32_t nearest_center(std::span<const double> semantic) const;

 private:
  friend Dataset generate(const DatasetSpec& spec);
  DatasetSpec spec_;
  Matrix centers_;
  Matrix basis_;
  std::vector<Sample> train_;
  std::vector<Sample> validation_;
};

/// Deterministic in spec.seed. Class centers are unit vectors with pairwise
/// angle >= min_center_angle_deg; throws ErrorKind::invalid_argument if that
/// cannot be met within the resampling budget.
Dataset generate(const DatasetSpec& spec);

/// One augmented view. Returns the ambient features and (optionally) the
/// structured coordinates of the view.
struct View {
  std::vector<double> semantic;
  std::vector<double> shortcut;
  std::vector<double> features;
};
View augment(const Dataset& data, const Sample& x, const AugSpec& aug, Rng& rng);

/// Two independent augment() draws of the same sample.
std::pair<View, View> positive_pair(const Dataset& data, const Sample& x, const AugSpec& aug, Rng& rng);

/// Digest of the generated data, for manifests.
std::string dataset_checksum(const Dataset& data);

}  // namespace repspace
