#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "guru/linalg.hpp"

namespace guru {

enum class TaskType { Binary, Multiclass };

/// Immutable labelled sample set. Binary labels are +1/-1, multiclass labels
/// are 1..num_classes().
class Dataset {
 public:
  Dataset() = default;
  /// `num_classes` of 0 means "infer": 2 for binary, the largest label otherwise.
  Dataset(std::string name, std::vector<Vector> samples, std::vector<int> labels, TaskType task,
          int num_classes = 0, std::size_t dim = 0);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  std::size_t dim() const { return dim_; }
  TaskType task() const { return task_; }
  int num_classes() const { return num_classes_; }
  const std::string& name() const { return name_; }

  std::span<const double> x(std::size_t i) const { return samples_[i]; }
  int y(std::size_t i) const { return labels_[i]; }
  const std::vector<Vector>& samples() const { return samples_; }
  const std::vector<int>& labels() const { return labels_; }

  Dataset subset(std::span<const std::size_t> indices, std::string name) const;
  Dataset with_samples(std::vector<Vector> samples) const;

  /// Throws DataError unless the set is a nonempty binary task.
  void require_binary(const char* what) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::string name_;
  std::vector<Vector> samples_;
  std::vector<int> labels_;
  TaskType task_ = TaskType::Binary;
  int num_classes_ = 2;
  std::size_t dim_ = 0;
};

/// 64-bit FNV-1a over dimension, labels and the raw bytes of every feature.
std::uint64_t content_hash(const Dataset& data);

// ---------------------------------------------------------------------------
// LIBSVM text format

enum class LabelMode { Auto, Binary, Multiclass };

struct LibsvmOptions {
  LabelMode labels = LabelMode::Auto;
  /// Dimension floor, for files whose last features are all zero.
  std::size_t min_dim = 0;
};

/// Label rule: 0 and -1 read as -1, +1 as +1, integers >= 2 make the set
/// multiclass (1..C). Mixing {0, -1} with labels >= 2 is an error.
Dataset load_libsvm(const std::filesystem::path& path, const LibsvmOptions& options = {});
Dataset read_libsvm(std::istream& in, const std::string& name, const LibsvmOptions& options = {});

/// Zero features are omitted; values use shortest round-trip formatting.
void save_libsvm(const Dataset& data, const std::filesystem::path& path);
void write_libsvm(const Dataset& data, std::ostream& out);

// ---------------------------------------------------------------------------
// Splits

struct SplitSpec {
  double train_fraction = 1.0 / 3.0;
  double cv_fraction = 1.0 / 3.0;
  double test_fraction = 1.0 / 3.0;
  std::uint64_t seed = 1;
};

struct Splits {
  Dataset train;
  Dataset cv;
  Dataset test;
};

/// Seeded Fisher-Yates shuffle, then floor(f * M) samples for train and cv and
/// the remainder for test.
Splits split_dataset(const Dataset& data, const SplitSpec& spec);

// ---------------------------------------------------------------------------
// Synthetic data

enum class ToyKind { TwoGauss, NarrowWithOutliers, ThreeGauss, FourGauss };

/// Generator constants (2-D, class means symmetric about the origin since the
/// models carry no bias term).
namespace toy {
// Means at +-(a, a) with unit isotropic std; a = cdf_inv(0.925)/sqrt2 puts the
// Bayes accuracy at 0.925.
inline constexpr double kTwoGaussOffset = 1.0179024648320278;
inline constexpr double kNarrowOffset = 1.0;          // distance of each mean from the boundary
inline constexpr double kNarrowNormalStd = 0.3;       // spread across the boundary
inline constexpr double kNarrowTangentStd = 1.5;      // spread along the boundary
inline constexpr double kOutlierFraction = 0.2;
inline constexpr double kOutlierStd = 3.0;
inline constexpr double kMulticlassRadius = 3.0;      // class means on a circle
inline constexpr double kMulticlassStd = 1.0;
}  // namespace toy

/// Three independent splits of n_per_split points each. Classes are balanced
/// (round-robin labels, then shuffled).
Splits gen_gaussian_toy(ToyKind kind, std::size_t n_per_split, std::uint64_t seed);

/// Uniform points on [-box, box]^2: +1 inside inner_radius, -1 beyond
/// outer_min, dropped in between. Returns exactly n kept points with both
/// classes present.
Dataset gen_radial_ring(std::size_t n, std::uint64_t seed, double inner_radius = 2.0,
                        double outer_min = 3.5, double box = 7.5);

/// Adds an independent U(-magnitude, magnitude) draw to every coordinate.
Dataset inject_uniform_noise(const Dataset& data, double magnitude, std::uint64_t seed);

/// Optional per-feature min-max scaling to [0, 1]; constant features map to 0.
class MinMaxScaler {
 public:
  static MinMaxScaler fit(const Dataset& data);
  Dataset apply(const Dataset& data) const;

 private:
  Vector lo_;
  Vector hi_;
};

std::string to_string(ToyKind kind);
ToyKind parse_toy_kind(std::string_view name);

}  // namespace guru
