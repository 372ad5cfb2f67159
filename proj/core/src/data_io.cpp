#include "guru/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "guru/error.hpp"
#include "guru/format.hpp"
#include "guru/rng.hpp"

namespace guru {

Dataset::Dataset(std::string name, std::vector<Vector> samples, std::vector<int> labels,
                 TaskType task, int num_classes, std::size_t dim)
    : name_(std::move(name)),
      samples_(std::move(samples)),
      labels_(std::move(labels)),
      task_(task),
      dim_(dim) {
  if (samples_.size() != labels_.size()) {
    throw DataError("dataset '" + name_ + "': " + std::to_string(samples_.size()) +
                    " samples but " + std::to_string(labels_.size()) + " labels");
  }
  if (!samples_.empty()) dim_ = samples_.front().size();
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (samples_[i].size() != dim_) {
      throw DimensionError("dataset '" + name_ + "': sample " + std::to_string(i) +
                           " has dimension " + std::to_string(samples_[i].size()) +
                           ", expected " + std::to_string(dim_));
    }
    if (!all_finite(samples_[i])) {
      throw DataError("dataset '" + name_ + "': sample " + std::to_string(i) +
                      " has non-finite features");
    }
  }
  if (task_ == TaskType::Binary) {
    num_classes_ = 2;
    for (int y : labels_) {
      if (y != 1 && y != -1) {
        throw DataError("dataset '" + name_ + "': binary label " + std::to_string(y) +
                        " is not +1 or -1");
      }
    }
  } else {
    int max_label = 0;
    for (int y : labels_) {
      if (y < 1) {
        throw DataError("dataset '" + name_ + "': multiclass label " + std::to_string(y) +
                        " is below 1");
      }
      max_label = std::max(max_label, y);
    }
    num_classes_ = num_classes > 0 ? num_classes : std::max(2, max_label);
    if (num_classes_ < 2) throw DataError("multiclass dataset needs at least 2 classes");
    if (max_label > num_classes_) {
      throw DataError("dataset '" + name_ + "': label " + std::to_string(max_label) +
                      " exceeds class count " + std::to_string(num_classes_));
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices, std::string name) const {
  std::vector<Vector> xs;
  std::vector<int> ys;
  xs.reserve(indices.size());
  ys.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= size()) throw std::out_of_range("subset index out of range");
    xs.push_back(samples_[i]);
    ys.push_back(labels_[i]);
  }
  return {std::move(name), std::move(xs), std::move(ys), task_, num_classes_, dim_};
}

Dataset Dataset::with_samples(std::vector<Vector> samples) const {
  return {name_, std::move(samples), labels_, task_, num_classes_, dim_};
}

void Dataset::require_binary(const char* what) const {
  if (empty()) throw DataError(std::string(what) + ": dataset '" + name_ + "' has no samples");
  if (task_ != TaskType::Binary) {
    throw DataError(std::string(what) + ": dataset '" + name_ + "' is not a binary task");
  }
}

std::uint64_t content_hash(const Dataset& data) {
  std::uint64_t h = 14695981039346656037ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  const std::uint64_t dim = data.dim();
  mix(&dim, sizeof dim);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::int64_t y = data.y(i);
    mix(&y, sizeof y);
    for (double v : data.x(i)) mix(&v, sizeof v);
  }
  return h;
}

// ---------------------------------------------------------------------------

namespace {

struct RawRow {
  double label;
  std::vector<std::pair<std::size_t, double>> features;
};

[[noreturn]] void fail_line(const std::string& name, std::size_t line, const std::string& msg) {
  throw DataError(name + ":" + std::to_string(line) + ": " + msg);
}

}  // namespace

Dataset read_libsvm(std::istream& in, const std::string& name, const LibsvmOptions& options) {
  std::vector<RawRow> rows;
  std::size_t dim = options.min_dim;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream tokens(line);
    std::string tok;
    if (!(tokens >> tok)) continue;
    RawRow row;
    const auto label = parse_double(tok);
    if (!label || !std::isfinite(*label)) fail_line(name, line_no, "bad label '" + tok + "'");
    row.label = *label;
    std::set<std::size_t> seen;
    std::size_t last = 0;
    while (tokens >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) fail_line(name, line_no, "expected idx:val, got '" + tok + "'");
      const auto idx = parse_integer<std::size_t>(std::string_view(tok).substr(0, colon));
      const auto val = parse_double(std::string_view(tok).substr(colon + 1));
      if (!idx || *idx == 0) fail_line(name, line_no, "bad feature index in '" + tok + "'");
      if (!val || !std::isfinite(*val)) fail_line(name, line_no, "bad feature value in '" + tok + "'");
      if (!seen.insert(*idx).second) {
        fail_line(name, line_no, "duplicate feature index " + std::to_string(*idx));
      }
      last = std::max(last, *idx);
      row.features.emplace_back(*idx - 1, *val);
    }
    dim = std::max(dim, last);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(name + ": no samples");

  bool any_binary_only = false;  // saw 0 or -1
  bool any_multi_only = false;   // saw a label >= 2
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double l = rows[i].label;
    if (l != std::floor(l)) throw DataError(name + ": non-integer label " + format_double(l));
    if (l == 0.0 || l == -1.0) {
      any_binary_only = true;
    } else if (l >= 2.0) {
      any_multi_only = true;
    } else if (l != 1.0) {
      throw DataError(name + ": unsupported label " + format_double(l));
    }
  }
  if (any_binary_only && any_multi_only) {
    throw DataError(name + ": inconsistent label arity (binary labels mixed with classes >= 2)");
  }
  TaskType task = any_multi_only ? TaskType::Multiclass : TaskType::Binary;
  if (options.labels == LabelMode::Binary) {
    if (any_multi_only) throw DataError(name + ": multiclass labels in a binary file");
    task = TaskType::Binary;
  } else if (options.labels == LabelMode::Multiclass) {
    if (any_binary_only) throw DataError(name + ": labels 0/-1 are reserved for binary files");
    task = TaskType::Multiclass;
  }

  std::vector<Vector> xs;
  std::vector<int> ys;
  xs.reserve(rows.size());
  ys.reserve(rows.size());
  for (const RawRow& row : rows) {
    Vector x(dim, 0.0);
    for (const auto& [i, v] : row.features) x[i] = v;
    xs.push_back(std::move(x));
    const int l = static_cast<int>(row.label);
    ys.push_back(task == TaskType::Binary ? (l == 1 ? 1 : -1) : l);
  }
  return {name, std::move(xs), std::move(ys), task, 0, dim};
}

Dataset load_libsvm(const std::filesystem::path& path, const LibsvmOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_libsvm(in, path.filename().string(), options);
}

void write_libsvm(const Dataset& data, std::ostream& out) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = data.y(i);
    out << (data.task() == TaskType::Binary && y > 0 ? "+1" : std::to_string(y));
    const auto x = data.x(i);
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] != 0.0) out << ' ' << (j + 1) << ':' << format_double(x[j]);
    }
    out << '\n';
  }
}

void save_libsvm(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_libsvm(data, out);
  if (!out) throw DataError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------

namespace {

template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng.uniform_index(i)]);
  }
}

}  // namespace

Splits split_dataset(const Dataset& data, const SplitSpec& spec) {
  const double fr[3] = {spec.train_fraction, spec.cv_fraction, spec.test_fraction};
  for (double f : fr) {
    if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("split fractions must lie in (0, 1)");
  }
  if (std::abs(fr[0] + fr[1] + fr[2] - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must sum to 1");
  }
  std::vector<std::size_t> idx(data.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(spec.seed);
  shuffle(idx, rng);
  const auto m = static_cast<double>(data.size());
  const auto n_train = static_cast<std::size_t>(std::floor(fr[0] * m));
  const auto n_cv = static_cast<std::size_t>(std::floor(fr[1] * m));
  const std::span<const std::size_t> all(idx);
  return {data.subset(all.subspan(0, n_train), data.name() + "/train"),
          data.subset(all.subspan(n_train, n_cv), data.name() + "/cv"),
          data.subset(all.subspan(n_train + n_cv), data.name() + "/test")};
}

// ---------------------------------------------------------------------------

namespace {

Vector toy_point(ToyKind kind, int label, Rng& rng) {
  using std::numbers::sqrt2;
  switch (kind) {
    case ToyKind::TwoGauss: {
      const double m = label * toy::kTwoGaussOffset;
      const double a = rng.normal();
      const double b = rng.normal();
      return {m + a, m + b};
    }
    case ToyKind::NarrowWithOutliers: {
      const double nx = 1.0 / sqrt2;  // boundary normal (1, 1)/sqrt2, tangent (1, -1)/sqrt2
      const double center = label * toy::kNarrowOffset;
      if (rng.uniform01() < toy::kOutlierFraction) {
        const double a = rng.normal();
        const double b = rng.normal();
        return {center * nx + toy::kOutlierStd * a, center * nx + toy::kOutlierStd * b};
      }
      const double along_normal = center + toy::kNarrowNormalStd * rng.normal();
      const double along_tangent = toy::kNarrowTangentStd * rng.normal();
      return {nx * (along_normal + along_tangent), nx * (along_normal - along_tangent)};
    }
    case ToyKind::ThreeGauss:
    case ToyKind::FourGauss: {
      const bool three = kind == ToyKind::ThreeGauss;
      const double deg = three ? 90.0 + 120.0 * (label - 1) : 45.0 + 90.0 * (label - 1);
      const double rad = deg * std::numbers::pi / 180.0;
      const double a = rng.normal();
      const double b = rng.normal();
      return {toy::kMulticlassRadius * std::cos(rad) + toy::kMulticlassStd * a,
              toy::kMulticlassRadius * std::sin(rad) + toy::kMulticlassStd * b};
    }
  }
  throw std::invalid_argument("unknown toy kind");
}

Dataset toy_split(ToyKind kind, std::size_t n, Rng& rng, const std::string& name) {
  const bool binary = kind == ToyKind::TwoGauss || kind == ToyKind::NarrowWithOutliers;
  const int classes = kind == ToyKind::ThreeGauss ? 3 : (kind == ToyKind::FourGauss ? 4 : 2);
  std::vector<int> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % static_cast<std::size_t>(classes)) + 1;
    ys[i] = binary ? (c == 1 ? 1 : -1) : c;
  }
  shuffle(ys, rng);
  std::vector<Vector> xs;
  xs.reserve(n);
  for (int y : ys) xs.push_back(toy_point(kind, y, rng));
  return {name, std::move(xs), std::move(ys), binary ? TaskType::Binary : TaskType::Multiclass,
          binary ? 0 : classes, 2};
}

}  // namespace

Splits gen_gaussian_toy(ToyKind kind, std::size_t n_per_split, std::uint64_t seed) {
  if (n_per_split < 10) throw std::invalid_argument("n_per_split must be at least 10");
  Rng rng(seed);
  const std::string base = to_string(kind);
  Dataset train = toy_split(kind, n_per_split, rng, base + "/train");
  Dataset cv = toy_split(kind, n_per_split, rng, base + "/cv");
  Dataset test = toy_split(kind, n_per_split, rng, base + "/test");
  return {std::move(train), std::move(cv), std::move(test)};
}

Dataset gen_radial_ring(std::size_t n, std::uint64_t seed, double inner_radius, double outer_min,
                        double box) {
  if (n < 10) throw std::invalid_argument("radial ring needs n >= 10");
  if (!(inner_radius > 0.0 && outer_min > inner_radius && box > outer_min)) {
    throw std::invalid_argument("radial ring needs 0 < inner_radius < outer_min < box");
  }
  Rng rng(seed);
  std::vector<Vector> xs;
  std::vector<int> ys;
  std::size_t positives = 0;
  auto draw = [&](Vector& x, int& y) {
    for (;;) {
      x = {rng.uniform(-box, box), rng.uniform(-box, box)};
      const double r = std::hypot(x[0], x[1]);
      if (r < inner_radius) {
        y = 1;
        return;
      }
      if (r > outer_min) {
        y = -1;
        return;
      }
    }
  };
  Vector x;
  int y = 0;
  while (xs.size() < n) {
    draw(x, y);
    positives += y > 0 ? 1 : 0;
    xs.push_back(x);
    ys.push_back(y);
  }
  // Keep drawing until the missing class shows up, then let it replace the last sample.
  if (positives == 0 || positives == n) {
    const int missing = positives == 0 ? 1 : -1;
    do {
      draw(x, y);
    } while (y != missing);
    xs.back() = x;
    ys.back() = y;
  }
  return {"radial_ring", std::move(xs), std::move(ys), TaskType::Binary, 0, 2};
}

Dataset inject_uniform_noise(const Dataset& data, double magnitude, std::uint64_t seed) {
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
    throw std::invalid_argument("noise magnitude must be finite and non-negative");
  }
  if (magnitude == 0.0) return data;
  Rng rng(seed);
  std::vector<Vector> xs = data.samples();
  for (Vector& x : xs) {
    for (double& v : x) v += rng.uniform(-magnitude, magnitude);
  }
  return data.with_samples(std::move(xs));
}

MinMaxScaler MinMaxScaler::fit(const Dataset& data) {
  if (data.empty()) throw DataError("cannot fit a scaler on an empty dataset");
  MinMaxScaler s;
  s.lo_.assign(data.x(0).begin(), data.x(0).end());
  s.hi_ = s.lo_;
  for (std::size_t i = 1; i < data.size(); ++i) {
    const auto x = data.x(i);
    for (std::size_t j = 0; j < x.size(); ++j) {
      s.lo_[j] = std::min(s.lo_[j], x[j]);
      s.hi_[j] = std::max(s.hi_[j], x[j]);
    }
  }
  return s;
}

Dataset MinMaxScaler::apply(const Dataset& data) const {
  require_same_dim(lo_.size(), data.dim(), "MinMaxScaler::apply");
  std::vector<Vector> xs = data.samples();
  for (Vector& x : xs) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double range = hi_[j] - lo_[j];
      x[j] = range > 0.0 ? (x[j] - lo_[j]) / range : 0.0;
    }
  }
  return data.with_samples(std::move(xs));
}

std::string to_string(ToyKind kind) {
  switch (kind) {
    case ToyKind::TwoGauss:
      return "two_gauss";
    case ToyKind::NarrowWithOutliers:
      return "narrow_outliers";
    case ToyKind::ThreeGauss:
      return "three_gauss";
    case ToyKind::FourGauss:
      return "four_gauss";
  }
  return "unknown";
}

ToyKind parse_toy_kind(std::string_view name) {
  for (ToyKind k : {ToyKind::TwoGauss, ToyKind::NarrowWithOutliers, ToyKind::ThreeGauss,
                    ToyKind::FourGauss}) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown toy kind '" + std::string(name) + "'");
}

}  // namespace guru
