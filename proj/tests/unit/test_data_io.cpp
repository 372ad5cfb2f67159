#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>
#include <sstream>

#include "guru/data_io.hpp"
#include "guru/error.hpp"
#include "guru/rng.hpp"
#include "guru/trainer_linear.hpp"
#include "oracles.hpp"

namespace guru {
namespace {

Dataset parse(const std::string& text, LibsvmOptions opts = {}) {
  std::istringstream in(text);
  return read_libsvm(in, "mem", opts);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

TEST(Libsvm, ParsesSparseLines) {
  const Dataset d = parse("+1 1:1.0 3:2.0\n-1 2:0.5\n");
  EXPECT_EQ(d.dim(), 3u);
  EXPECT_EQ(d.size(), 2u);
  EXPECT_EQ(d.x(0)[0], 1.0);
  EXPECT_EQ(d.x(0)[1], 0.0);
  EXPECT_EQ(d.x(0)[2], 2.0);
  EXPECT_EQ(d.y(0), 1);
  EXPECT_EQ(d.y(1), -1);
  EXPECT_EQ(d.task(), TaskType::Binary);
}

TEST(Libsvm, LabelConventions) {
  const Dataset zero = parse("0 1:1\n1 1:2\n");
  EXPECT_EQ(zero.labels(), (std::vector<int>{-1, 1}));
  const Dataset multi = parse("1 1:1\n3 1:2\n2 2:1\n");
  EXPECT_EQ(multi.task(), TaskType::Multiclass);
  EXPECT_EQ(multi.num_classes(), 3);
  EXPECT_EQ(multi.labels(), (std::vector<int>{1, 3, 2}));
  EXPECT_NE(error_of("-1 1:1\n3 1:2\n").find("inconsistent label arity"), std::string::npos);
  EXPECT_THROW(parse("1 1:1\n0 1:2\n", {LabelMode::Multiclass, 0}), DataError);
  EXPECT_THROW(parse("1 1:1\n2 1:2\n", {LabelMode::Binary, 0}), DataError);
  EXPECT_THROW(parse("1.5 1:1\n"), DataError);
}

TEST(Libsvm, CommentsBlankLinesAndMinDim) {
  const Dataset d = parse("# header\n\n+1 1:1 # trailing\n", {LabelMode::Auto, 4});
  EXPECT_EQ(d.size(), 1u);
  EXPECT_EQ(d.dim(), 4u);
}

TEST(Libsvm, Errors) {
  EXPECT_NE(error_of("").find("no samples"), std::string::npos);
  EXPECT_NE(error_of("# only a comment\n").find("no samples"), std::string::npos);
  const std::string dup = error_of("+1 1:1\n-1 2:1 2:3\n");
  EXPECT_NE(dup.find("duplicate"), std::string::npos);
  EXPECT_NE(dup.find(":2:"), std::string::npos);
  EXPECT_NE(error_of("+1 0:1\n").find(":1:"), std::string::npos);
  EXPECT_NE(error_of("+1 1:1\nabc 1:1\n").find(":2:"), std::string::npos);
  EXPECT_NE(error_of("+1 1:nan\n").find("bad feature value"), std::string::npos);
  EXPECT_NE(error_of("+1 11\n").find("expected idx:val"), std::string::npos);
  EXPECT_THROW(load_libsvm("/nonexistent/file.libsvm"), DataError);
}

TEST(Libsvm, RoundTripIsLossless) {
  Rng rng(3);
  std::vector<Vector> xs;
  std::vector<int> ys;
  for (int i = 0; i < 50; ++i) {
    Vector x(5);
    for (double& v : x) v = rng.uniform01() < 0.3 ? 0.0 : rng.normal() * std::pow(10.0, rng.uniform(-8, 8));
    x[4] = 1.0;  // keep the dimension visible on every line
    xs.push_back(x);
    ys.push_back(i % 2 ? 1 : -1);
  }
  const Dataset d("rt", xs, ys, TaskType::Binary);
  const auto path = std::filesystem::temp_directory_path() / "guru_roundtrip.libsvm";
  save_libsvm(d, path);
  const Dataset back = load_libsvm(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.samples(), d.samples());
  EXPECT_EQ(back.labels(), d.labels());

  const Dataset mc("mc", {{1.5, 0.0}, {0.0, -2.0}}, {2, 3}, TaskType::Multiclass, 3);
  std::stringstream ss;
  write_libsvm(mc, ss);
  const Dataset mc_back = read_libsvm(ss, "mc", {LabelMode::Multiclass, 2});
  EXPECT_EQ(mc_back.samples(), mc.samples());
  EXPECT_EQ(mc_back.labels(), mc.labels());
}

TEST(DatasetInvariants, Validation) {
  EXPECT_THROW(Dataset("x", {{1.0}, {1.0, 2.0}}, {1, 1}, TaskType::Binary), DimensionError);
  EXPECT_THROW(Dataset("x", {{1.0}}, {2}, TaskType::Binary), DataError);
  EXPECT_THROW(Dataset("x", {{INFINITY}}, {1}, TaskType::Binary), DataError);
  EXPECT_THROW(Dataset("x", {{1.0}}, {1, 1}, TaskType::Binary), DataError);
  EXPECT_THROW(Dataset("x", {{1.0}}, {0}, TaskType::Multiclass), DataError);
  EXPECT_THROW(Dataset("x", {{1.0}}, {4}, TaskType::Multiclass, 3), DataError);
}

TEST(Splits, PartitionAndDeterminism) {
  std::vector<Vector> xs;
  std::vector<int> ys;
  for (int i = 0; i < 100; ++i) {
    xs.push_back({static_cast<double>(i)});
    ys.push_back(i % 2 ? 1 : -1);
  }
  const Dataset d("d", xs, ys, TaskType::Binary);
  const SplitSpec spec{0.5, 0.25, 0.25, 9};
  const Splits a = split_dataset(d, spec);
  const Splits b = split_dataset(d, spec);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.train.size() + a.cv.size() + a.test.size(), 100u);
  EXPECT_EQ(a.train.size(), 50u);
  std::set<double> seen;
  for (const Dataset* part : {&a.train, &a.cv, &a.test}) {
    for (const auto& x : part->samples()) EXPECT_TRUE(seen.insert(x[0]).second);
  }
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_NE(split_dataset(d, {0.5, 0.25, 0.25, 10}).train, a.train);
  EXPECT_THROW(split_dataset(d, {0.5, 0.5, 0.5, 1}), std::invalid_argument);
  EXPECT_THROW(split_dataset(d, {1.0, 0.0, 0.0, 1}), std::invalid_argument);
}

TEST(GaussianToy, DeterministicAndShaped) {
  for (ToyKind k : {ToyKind::TwoGauss, ToyKind::NarrowWithOutliers, ToyKind::ThreeGauss,
                    ToyKind::FourGauss}) {
    const Splits a = gen_gaussian_toy(k, 60, 4);
    const Splits b = gen_gaussian_toy(k, 60, 4);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.cv, b.cv);
    EXPECT_EQ(a.test, b.test);
    EXPECT_NE(a.train, a.cv);
    EXPECT_EQ(a.train.dim(), 2u);
    EXPECT_EQ(a.test.size(), 60u);
    EXPECT_EQ(parse_toy_kind(to_string(k)), k);
  }
  EXPECT_THROW(gen_gaussian_toy(ToyKind::TwoGauss, 9, 1), std::invalid_argument);
  EXPECT_THROW(parse_toy_kind("five_gauss"), std::invalid_argument);
}

TEST(GaussianToy, EveryClassPresentInEverySplit) {
  for (ToyKind k : {ToyKind::ThreeGauss, ToyKind::FourGauss}) {
    const Splits s = gen_gaussian_toy(k, 30, 2);
    const int classes = k == ToyKind::ThreeGauss ? 3 : 4;
    for (const Dataset* part : {&s.train, &s.cv, &s.test}) {
      EXPECT_EQ(part->num_classes(), classes);
      std::set<int> labels(part->labels().begin(), part->labels().end());
      EXPECT_EQ(labels.size(), static_cast<std::size_t>(classes));
    }
  }
}

TEST(GaussianToy, TwoGaussBayesAccuracy) {
  // Means +-(o, o) with identity covariance: the Bayes rule is sign(x1 + x2)
  // and its accuracy is cdf(o * sqrt(2)).
  const double bayes = oracle::normal_cdf(toy::kTwoGaussOffset * std::numbers::sqrt2);
  EXPECT_NEAR(bayes, 0.925, 1e-12);
  const Splits s = gen_gaussian_toy(ToyKind::TwoGauss, 200, 1);
  const double empirical = accuracy(Vector{1.0, 1.0}, s.test);
  EXPECT_GE(empirical, 0.88);
  EXPECT_LE(empirical, 0.97);
}

TEST(RadialRing, LabelsFollowDistanceRule) {
  const Dataset ring = gen_radial_ring(500, 7);
  EXPECT_EQ(ring.size(), 500u);
  int pos = 0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const double r = std::hypot(ring.x(i)[0], ring.x(i)[1]);
    EXPECT_TRUE(r < 2.0 || r > 3.5) << "r=" << r;
    EXPECT_EQ(ring.y(i), r < 2.0 ? 1 : -1);
    EXPECT_LE(std::abs(ring.x(i)[0]), 7.5);
    EXPECT_LE(std::abs(ring.x(i)[1]), 7.5);
    pos += ring.y(i) > 0;
  }
  EXPECT_GT(pos, 0);
  EXPECT_LT(pos, 500);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Dataset small = gen_radial_ring(10, seed);
    std::set<int> labels(small.labels().begin(), small.labels().end());
    EXPECT_EQ(labels.size(), 2u) << "seed " << seed;
  }
  EXPECT_EQ(gen_radial_ring(50, 3), gen_radial_ring(50, 3));
  EXPECT_THROW(gen_radial_ring(5, 1), std::invalid_argument);
}

TEST(UniformNoise, SupportDeterminismAndMean) {
  const Splits s = gen_gaussian_toy(ToyKind::TwoGauss, 100, 1);
  EXPECT_EQ(inject_uniform_noise(s.test, 0.0, 5), s.test);
  const double x = 0.7;
  const Dataset noisy = inject_uniform_noise(s.test, x, 5);
  EXPECT_EQ(noisy, inject_uniform_noise(s.test, x, 5));
  EXPECT_EQ(noisy.labels(), s.test.labels());
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      const double shift = noisy.x(i)[j] - s.test.x(i)[j];
      EXPECT_LE(std::abs(shift), x);
    }
  }
  // 10^4 coordinate draws: the mean shift has std x / sqrt(3 * 10^4).
  std::vector<Vector> zeros(5000, Vector{0.0, 0.0});
  const Dataset base("z", zeros, std::vector<int>(5000, 1), TaskType::Binary);
  const Dataset shifted = inject_uniform_noise(base, x, 11);
  double sum = 0.0;
  for (const auto& v : shifted.samples()) sum += v[0] + v[1];
  EXPECT_LT(std::abs(sum / 1e4), 3.0 * x / std::sqrt(12.0 * 1e4));
  EXPECT_THROW(inject_uniform_noise(base, -1.0, 1), std::invalid_argument);
}

TEST(MinMaxScaler, MapsTrainingRangeToUnitBox) {
  const Dataset d("d", {{1.0, 5.0}, {3.0, 5.0}, {2.0, 5.0}}, {1, -1, 1}, TaskType::Binary);
  const Dataset scaled = MinMaxScaler::fit(d).apply(d);
  EXPECT_EQ(scaled.x(0)[0], 0.0);
  EXPECT_EQ(scaled.x(1)[0], 1.0);
  EXPECT_EQ(scaled.x(2)[0], 0.5);
  EXPECT_EQ(scaled.x(1)[1], 0.0);  // constant column
}

TEST(ContentHash, SensitiveToValuesAndLabels) {
  const Dataset a("a", {{1.0, 2.0}}, {1}, TaskType::Binary);
  const Dataset b("b", {{1.0, 2.0}}, {1}, TaskType::Binary);
  const Dataset c("c", {{1.0, 2.0000000001}}, {1}, TaskType::Binary);
  const Dataset e("e", {{1.0, 2.0}}, {-1}, TaskType::Binary);
  EXPECT_EQ(content_hash(a), content_hash(b));
  EXPECT_NE(content_hash(a), content_hash(c));
  EXPECT_NE(content_hash(a), content_hash(e));
}

TEST(Rng, PortableStreams) {
  // The engine output is fixed by the standard: the 10000th draw of a
  // default-seeded mt19937_64 is 9981545732273789042.
  std::mt19937_64 ref;
  ref.discard(9999);
  EXPECT_EQ(ref(), 9981545732273789042ULL);
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.uniform_index(7), b.uniform_index(7));
    EXPECT_EQ(a.normal(), b.normal());
  }
  Rng r(1);
  std::vector<int> counts(5, 0);
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < 100000; ++i) {
    ++counts[r.uniform_index(5)];
    const double u = r.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    const double n = r.normal();
    sum += n;
    sq += n * n;
  }
  for (int c : counts) EXPECT_NEAR(c, 20000, 600);
  EXPECT_NEAR(sum / 1e5, 0.0, 0.015);
  EXPECT_NEAR(sq / 1e5, 1.0, 0.02);
}

}  // namespace
}  // namespace guru
