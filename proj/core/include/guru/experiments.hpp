#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "guru/data_io.hpp"
#include "guru/model_io.hpp"
#include "guru/trainer_kernel.hpp"
#include "guru/trainer_linear.hpp"

namespace guru {

enum class Algo { Guru, KenGuru, MGuru, MGuruS2, Asvc, Svm };

std::string to_string(Algo algo);
Algo parse_algo(std::string_view name);

struct TrainSettings {
  Algo algo = Algo::Guru;
  double sigma = 1.0;
  double lambda = 1.0;
  double delta = 0.1;
  std::size_t asvc_rounds = 10;
  KernelSpec kernel;
  TrainConfig cfg;
};

struct TrainedModel {
  SavedModel saved;
  std::vector<ObjectivePoint> trace;
  std::size_t iterations_run = 0;
  bool converged = false;
};

TrainedModel train_model(const Dataset& data, const TrainSettings& settings);

/// Fraction of correctly labelled samples for any model kind.
double model_accuracy(const AnyModel& model, const Dataset& data);

/// ||w|| for linear models, nu for kernel models, sqrt(sum_c ||w_c||^2) for multiclass.
double model_norm(const AnyModel& model);

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepParameter { Sigma, Lambda, Eta0 };

std::string to_string(SweepParameter p);
SweepParameter parse_sweep_parameter(std::string_view name);

/// base^e for e = min_exp..max_exp.
struct GeometricGrid {
  double base = 2.0;
  int min_exp = -6;
  int max_exp = 6;

  void validate() const;
  std::vector<double> values() const;
};

struct SweepSpec {
  SweepParameter parameter = SweepParameter::Sigma;
  GeometricGrid grid;
};

/// Read access to a held-out split. The sweep calls accuracy() once.
class EvaluationSet {
 public:
  virtual ~EvaluationSet() = default;
  virtual double accuracy(const AnyModel& model) const = 0;
};

class DatasetEvaluation final : public EvaluationSet {
 public:
  explicit DatasetEvaluation(const Dataset& data) : data_(data) {}
  double accuracy(const AnyModel& model) const override { return model_accuracy(model, data_); }

 private:
  const Dataset& data_;
};

struct SweepRow {
  double param = 0.0;
  double cv_accuracy = 0.0;
  std::optional<double> test_accuracy;  // selected row only
  double final_norm = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // grid order
  std::size_t selected = 0;
  TrainedModel best;
};

/// Trains one model per grid point (concurrently, up to `workers`), selects
/// the best cv accuracy with ties going to the smaller parameter, and
/// evaluates only that model on `test`.
SweepResult run_sweep(const Dataset& train, const Dataset& cv, const EvaluationSet& test,
                      const TrainSettings& base, const SweepSpec& spec, std::size_t workers);

// ---------------------------------------------------------------------------
// Noise resistance

struct NoiseCurveSpec {
  std::vector<double> grid;
  std::size_t repeats = 20;
  std::uint64_t seed = 1;
};

struct NoisePoint {
  double x = 0.0;
  double mean_accuracy = 0.0;
  double std = 0.0;  // population standard deviation over repeats
};

/// Noise draws depend only on (seed, grid index, repeat), so every model is
/// scored on the same perturbed copies.
std::vector<NoisePoint> noise_curve(const AnyModel& model, const Dataset& eval,
                                    const NoiseCurveSpec& spec, std::size_t workers);

/// Seed of the perturbed copy for grid point g, repeat r.
std::uint64_t noise_seed(std::uint64_t seed, std::size_t g, std::size_t r);

}  // namespace guru
