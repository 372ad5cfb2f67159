#include "guru/experiments.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "guru/error.hpp"
#include "guru/parallel.hpp"
#include "guru/trainer_multiclass.hpp"

namespace guru {

namespace {

constexpr std::pair<Algo, std::string_view> kAlgoNames[] = {
    {Algo::Guru, "guru"},       {Algo::KenGuru, "ken-guru"}, {Algo::MGuru, "m-guru"},
    {Algo::MGuruS2, "m-guru-s2"}, {Algo::Asvc, "asvc"},        {Algo::Svm, "svm"},
};

}  // namespace

std::string to_string(Algo algo) {
  for (const auto& [a, name] : kAlgoNames) {
    if (a == algo) return std::string(name);
  }
  return "unknown";
}

Algo parse_algo(std::string_view name) {
  for (const auto& [a, n] : kAlgoNames) {
    if (n == name) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

TrainedModel train_model(const Dataset& data, const TrainSettings& s) {
  const std::string tag = to_string(s.algo);
  switch (s.algo) {
    case Algo::Guru:
    case Algo::Svm: {
      TrainReport r = s.algo == Algo::Guru ? train_guru(data, s.sigma, s.cfg)
                                           : train_baseline_svm(data, s.lambda, s.cfg);
      return {{tag, std::move(r.final_model)}, std::move(r.objective_trace), r.iterations_run,
              r.converged};
    }
    case Algo::KenGuru: {
      KernelTrainReport r = train_ken_guru(data, s.kernel, s.sigma, s.cfg);
      return {{tag, std::move(r.model)}, std::move(r.objective_trace), r.iterations_run,
              r.converged};
    }
    case Algo::MGuru:
    case Algo::MGuruS2: {
      MulticlassTrainReport r = s.algo == Algo::MGuru ? train_m_guru(data, s.sigma, s.cfg)
                                                      : train_m_guru_s2(data, s.sigma, s.cfg);
      return {{tag, std::move(r.final_model)}, std::move(r.objective_trace), r.iterations_run,
              r.converged};
    }
    case Algo::Asvc: {
      AsvcReport r = train_asvc_report(data, s.delta, s.lambda, s.asvc_rounds, s.cfg);
      std::vector<ObjectivePoint> trace;
      for (std::size_t i = 0; i < r.round_objectives.size(); ++i) {
        trace.push_back({i + 1, r.round_objectives[i]});
      }
      return {{tag, std::move(r.model)}, std::move(trace), r.rounds_run, r.converged};
    }
  }
  throw std::invalid_argument("unknown algorithm");
}

double model_accuracy(const AnyModel& model, const Dataset& data) {
  if (const auto* lin = std::get_if<LinearModel>(&model)) {
    if (data.task() != TaskType::Binary) throw DataError("binary model on a multiclass dataset");
    return accuracy(lin->w(), data);
  }
  if (const auto* mc = std::get_if<MulticlassModel>(&model)) {
    if (data.task() != TaskType::Multiclass) throw DataError("multiclass model on a binary dataset");
    return multiclass_accuracy(*mc, data);
  }
  const auto& km = std::get<KernelModel>(model);
  if (data.task() != TaskType::Binary) throw DataError("kernel model on a multiclass dataset");
  if (data.empty()) throw DataError("accuracy of an empty dataset");
  const Vector d = kernel_predict_batch(km, data.samples());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) hits += (d[i] >= 0.0 ? 1 : -1) == data.y(i) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

double model_norm(const AnyModel& model) {
  if (const auto* lin = std::get_if<LinearModel>(&model)) return lin->norm();
  if (const auto* mc = std::get_if<MulticlassModel>(&model)) {
    double s = 0.0;
    for (const Vector& w : mc->weights()) s += squared_norm(w);
    return std::sqrt(s);
  }
  return std::get<KernelModel>(model).nu();
}

// ---------------------------------------------------------------------------

std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::Sigma:
      return "sigma";
    case SweepParameter::Lambda:
      return "lambda";
    case SweepParameter::Eta0:
      return "eta0";
  }
  return "unknown";
}

SweepParameter parse_sweep_parameter(std::string_view name) {
  for (SweepParameter p : {SweepParameter::Sigma, SweepParameter::Lambda, SweepParameter::Eta0}) {
    if (name == to_string(p)) return p;
  }
  throw std::invalid_argument("unknown sweep parameter '" + std::string(name) + "'");
}

void GeometricGrid::validate() const {
  if (!(base > 1.0) || !std::isfinite(base)) throw std::invalid_argument("grid base must be > 1");
  if (min_exp > max_exp) throw std::invalid_argument("grid min_exp must not exceed max_exp");
}

std::vector<double> GeometricGrid::values() const {
  validate();
  std::vector<double> v;
  for (int e = min_exp; e <= max_exp; ++e) v.push_back(std::pow(base, e));
  return v;
}

SweepResult run_sweep(const Dataset& train, const Dataset& cv, const EvaluationSet& test,
                      const TrainSettings& base, const SweepSpec& spec, std::size_t workers) {
  const std::vector<double> grid = spec.grid.values();
  std::vector<std::unique_ptr<TrainedModel>> models(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t g) {
    TrainSettings s = base;
    switch (spec.parameter) {
      case SweepParameter::Sigma:
        s.sigma = grid[g];
        break;
      case SweepParameter::Lambda:
        s.lambda = grid[g];
        break;
      case SweepParameter::Eta0:
        s.cfg.eta0 = grid[g];
        break;
    }
    models[g] = std::make_unique<TrainedModel>(train_model(train, s));
  });

  std::vector<SweepRow> rows;
  std::size_t selected = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const AnyModel& m = models[g]->saved.model;
    rows.push_back({grid[g], model_accuracy(m, cv), std::nullopt, model_norm(m)});
    if (rows[g].cv_accuracy > rows[selected].cv_accuracy) selected = g;
  }
  rows[selected].test_accuracy = test.accuracy(models[selected]->saved.model);
  return {std::move(rows), selected, std::move(*models[selected])};
}

// ---------------------------------------------------------------------------

std::uint64_t noise_seed(std::uint64_t seed, std::size_t g, std::size_t r) {
  // splitmix64 finalizer over the combined key
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (1 + (static_cast<std::uint64_t>(g) << 32) +
                                                     static_cast<std::uint64_t>(r));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<NoisePoint> noise_curve(const AnyModel& model, const Dataset& eval,
                                    const NoiseCurveSpec& spec, std::size_t workers) {
  if (spec.repeats < 1) throw std::invalid_argument("repeat count must be at least 1");
  for (double x : spec.grid) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("noise grid values must be >= 0");
  }
  const std::size_t jobs = spec.grid.size() * spec.repeats;
  std::vector<double> acc(jobs);
  parallel_for(jobs, workers, [&](std::size_t j) {
    const std::size_t g = j / spec.repeats;
    const std::size_t r = j % spec.repeats;
    acc[j] = model_accuracy(model, inject_uniform_noise(eval, spec.grid[g], noise_seed(spec.seed, g, r)));
  });
  std::vector<NoisePoint> curve;
  for (std::size_t g = 0; g < spec.grid.size(); ++g) {
    // Offsets from the first repeat keep a constant series exact.
    const double first = acc[g * spec.repeats];
    double offset = 0.0;
    for (std::size_t r = 0; r < spec.repeats; ++r) offset += acc[g * spec.repeats + r] - first;
    const double mean = first + offset / static_cast<double>(spec.repeats);
    double var = 0.0;
    for (std::size_t r = 0; r < spec.repeats; ++r) {
      const double d = acc[g * spec.repeats + r] - mean;
      var += d * d;
    }
    var /= static_cast<double>(spec.repeats);
    curve.push_back({spec.grid[g], mean, std::sqrt(var)});
  }
  return curve;
}

}  // namespace guru
