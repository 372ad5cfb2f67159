#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "guru/csv.hpp"
#include "guru/data_io.hpp"
#include "guru/dual_certify.hpp"
#include "guru/error.hpp"
#include "guru/experiments.hpp"
#include "guru/format.hpp"
#include "guru/model_io.hpp"
#include "guru/parallel.hpp"
#include "guru/trainer_multiclass.hpp"

namespace guru::cli {
namespace {

// Flag values that parse but violate a precondition.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

// ---------------------------------------------------------------------------
// Data selection shared by every command

struct DataOptions {
  std::string data;
  std::string train;
  std::string cv;
  std::string test;
  std::string train_data;  // kernel models saved without samples
  std::string toy;
  std::size_t toy_n = 200;
  std::uint64_t toy_seed = 1;
  std::uint64_t split_seed = 1;
  std::string split = "test";
  bool scale = false;

  void add_to(CLI::App& app, bool with_split) {
    app.add_option("--data", data, "LIBSVM file");
    app.add_option("--train", train, "LIBSVM training split");
    app.add_option("--cv", cv, "LIBSVM cross-validation split");
    app.add_option("--test", test, "LIBSVM test split");
    app.add_option("--toy", toy,
                   "synthetic data: two_gauss, narrow_outliers, three_gauss, four_gauss, "
                   "radial_ring");
    app.add_option("--toy-n", toy_n, "points per synthetic split")->capture_default_str();
    app.add_option("--toy-seed", toy_seed, "synthetic data seed")->capture_default_str();
    app.add_option("--split-seed", split_seed, "seed for splitting --data into thirds")
        ->capture_default_str();
    app.add_flag("--scale", scale, "min-max scale features (fit on the training split)");
    if (with_split) {
      app.add_option("--split", split, "split to evaluate: train, cv or test")
          ->check(CLI::IsMember({"train", "cv", "test"}))
          ->capture_default_str();
    }
  }

  int sources() const {
    return (!data.empty() ? 1 : 0) + (!toy.empty() ? 1 : 0) +
           ((!train.empty() || !cv.empty() || !test.empty()) ? 1 : 0);
  }
};

Splits generate_toy(const DataOptions& o) {
  require(o.toy_n >= 10, "--toy-n must be at least 10");
  if (o.toy == "radial_ring") {
    return {gen_radial_ring(o.toy_n, o.toy_seed), gen_radial_ring(o.toy_n, o.toy_seed + 1),
            gen_radial_ring(o.toy_n, o.toy_seed + 2)};
  }
  ToyKind kind;
  try {
    kind = parse_toy_kind(o.toy);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return gen_gaussian_toy(kind, o.toy_n, o.toy_seed);
}

Dataset load_aligned(const std::string& path, std::size_t min_dim) {
  LibsvmOptions opts;
  opts.min_dim = min_dim;
  return load_libsvm(path, opts);
}

void apply_scaling(const DataOptions& o, Splits& s) {
  if (!o.scale) return;
  const MinMaxScaler scaler = MinMaxScaler::fit(s.train);
  s.train = scaler.apply(s.train);
  if (!s.cv.empty()) s.cv = scaler.apply(s.cv);
  if (!s.test.empty()) s.test = scaler.apply(s.test);
}

// Three splits. --data is cut into thirds with --split-seed.
Splits load_splits(const DataOptions& o) {
  require(o.sources() == 1, "choose exactly one data source: --data, --toy or --train/--cv/--test");
  Splits s;
  if (!o.toy.empty()) {
    s = generate_toy(o);
  } else if (!o.data.empty()) {
    s = split_dataset(load_libsvm(o.data), SplitSpec{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, o.split_seed});
  } else {
    require(!o.train.empty() && !o.cv.empty() && !o.test.empty(),
            "--train, --cv and --test must be given together");
    s.train = load_libsvm(o.train);
    s.cv = load_aligned(o.cv, s.train.dim());
    s.test = load_aligned(o.test, s.train.dim());
    if (s.cv.dim() != s.train.dim() || s.test.dim() != s.train.dim()) {
      throw DataError("cv/test files have features beyond the training dimension");
    }
  }
  apply_scaling(o, s);
  return s;
}

// Training set: --data whole, --train, or the toy training split.
Dataset load_training(const DataOptions& o) {
  if (!o.toy.empty()) {
    require(o.data.empty() && o.train.empty(), "choose one data source");
    Splits s = generate_toy(o);
    apply_scaling(o, s);
    return s.train;
  }
  require(o.data.empty() != o.train.empty(), "choose exactly one of --data, --train or --toy");
  Splits s;
  s.train = load_libsvm(o.data.empty() ? o.train : o.data);
  apply_scaling(o, s);
  return s.train;
}

// The evaluation split selected by --split (or the whole --data file).
Dataset load_eval(const DataOptions& o) {
  if (!o.data.empty() && o.toy.empty() && o.train.empty()) {
    Splits s{load_libsvm(o.data), {}, {}};
    if (o.scale) throw UsageError("--scale needs a training split to fit on");
    return s.train;
  }
  Splits s = load_splits(o);
  if (o.split == "train") return s.train;
  if (o.split == "cv") return s.cv;
  return s.test;
}

// ---------------------------------------------------------------------------
// Training flags

struct TrainOptions {
  std::string algo = "guru";
  double sigma = 1.0;
  double lambda = 1.0;
  double delta = 0.1;
  std::size_t rounds = 10;
  std::string kernel = "linear";
  TrainConfig cfg;

  void add_to(CLI::App& app) {
    app.add_option("--algo", algo, "guru, ken-guru, m-guru, m-guru-s2, asvc or svm")
        ->capture_default_str();
    app.add_option("--sigma", sigma, "noise scale (guru family)")->capture_default_str();
    app.add_option("--lambda", lambda, "L2 weight (svm, asvc)")->capture_default_str();
    app.add_option("--delta", delta, "displacement radius (asvc)")->capture_default_str();
    app.add_option("--rounds", rounds, "alternation rounds (asvc)")->capture_default_str();
    app.add_option("--kernel", kernel, "linear, poly:<degree>[:<offset>] or rbf:<gamma>")
        ->capture_default_str();
    app.add_option("--eta0", cfg.eta0, "initial learning rate")->capture_default_str();
    app.add_option("--epsilon", cfg.epsilon, "stopping tolerance")->capture_default_str();
    app.add_option("--max-iters", cfg.max_iters, "iteration cap")->capture_default_str();
    app.add_option("--eval-period", cfg.eval_period, "iterations between objective evaluations")
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "sampling seed")->capture_default_str();
  }

  TrainSettings settings() const {
    TrainSettings s;
    try {
      s.algo = parse_algo(algo);
      s.kernel = KernelSpec::parse(kernel);
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    require(std::isfinite(sigma) && sigma > 0.0, "sigma must be positive");
    require(std::isfinite(lambda) && lambda > 0.0, "lambda must be positive");
    require(std::isfinite(delta) && delta >= 0.0, "delta must be non-negative");
    require(rounds >= 1, "rounds must be at least 1");
    s.sigma = sigma;
    s.lambda = lambda;
    s.delta = delta;
    s.asvc_rounds = rounds;
    s.cfg = cfg;
    return s;
  }
};

std::string echo(const std::vector<std::string>& args) {
  std::string line = "command: guru";
  for (const std::string& a : args) {
    line += ' ';
    line += a.find_first_of(" \t\"") == std::string::npos ? a : "'" + a + "'";
  }
  return line;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path);
  return f;
}

// Writes to `path`, or to `fallback` when path is empty or "-".
template <class Fn>
void with_output(const std::string& path, std::ostream& fallback, Fn fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  std::ofstream f = open_output(path);
  fn(f);
  if (!f) throw DataError("write failed for " + path);
}

SavedModel load_model_for(const std::string& path, const DataOptions& data) {
  if (data.train_data.empty()) return load_model(path);
  const Dataset train = load_libsvm(data.train_data);
  return load_model(path, &train);
}

// ---------------------------------------------------------------------------
// Commands

struct Context {
  const std::vector<std::string>& args;
  std::ostream& out;
  std::ostream& err;
};

int cmd_train(const Context& ctx, const TrainOptions& t, const DataOptions& d,
              const std::string& out_path, std::string report_path, bool no_embed) {
  const TrainSettings settings = t.settings();
  const Dataset data = load_training(d);
  const TrainedModel trained = train_model(data, settings);
  save_model(out_path, trained.saved, !no_embed);
  if (report_path.empty()) report_path = out_path + ".report.csv";
  with_output(report_path, ctx.out, [&](std::ostream& os) {
    CsvWriter csv(os, {"iteration", "objective"},
                  {echo(ctx.args), "iterations_run=" + std::to_string(trained.iterations_run) +
                                       " converged=" + (trained.converged ? "1" : "0")});
    for (const ObjectivePoint& p : trained.trace) {
      csv.row({std::to_string(p.iteration), format_double(p.objective)});
    }
  });
  ctx.out << "trained " << to_string(settings.algo) << " on " << data.size() << " samples: "
          << trained.iterations_run << " iterations, converged=" << (trained.converged ? 1 : 0)
          << ", train accuracy " << format_double(model_accuracy(trained.saved.model, data))
          << '\n';
  return 0;
}

double decision_value(const AnyModel& model, std::span<const double> x) {
  if (const auto* lin = std::get_if<LinearModel>(&model)) return lin->decision(x);
  if (std::holds_alternative<MulticlassModel>(model)) return std::nan("");
  return std::get<KernelModel>(model).decision(x);
}

int predicted_label(const AnyModel& model, std::span<const double> x) {
  if (const auto* mc = std::get_if<MulticlassModel>(&model)) return multiclass_predict(*mc, x);
  return decision_value(model, x) >= 0.0 ? 1 : -1;
}

int cmd_predict(const Context& ctx, const std::string& model_path, const DataOptions& d,
                const std::string& out_path) {
  const SavedModel saved = load_model_for(model_path, d);
  const Dataset data = load_eval(d);
  with_output(out_path, ctx.out, [&](std::ostream& os) {
    CsvWriter csv(os, {"index", "decision", "predicted", "label"}, {echo(ctx.args)});
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double dv = decision_value(saved.model, data.x(i));
      csv.row({std::to_string(i), std::isnan(dv) ? "" : format_double(dv),
               std::to_string(predicted_label(saved.model, data.x(i))),
               std::to_string(data.y(i))});
    }
  });
  return 0;
}

int cmd_evaluate(const Context& ctx, const std::string& model_path, const DataOptions& d) {
  const SavedModel saved = load_model_for(model_path, d);
  const Dataset data = load_eval(d);
  ctx.out << "accuracy " << format_double(model_accuracy(saved.model, data)) << '\n';
  ctx.out << "samples " << data.size() << '\n';
  ctx.out << "norm " << format_double(model_norm(saved.model)) << '\n';
  return 0;
}

int cmd_sweep(const Context& ctx, const TrainOptions& t, const DataOptions& d,
              const std::string& param, const GeometricGrid& grid, std::size_t workers,
              const std::string& out_path, const std::string& model_out) {
  const TrainSettings base = t.settings();
  SweepSpec spec;
  try {
    spec.parameter = parse_sweep_parameter(param);
    spec.grid = grid;
    spec.grid.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  require(workers >= 1, "workers must be at least 1");
  const Splits s = load_splits(d);
  const DatasetEvaluation test(s.test);
  const SweepResult r = run_sweep(s.train, s.cv, test, base, spec, workers);
  const SweepRow& best = r.rows[r.selected];
  with_output(out_path, ctx.out, [&](std::ostream& os) {
    CsvWriter csv(os, {"param", "cv_accuracy", "test_accuracy", "final_norm"},
                  {echo(ctx.args), "parameter=" + to_string(spec.parameter) +
                                       " selected=" + format_double(best.param)});
    for (const SweepRow& row : r.rows) {
      csv.row({format_double(row.param), format_double(row.cv_accuracy),
               row.test_accuracy ? format_double(*row.test_accuracy) : "",
               format_double(row.final_norm)});
    }
  });
  if (!model_out.empty()) save_model(model_out, r.best.saved);
  if (!out_path.empty() && out_path != "-") {
    ctx.out << "selected " << to_string(spec.parameter) << "=" << format_double(best.param)
            << " cv_accuracy " << format_double(best.cv_accuracy) << " test_accuracy "
            << format_double(*best.test_accuracy) << '\n';
  }
  return 0;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto v = parse_double(item);
    require(v && std::isfinite(*v) && *v >= 0.0, "noise grid values must be non-negative numbers");
    grid.push_back(*v);
  }
  require(!grid.empty(), "noise grid is empty");
  return grid;
}

int cmd_noise_curve(const Context& ctx, const std::vector<std::string>& model_paths,
                    const DataOptions& d, const std::string& grid_text, std::size_t repeats,
                    std::uint64_t seed, std::size_t workers, bool both_splits,
                    const std::string& out_path) {
  const std::vector<double> grid = parse_grid(grid_text);
  require(repeats >= 1, "repeats must be at least 1");
  require(workers >= 1, "workers must be at least 1");
  std::vector<SavedModel> models;
  for (const std::string& p : model_paths) models.push_back(load_model_for(p, d));

  std::vector<std::pair<std::string, Dataset>> evals;
  if (both_splits) {
    const Splits s = load_splits(d);
    evals.emplace_back("cv", s.cv);
    evals.emplace_back("test", s.test);
  } else {
    evals.emplace_back(d.split, load_eval(d));
  }
  const NoiseCurveSpec spec{grid, repeats, seed};
  with_output(out_path, ctx.out, [&](std::ostream& os) {
    CsvWriter csv(os, {"model", "algo", "split", "x", "mean_accuracy", "std"}, {echo(ctx.args)});
    for (std::size_t m = 0; m < models.size(); ++m) {
      for (const auto& [name, eval] : evals) {
        for (const NoisePoint& p : noise_curve(models[m].model, eval, spec, workers)) {
          csv.row({model_paths[m], models[m].algo, name, format_double(p.x),
                   format_double(p.mean_accuracy), format_double(p.std)});
        }
      }
    }
  });
  return 0;
}

int cmd_certify(const Context& ctx, const std::string& model_path, const DataOptions& d,
                double sigma, double grad_tol, std::size_t refine_iters, double threshold,
                const std::string& out_path) {
  require(std::isfinite(sigma) && sigma > 0.0, "sigma must be positive");
  require(grad_tol > 0.0, "grad-tol must be positive");
  require(threshold > 0.0, "threshold must be positive");
  const SavedModel saved = load_model_for(model_path, d);
  const auto* lin = std::get_if<LinearModel>(&saved.model);
  require(lin != nullptr, "certification supports linear binary models");
  const Dataset data = load_training(d);
  require(data.task() == TaskType::Binary, "certification supports linear binary models");

  LinearModel model(lin->weights(), sigma);
  std::size_t iterations = 0;
  if (refine_iters > 0) {
    const RefineResult r = batch_refine(data, sigma, model, grad_tol, refine_iters);
    model = r.model;
    iterations = r.iterations;
  }
  const DualCertificate cert = build_certificate(data, model, grad_tol);
  with_output(out_path, ctx.out, [&](std::ostream& os) { write_certificate(cert, data, os); });
  const bool pass = cert.gap_rel < threshold;
  ctx.out << "refine_iterations " << iterations << '\n'
          << "grad_norm " << format_double(cert.grad_norm) << '\n'
          << "gap_rel " << format_double(cert.gap_rel) << '\n'
          << "constraint_lhs " << format_double(cert.constraint_lhs) << '\n'
          << "constraint_rhs " << format_double(cert.constraint_rhs) << '\n'
          << "norm_restoration_max_rel_deviation "
          << format_double(cert.restoration.max_rel_deviation) << '\n'
          << (pass ? "certified" : "NOT certified") << '\n';
  return pass ? 0 : 1;
}

int cmd_gen(const Context& ctx, const DataOptions& d, const std::string& prefix) {
  require(!d.toy.empty(), "--toy is required");
  const Splits s = generate_toy(d);
  save_libsvm(s.train, prefix + ".train.libsvm");
  save_libsvm(s.cv, prefix + ".cv.libsvm");
  save_libsvm(s.test, prefix + ".test.libsvm");
  ctx.out << "wrote " << prefix << ".{train,cv,test}.libsvm\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian-robust linear and kernel classifiers", "guru"};
  app.require_subcommand(1);
  const Context ctx{args, out, err};

  // train
  TrainOptions train_opts;
  DataOptions train_data;
  std::string train_out;
  std::string train_report;
  bool no_embed = false;
  auto* train = app.add_subcommand("train", "train a model and write it with its objective trace");
  train_opts.add_to(*train);
  train_data.add_to(*train, false);
  train->add_option("--out", train_out, "model file")->required();
  train->add_option("--report", train_report, "objective trace CSV (default <out>.report.csv)");
  train->add_flag("--no-embed", no_embed, "kernel models: store only a hash of the samples");

  // predict / evaluate
  std::string predict_model;
  DataOptions predict_data;
  std::string predict_out;
  auto* predict = app.add_subcommand("predict", "write decision values and labels as CSV");
  predict->add_option("--model", predict_model, "model file")->required();
  predict->add_option("--train-data", predict_data.train_data,
                      "training LIBSVM file for kernel models saved without samples");
  predict_data.add_to(*predict, true);
  predict->add_option("--out", predict_out, "CSV path (default stdout)");

  std::string eval_model;
  DataOptions eval_data;
  auto* evaluate = app.add_subcommand("evaluate", "print accuracy on a dataset");
  evaluate->add_option("--model", eval_model, "model file")->required();
  evaluate->add_option("--train-data", eval_data.train_data,
                       "training LIBSVM file for kernel models saved without samples");
  eval_data.add_to(*evaluate, true);

  // sweep
  TrainOptions sweep_opts;
  DataOptions sweep_data;
  std::string sweep_param = "sigma";
  GeometricGrid sweep_grid;
  std::size_t sweep_workers = default_workers();
  std::string sweep_out;
  std::string sweep_model_out;
  auto* sweep = app.add_subcommand("sweep", "grid search with cross-validation selection");
  sweep_opts.add_to(*sweep);
  sweep_data.add_to(*sweep, false);
  sweep->add_option("--param", sweep_param, "sigma, lambda or eta0")->capture_default_str();
  sweep->add_option("--base", sweep_grid.base, "grid base")->capture_default_str();
  sweep->add_option("--min-exp", sweep_grid.min_exp, "smallest exponent")->capture_default_str();
  sweep->add_option("--max-exp", sweep_grid.max_exp, "largest exponent")->capture_default_str();
  sweep->add_option("--workers", sweep_workers, "concurrent grid points (default GURU_WORKERS)");
  sweep->add_option("--out", sweep_out, "CSV path (default stdout)");
  sweep->add_option("--model-out", sweep_model_out, "write the selected model here");

  // noise-curve
  std::vector<std::string> noise_models;
  DataOptions noise_data;
  std::string noise_grid = "0,0.25,0.5,0.75,1,1.25,1.5,1.75,2";
  std::size_t noise_repeats = 20;
  std::uint64_t noise_seed_value = 1;
  std::size_t noise_workers = default_workers();
  bool noise_both = false;
  std::string noise_out;
  auto* noise = app.add_subcommand("noise-curve", "accuracy under uniform feature noise");
  noise->add_option("--model", noise_models, "model file (repeatable)")->required();
  noise->add_option("--train-data", noise_data.train_data,
                    "training LIBSVM file for kernel models saved without samples");
  noise_data.add_to(*noise, true);
  noise->add_option("--grid", noise_grid, "comma separated noise magnitudes")
      ->capture_default_str();
  noise->add_option("--repeats", noise_repeats, "noisy copies per magnitude")->capture_default_str();
  noise->add_option("--seed", noise_seed_value, "noise seed")->capture_default_str();
  noise->add_option("--workers", noise_workers, "concurrent jobs (default GURU_WORKERS)");
  noise->add_flag("--both-splits", noise_both, "evaluate the cv and test splits separately");
  noise->add_option("--out", noise_out, "CSV path (default stdout)");

  // certify
  std::string cert_model;
  DataOptions cert_data;
  double cert_sigma = 0.0;
  double cert_grad_tol = 1e-8;
  std::size_t cert_refine = 100;
  double cert_threshold = 1e-3;
  std::string cert_out;
  auto* certify = app.add_subcommand("certify", "refine a linear model and check its dual certificate");
  certify->add_option("--model", cert_model, "model file")->required();
  cert_data.add_to(*certify, false);
  certify->add_option("--sigma", cert_sigma, "noise scale")->required();
  certify->add_option("--grad-tol", cert_grad_tol, "refinement gradient tolerance")
      ->capture_default_str();
  certify->add_option("--refine-iters", cert_refine, "Newton iterations (0 disables refinement)")
      ->capture_default_str();
  certify->add_option("--threshold", cert_threshold, "gap_rel needed for exit 0")
      ->capture_default_str();
  certify->add_option("--out", cert_out, "certificate CSV (default stdout)");

  // gen
  DataOptions gen_data;
  std::string gen_prefix;
  auto* gen = app.add_subcommand("gen", "write synthetic splits as LIBSVM files");
  gen_data.add_to(*gen, false);
  gen->add_option("--out-prefix", gen_prefix, "output path prefix")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*train) return cmd_train(ctx, train_opts, train_data, train_out, train_report, no_embed);
    if (*predict) return cmd_predict(ctx, predict_model, predict_data, predict_out);
    if (*evaluate) return cmd_evaluate(ctx, eval_model, eval_data);
    if (*sweep) {
      return cmd_sweep(ctx, sweep_opts, sweep_data, sweep_param, sweep_grid, sweep_workers,
                       sweep_out, sweep_model_out);
    }
    if (*noise) {
      return cmd_noise_curve(ctx, noise_models, noise_data, noise_grid, noise_repeats,
                             noise_seed_value, noise_workers, noise_both, noise_out);
    }
    if (*certify) {
      return cmd_certify(ctx, cert_model, cert_data, cert_sigma, cert_grad_tol, cert_refine,
                         cert_threshold, cert_out);
    }
    if (*gen) return cmd_gen(ctx, gen_data, gen_prefix);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace guru::cli
