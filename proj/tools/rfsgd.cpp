#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rfsgd/config.hpp"
#include "rfsgd/csv.hpp"
#include "rfsgd/dataset.hpp"
#include "rfsgd/experiment.hpp"
#include "rfsgd/features.hpp"
#include "rfsgd/regimes.hpp"
#include "rfsgd/ridge.hpp"
#include "rfsgd/spectral.hpp"

namespace fs = std::filesystem;
using namespace rfsgd;

namespace {

struct GlobalFlags {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  int threads = 1;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_dir_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  void apply(ExperimentConfig& cfg) const {
    if (seed_opt->count() > 0) cfg.seed = seed;
    if (out_dir_opt->count() > 0) cfg.out_dir = out_dir;
    if (threads_opt->count() > 0) cfg.threads = threads;
  }
};

std::string join_path(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

std::string opt_cell(double v) {
  return std::isnan(v) ? "" : format_double(v);
}

void cmd_synth(const GlobalFlags& g, Eigen::Index n, Eigen::Index D,
               double alpha, double r, double noise_sd) {
  SyntheticSpec spec;
  spec.n = n;
  spec.D = D;
  spec.alpha = alpha;
  spec.r = r;
  spec.noise_sd = noise_sd;
  spec.seed = g.seed;
  const Dataset data = generate_synthetic(spec);

  fs::create_directories(g.out_dir);
  const std::string data_path = join_path(g.out_dir, "data.csv");
  {
    CsvWriter w(data_path);
    std::vector<std::string> header{"y"};
    for (Eigen::Index j = 0; j < D; ++j) header.push_back("x" + std::to_string(j + 1));
    w.header(header);
    for (Eigen::Index i = 0; i < n; ++i) {
      std::vector<std::string> row{format_double(data.y[i])};
      for (Eigen::Index j = 0; j < D; ++j) row.push_back(format_double(data.X(i, j)));
      w.row(row);
    }
  }
  const std::string truth_path = join_path(g.out_dir, "truth.csv");
  {
    CsvWriter w(truth_path);
    w.header({"truth"});
    for (Eigen::Index i = 0; i < n; ++i) w.row({format_double((*data.truth)[i])});
  }
  std::cout << "wrote " << data_path << " (" << n << " rows, " << D
            << " features) and " << truth_path << "\n";
}

void cmd_plan(const std::string& tag, Eigen::Index n, double r, double alpha,
              const RegimeConstants& constants, double kappa2, bool check,
              double delta) {
  RegimePlan p;
  try {
    p = plan(tag, n, r, alpha, constants, kappa2);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::cout << "tag,n,r,alpha,b,gamma,theta,T,M,kappa2,predicted_passes,"
               "predicted_rate_exponent\n";
  std::cout << p.tag << ',' << p.n << ',' << format_double(p.r) << ','
            << format_double(p.alpha) << ',' << p.b << ','
            << format_double(p.gamma) << ',' << format_double(p.theta) << ','
            << p.T << ',' << p.M << ',' << format_double(p.kappa2) << ','
            << format_double(p.predicted_passes) << ','
            << format_double(p.predicted_rate_exponent) << "\n";
  if (check) {
    const AdmissibilityReport rep = admissible(p, delta, 1.0);
    if (rep.ok) {
      std::cout << "admissible,1\n";
    } else {
      std::cout << "admissible,0\n";
      for (const auto& v : rep.violations) {
        std::cout << "violation," << v.name << ",lhs=" << format_double(v.lhs)
                  << ",rhs=" << format_double(v.rhs) << "\n";
      }
    }
  }
}

void report_run(const RunResult& rr) {
  std::cout << "metrics: " << rr.metrics_path << " (" << rr.metric_rows
            << " rows)\n";
  std::cout << "plan: " << rr.plan_path << "\n";
  std::cout << "timings: " << rr.timings_path << "\n";
  std::cout << "errors: " << rr.errors_path << " (" << rr.failed_jobs
            << " failed jobs)\n";
  if (rr.curve_path) std::cout << "curve: " << *rr.curve_path << "\n";
  if (rr.failed_jobs > 0) {
    throw std::runtime_error(std::to_string(rr.failed_jobs) +
                             " job(s) failed; see errors.csv");
  }
}

void cmd_train(const GlobalFlags& g, const std::string& config_path) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  g.apply(cfg);
  if (!cfg.sweep.empty()) {
    throw ConfigError(
        "train: config contains sweep axes; use the sweep subcommand");
  }
  const RunResult rr = run(cfg);
  if (cfg.replications == 1 && rr.failed_jobs == 0) {
    const Model model = run_single(cfg, 0);
    const std::string model_path = join_path(cfg.out_dir, "model.csv");
    CsvWriter w(model_path);
    w.header({"w"});
    for (Eigen::Index j = 0; j < model.w.size(); ++j) {
      w.row({format_double(model.w[j])});
    }
    save_feature_map(model.fm, join_path(cfg.out_dir, "features.csv"));
    std::cout << "model: " << model_path << "\n";
  }
  report_run(rr);
}

void cmd_sweep(const GlobalFlags& g, const std::string& config_path) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  g.apply(cfg);
  if (cfg.sweep.empty()) {
    throw ConfigError("sweep: config declares no sweep axes");
  }
  report_run(run(cfg));
}

void cmd_eval(const GlobalFlags& g, const std::string& config_path,
              const std::string& model_dir,
              const std::vector<double>& baseline_lambdas) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  g.apply(cfg);

  Model model;
  model.fm = load_feature_map(join_path(model_dir, "features.csv"));
  const CsvTable table =
      read_csv_table(join_path(model_dir, "model.csv"), true);
  model.w.resize(static_cast<Eigen::Index>(table.rows.size()));
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    model.w[static_cast<Eigen::Index>(i)] = std::strtod(table.rows[i].at(0).c_str(), nullptr);
  }

  auto [train_part, test_part] = build_data(cfg, 0);
  const EvalMetrics em = evaluate(model, test_part);

  double rel = std::numeric_limits<double>::quiet_NaN();
  double best_lambda = std::numeric_limits<double>::quiet_NaN();
  if (!baseline_lambdas.empty()) {
    double best = std::numeric_limits<double>::infinity();
    for (double lambda : baseline_lambdas) {
      const RidgeSolution krr = krr_fit(train_part, model.fm.spec.kind,
                                        model.fm.spec.sigma, lambda);
      const EvalMetrics bm = evaluate(krr, test_part);
      if (bm.mse < best) {
        best = bm.mse;
        best_lambda = lambda;
      }
    }
    rel = em.mse - best;
  }

  std::cout << "mse,excess_risk,classification_error,mse_minus_best_krr,"
               "best_krr_lambda\n";
  std::cout << format_double(em.mse) << ',' << opt_cell(em.excess_risk) << ','
            << opt_cell(em.classification_error) << ',' << opt_cell(rel) << ','
            << opt_cell(best_lambda) << "\n";
}

void cmd_spectrum(const GlobalFlags& g, const std::string& config_path,
                  const std::string& source, Eigen::Index cap, bool fit,
                  double lambda_min, double lambda_max, int lambda_points) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  g.apply(cfg);

  SpectralSummary summary;
  if (source == "exact") {
    if (cfg.data.kind != DataKind::synthetic) {
      throw ConfigError("spectrum: source=exact requires synthetic data");
    }
    summary = exact_synthetic_spectrum(cfg.data.D, cfg.data.alpha);
  } else if (source == "kernel") {
    auto [train_part, test_part] = build_data(cfg, 0);
    summary = spectrum(train_part, cfg.features.kind, cfg.features.sigma, cap);
  } else if (source == "features") {
    if (cfg.features.M < 1) {
      throw ConfigError("spectrum: source=features requires features.M >= 1");
    }
    auto [train_part, test_part] = build_data(cfg, 0);
    FeatureMapSpec fspec;
    fspec.kind = cfg.features.kind;
    fspec.M = cfg.features.M;
    fspec.D = train_part.meta.D;
    fspec.sigma = cfg.features.sigma;
    fspec.unscaled_cosine = cfg.features.unscaled_cosine;
    fspec.seed = cfg.seed;
    summary = spectrum(map_matrix(build(fspec), train_part.X), cap);
  } else {
    throw ConfigError("spectrum: unknown source '" + source +
                      "' (expected exact, kernel, or features)");
  }

  fs::create_directories(cfg.out_dir);
  {
    CsvWriter w(join_path(cfg.out_dir, "spectrum.csv"));
    w.header({"i", "eigenvalue"});
    for (Eigen::Index i = 0; i < summary.eigenvalues.size(); ++i) {
      w.row({std::to_string(i + 1), format_double(summary.eigenvalues[i])});
    }
  }

  // Default grid: an order of magnitude above the smallest positive
  // eigenvalue, up to the largest; the empirical tail is rank-biased.
  double lo = lambda_min, hi = lambda_max;
  if (!(lo > 0.0) || !(hi > 0.0)) {
    const double mu_max = summary.eigenvalues.maxCoeff();
    double mu_min_pos = mu_max;
    for (Eigen::Index i = 0; i < summary.eigenvalues.size(); ++i) {
      const double mu = summary.eigenvalues[i];
      if (mu > 0.0 && mu < mu_min_pos) mu_min_pos = mu;
    }
    lo = 10.0 * mu_min_pos;
    hi = mu_max;
    if (!(lo < hi)) {
      throw std::runtime_error(
          "spectrum: degenerate default lambda grid; pass --lambda-min/--lambda-max");
    }
  }
  if (lambda_points < 2) throw ConfigError("spectrum: --lambda-points must be >= 2");
  std::vector<double> grid;
  for (int i = 0; i < lambda_points; ++i) {
    const double t = static_cast<double>(i) / (lambda_points - 1);
    grid.push_back(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))));
  }
  {
    CsvWriter w(join_path(cfg.out_dir, "effective_dimension.csv"));
    w.header({"lambda", "effective_dimension"});
    for (double l : grid) {
      w.row({format_double(l), format_double(effective_dimension(summary, l))});
    }
  }
  std::cout << "wrote " << join_path(cfg.out_dir, "spectrum.csv") << " and "
            << join_path(cfg.out_dir, "effective_dimension.csv") << "\n";

  if (fit) {
    const CapacityFit cf = fit_capacity(summary, grid);
    CsvWriter w(join_path(cfg.out_dir, "capacity_fit.csv"));
    w.header({"alpha_hat", "Q_hat", "r2"});
    w.row({format_double(cf.alpha_hat), format_double(cf.Q_hat),
           format_double(cf.r2)});
    std::cout << "capacity fit: alpha_hat=" << format_double(cf.alpha_hat)
              << " Q_hat=" << format_double(cf.Q_hat)
              << " r2=" << format_double(cf.r2) << "\n";
  }
}

void cmd_kernel_check(const GlobalFlags& g, const std::string& kind,
                      double sigma, bool unscaled, Eigen::Index D,
                      Eigen::Index pairs, std::vector<Eigen::Index> m_values,
                      int seeds) {
  KernelCheckConfig kc;
  try {
    kc.kind = feature_kind_from_string(kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  kc.sigma = sigma;
  kc.unscaled_cosine = unscaled;
  kc.D = D;
  kc.n_pairs = pairs;
  if (!m_values.empty()) kc.M_values = std::move(m_values);
  kc.seeds = seeds;
  kc.seed = g.seed;

  const auto rows = kernel_check(kc);
  fs::create_directories(g.out_dir);
  const std::string path = join_path(g.out_dir, "kernel_check.csv");
  write_kernel_check_csv(rows, path);
  std::cout << "M,q25,median,q75,mean_abs\n";
  for (const auto& r : rows) {
    std::cout << r.M << ',' << format_double(r.q25) << ','
              << format_double(r.median) << ',' << format_double(r.q75) << ','
              << format_double(r.mean_abs) << "\n";
  }
  std::cout << "wrote " << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"least-squares learning with random features: mini-batch SGD, "
               "ridge baselines, spectral diagnostics, and regime planning"};
  app.require_subcommand(1);

  GlobalFlags g;
  g.seed_opt = app.add_option("--seed", g.seed, "base seed for all derived streams");
  g.out_dir_opt = app.add_option("--out-dir", g.out_dir, "artifact directory");
  g.threads_opt =
      app.add_option("--threads", g.threads, "worker pool size for sweeps");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset CSV");
  synth->fallthrough();
  Eigen::Index sy_n = 1024, sy_D = 16;
  double sy_alpha = 1.0, sy_r = 0.5, sy_noise = 0.3;
  synth->add_option("--n", sy_n, "number of rows");
  synth->add_option("--D", sy_D, "input dimension");
  synth->add_option("--alpha", sy_alpha, "capacity exponent in (0,1]");
  synth->add_option("--r", sy_r, "source exponent >= 1/2");
  synth->add_option("--noise-sd", sy_noise, "additive noise level");

  // plan
  auto* planc = app.add_subcommand("plan", "print a regime plan as CSV");
  planc->fallthrough();
  std::string pl_tag;
  Eigen::Index pl_n = 0;
  double pl_r = 0.5, pl_alpha = 1.0, pl_kappa2 = 1.0, pl_delta = 0.1;
  RegimeConstants pl_c;
  bool pl_check = false;
  planc->add_option("--tag", pl_tag, "c1.1..c1.4 or c2.1..c2.4")->required();
  planc->add_option("--n", pl_n, "training set size")->required();
  planc->add_option("--r", pl_r, "source exponent (c2 tags)");
  planc->add_option("--alpha", pl_alpha, "capacity exponent (c2 tags)");
  planc->add_option("--c-gamma", pl_c.c_gamma, "step-size constant");
  planc->add_option("--c-b", pl_c.c_b, "batch-size constant");
  planc->add_option("--c-T", pl_c.c_T, "iteration-count constant");
  planc->add_option("--c-M", pl_c.c_M, "feature-count constant");
  planc->add_option("--kappa2", pl_kappa2,
                    "feature-family constant divided out of gamma");
  planc->add_flag("--check", pl_check, "run the admissibility inequalities");
  planc->add_option("--delta", pl_delta, "confidence level for --check");

  // train / sweep
  auto* trainc = app.add_subcommand("train", "run a sweep-free config");
  trainc->fallthrough();
  std::string tr_config;
  trainc->add_option("--config", tr_config, "JSON config path")->required();

  auto* sweepc = app.add_subcommand("sweep", "run a config's full sweep");
  sweepc->fallthrough();
  std::string sw_config;
  sweepc->add_option("--config", sw_config, "JSON config path")->required();

  // eval
  auto* evalc = app.add_subcommand("eval", "evaluate a saved model");
  evalc->fallthrough();
  std::string ev_config, ev_model_dir;
  std::vector<double> ev_lambdas;
  evalc->add_option("--config", ev_config, "JSON config path (data block)")
      ->required();
  evalc->add_option("--model-dir", ev_model_dir,
                    "directory with model.csv and features.csv")
      ->required();
  evalc->add_option("--baseline-lambda", ev_lambdas,
                    "exact-kernel ridge lambdas; reports test MSE minus the "
                    "best baseline (not an excess risk)");

  // spectrum
  auto* specc = app.add_subcommand("spectrum", "eigenvalues and N(lambda) table");
  specc->fallthrough();
  std::string sp_config, sp_source = "kernel";
  Eigen::Index sp_cap = 4096;
  bool sp_fit = false;
  double sp_lmin = 0.0, sp_lmax = 0.0;
  int sp_lpoints = 20;
  specc->add_option("--config", sp_config, "JSON config path")->required();
  specc->add_option("--source", sp_source, "exact | kernel | features");
  specc->add_option("--cap", sp_cap, "eigendecomposition size cap");
  specc->add_flag("--fit", sp_fit, "fit the capacity exponent on the grid");
  specc->add_option("--lambda-min", sp_lmin, "grid lower end (default: auto)");
  specc->add_option("--lambda-max", sp_lmax, "grid upper end (default: auto)");
  specc->add_option("--lambda-points", sp_lpoints, "grid size");

  // kernel-check
  auto* kcc = app.add_subcommand("kernel-check",
                                 "approximate-vs-limit kernel error table");
  kcc->fallthrough();
  std::string kc_kind = "fourier-gaussian";
  double kc_sigma = 1.0;
  bool kc_unscaled = false;
  Eigen::Index kc_D = 5, kc_pairs = 50;
  std::vector<Eigen::Index> kc_m;
  int kc_seeds = 200;
  kcc->add_option("--kind", kc_kind, "feature kind");
  kcc->add_option("--sigma", kc_sigma, "fourier-gaussian bandwidth");
  kcc->add_flag("--unscaled-cosine", kc_unscaled, "drop the sqrt(2) cosine scale");
  kcc->add_option("--D", kc_D, "input dimension");
  kcc->add_option("--pairs", kc_pairs, "number of evaluation pairs");
  kcc->add_option("--M", kc_m, "feature counts (default 16 64 256 1024 4096)");
  kcc->add_option("--seeds", kc_seeds, "number of feature draws");

  try {
    app.parse(argc, argv);
    if (synth->parsed()) cmd_synth(g, sy_n, sy_D, sy_alpha, sy_r, sy_noise);
    if (planc->parsed()) {
      cmd_plan(pl_tag, pl_n, pl_r, pl_alpha, pl_c, pl_kappa2, pl_check, pl_delta);
    }
    if (trainc->parsed()) cmd_train(g, tr_config);
    if (sweepc->parsed()) cmd_sweep(g, sw_config);
    if (evalc->parsed()) cmd_eval(g, ev_config, ev_model_dir, ev_lambdas);
    if (specc->parsed()) {
      cmd_spectrum(g, sp_config, sp_source, sp_cap, sp_fit, sp_lmin, sp_lmax,
                   sp_lpoints);
    }
    if (kcc->parsed()) {
      cmd_kernel_check(g, kc_kind, kc_sigma, kc_unscaled, kc_D, kc_pairs, kc_m,
                       kc_seeds);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
