#include "rfsgd/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "rfsgd/config.hpp"
#include "rfsgd/csv.hpp"
#include "rfsgd/metrics.hpp"
#include "rfsgd/rng.hpp"

namespace rfsgd {

namespace {

constexpr std::uint64_t kTagData = 0xDA7A;
constexpr std::uint64_t kTagFeatures = 0xF0EA;
constexpr std::uint64_t kTagSampling = 0x5A3B;
constexpr std::uint64_t kTagFileSplit = 0x51127;
constexpr std::uint64_t kTagPairs = 0x9A125;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string cell(double v) { return std::isnan(v) ? "" : format_double(v); }

std::string sanitize_message(std::string msg) {
  for (char& c : msg) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return msg;
}

double quantile_sorted(const std::vector<double>& v, double p) {
  const double idx = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(idx));
  const auto hi = static_cast<std::size_t>(std::ceil(idx));
  const double frac = idx - std::floor(idx);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

bool is_integral_value(double v) { return std::floor(v) == v && std::isfinite(v); }

struct PointResolution {
  std::vector<double> values;
  bool ok = true;
  std::string error;
  SgdConfig scfg;
  Eigen::Index M = 0;
  Eigen::Index n_train = 0;
  RegimePlan plan_row;
  AdmissibilityReport adm;
};

struct JobOutput {
  std::vector<CheckpointRecord> records;
  std::string error;
};

std::vector<std::vector<double>> cartesian(const std::vector<SweepAxis>& axes) {
  std::vector<std::vector<double>> points{{}};
  for (const auto& axis : axes) {
    std::vector<std::vector<double>> next;
    next.reserve(points.size() * axis.values.size());
    for (const auto& base : points) {
      for (double v : axis.values) {
        auto row = base;
        row.push_back(v);
        next.push_back(std::move(row));
      }
    }
    points = std::move(next);
  }
  return points;
}

// ---- learning-curve SVG ----

struct AxisScale {
  double lo = 0.0, hi = 1.0;
  double px0 = 0.0, px1 = 1.0;
  bool log = false;
  double to_px(double v) const {
    double u = log ? std::log10(v) : v;
    if (hi == lo) return 0.5 * (px0 + px1);
    return px0 + (u - lo) / (hi - lo) * (px1 - px0);
  }
};

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void write_curve_svg(const std::string& path, const std::string& axis_name,
                     const std::string& metric_name,
                     const std::vector<double>& xs,
                     const std::vector<double>& means,
                     const std::vector<double>& sds) {
  const double W = 640, H = 420;
  const double left = 78, right = 616, top = 24, bottom = 360;

  auto make_scale = [](const std::vector<double>& vals, double pad_frac,
                       double px0, double px1) {
    AxisScale s;
    s.px0 = px0;
    s.px1 = px1;
    s.log = std::all_of(vals.begin(), vals.end(), [](double v) { return v > 0; });
    double lo = vals[0], hi = vals[0];
    for (double v : vals) {
      const double u = v;
      lo = std::min(lo, u);
      hi = std::max(hi, u);
    }
    if (s.log) {
      lo = std::log10(lo);
      hi = std::log10(hi);
    }
    const double pad = (hi - lo) * pad_frac;
    s.lo = lo - pad;
    s.hi = hi + pad;
    return s;
  };

  std::vector<double> y_all;
  for (std::size_t i = 0; i < means.size(); ++i) {
    y_all.push_back(means[i]);
    const double up = means[i] + sds[i];
    double down = means[i] - sds[i];
    if (down <= 0.0 && means[i] > 0.0) down = means[i] / 10.0;
    y_all.push_back(up);
    y_all.push_back(down);
  }
  AxisScale sx = make_scale(xs, 0.05, left, right);
  AxisScale sy = make_scale(y_all, 0.08, bottom, top);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H
      << "\" fill=\"white\"/>\n";

  // Frame.
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\""
      << right - left << "\" height=\"" << bottom - top
      << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";

  auto draw_ticks = [&](const AxisScale& s, bool horizontal) {
    std::vector<double> tick_vals;
    if (s.log) {
      for (int d = static_cast<int>(std::ceil(s.lo));
           d <= static_cast<int>(std::floor(s.hi)); ++d) {
        tick_vals.push_back(std::pow(10.0, d));
      }
      if (tick_vals.size() < 2) {
        tick_vals = {std::pow(10.0, s.lo), std::pow(10.0, 0.5 * (s.lo + s.hi)),
                     std::pow(10.0, s.hi)};
      }
    } else {
      for (int i = 0; i <= 4; ++i) {
        tick_vals.push_back(s.lo + (s.hi - s.lo) * i / 4.0);
      }
    }
    for (double tv : tick_vals) {
      const double px = s.to_px(tv);
      char label[48];
      if (s.log) {
        std::snprintf(label, sizeof(label), "%.3g", tv);
      } else {
        std::snprintf(label, sizeof(label), "%.3g", tv);
      }
      if (horizontal) {
        out << "<line x1=\"" << fixed2(px) << "\" y1=\"" << bottom
            << "\" x2=\"" << fixed2(px) << "\" y2=\"" << bottom + 5
            << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << fixed2(px) << "\" y=\"" << bottom + 20
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">"
            << label << "</text>\n";
      } else {
        out << "<line x1=\"" << left - 5 << "\" y1=\"" << fixed2(px)
            << "\" x2=\"" << left << "\" y2=\"" << fixed2(px)
            << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << left - 9 << "\" y=\"" << fixed2(px + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">"
            << label << "</text>\n";
      }
    }
  };
  draw_ticks(sx, true);
  draw_ticks(sy, false);

  // Band: mean +/- sd.
  out << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.45\" stroke=\"none\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out << fixed2(sx.to_px(xs[i])) << "," << fixed2(sy.to_px(means[i] + sds[i]))
        << " ";
  }
  for (std::size_t i = xs.size(); i-- > 0;) {
    double down = means[i] - sds[i];
    if (sy.log && down <= 0.0) down = means[i] / 10.0;
    out << fixed2(sx.to_px(xs[i])) << "," << fixed2(sy.to_px(down)) << " ";
  }
  out << "\"/>\n";

  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out << fixed2(sx.to_px(xs[i])) << "," << fixed2(sy.to_px(means[i])) << " ";
  }
  out << "\"/>\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    out << "<circle cx=\"" << fixed2(sx.to_px(xs[i])) << "\" cy=\""
        << fixed2(sy.to_px(means[i])) << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  }

  out << "<text x=\"" << 0.5 * (left + right) << "\" y=\"" << H - 14
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
      << axis_name << (sx.log ? " (log)" : "") << "</text>\n";
  out << "<text x=\"18\" y=\"" << 0.5 * (top + bottom)
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 18 " << 0.5 * (top + bottom) << ")\">"
      << metric_name << (sy.log ? " (log)" : "") << "</text>\n";
  out << "<text x=\"" << 0.5 * (left + right) << "\" y=\"16\" "
      << "font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
      << "fill=\"#333\">mean over replications, band = +/- 1 sd</text>\n";
  out << "</svg>\n";
}

}  // namespace

// ---- metric evaluation ----

EvalMetrics evaluate_predictions(const Eigen::VectorXd& pred,
                                 const Dataset& test) {
  if (test.meta.n < 1) throw std::invalid_argument("evaluate: empty test set");
  if (pred.size() != test.meta.n) {
    throw std::invalid_argument("evaluate: prediction count mismatch");
  }
  EvalMetrics m;
  m.mse = mean_squared_error(pred, test.y);
  m.excess_risk =
      test.truth ? mean_squared_error(pred, *test.truth) : kNaN;
  m.classification_error = test.meta.task == Task::binary_classification
                               ? classification_error(pred, test.y)
                               : kNaN;
  return m;
}

EvalMetrics evaluate(const Model& model, const Dataset& test) {
  return evaluate_predictions(predict(model, test.X), test);
}

EvalMetrics evaluate(const RidgeSolution& sol, const Dataset& test) {
  return evaluate_predictions(ridge_predict(sol, test.X), test);
}

// ---- config validation ----

void validate(const ExperimentConfig& config) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };

  if (config.sgd.has_value() == config.regime.has_value()) {
    fail("config: exactly one of 'sgd' and 'regime' must be present");
  }
  if (config.replications < 1) fail("config: replications must be >= 1");
  if (config.threads < 1) fail("config: threads must be >= 1");
  if (!(config.delta > 0.0 && config.delta < 1.0)) {
    fail("config: delta must lie in (0, 1)");
  }
  if (config.checkpoint_every < 0) fail("config: checkpoint_every must be >= 0");

  const auto& d = config.data;
  if (d.kind == DataKind::synthetic) {
    if (d.n < 2) fail("config: data.n must be >= 2");
    if (d.n_test < 1) fail("config: data.n_test must be >= 1");
    if (d.D < 2) fail("config: data.D must be >= 2");
    if (!(d.alpha > 0.0 && d.alpha <= 1.0)) {
      fail("config: data.alpha must lie in (0, 1]");
    }
    if (!(d.r >= 0.5)) fail("config: data.r must be >= 1/2");
    if (!(d.noise_sd >= 0.0)) fail("config: data.noise_sd must be >= 0");
  } else {
    if (d.path.empty()) fail("config: data.path is required for file data");
    if (!(d.test_fraction > 0.0 && d.test_fraction < 1.0)) {
      fail("config: data.test_fraction must lie in (0, 1)");
    }
  }

  if (config.features.kind == FeatureKind::fourier_gaussian &&
      !(config.features.sigma > 0.0)) {
    fail("config: features.sigma must be > 0");
  }
  if (config.features.M < 0) fail("config: features.M must be >= 0");

  if (config.regime) {
    const auto& tags = regime_tags();
    if (std::find(tags.begin(), tags.end(), config.regime->tag) == tags.end()) {
      fail("config: unknown regime tag '" + config.regime->tag + "'");
    }
  }

  bool sweeps_m = false;
  std::vector<std::string> seen;
  for (const auto& axis : config.sweep) {
    if (std::find(seen.begin(), seen.end(), axis.name) != seen.end()) {
      fail("config: duplicate sweep axis '" + axis.name + "'");
    }
    seen.push_back(axis.name);
    if (axis.values.empty()) {
      fail("config: sweep axis '" + axis.name + "' has no values");
    }
    const bool explicit_mode = config.sgd.has_value();
    bool known;
    if (explicit_mode) {
      known = axis.name == "n" || axis.name == "M" || axis.name == "b" ||
              axis.name == "gamma" || axis.name == "T";
    } else {
      known = axis.name == "n" || axis.name == "M" || axis.name == "c_gamma";
    }
    if (!known) {
      fail("config: sweep axis '" + axis.name +
           "' does not name a sweepable parameter in this mode");
    }
    if (axis.name == "n" && d.kind != DataKind::synthetic) {
      fail("config: sweep over n requires synthetic data");
    }
    if (axis.name == "M") sweeps_m = true;
    const bool integral =
        axis.name == "n" || axis.name == "M" || axis.name == "b" || axis.name == "T";
    for (double v : axis.values) {
      if (integral && (!is_integral_value(v) || v < 1.0)) {
        fail("config: sweep axis '" + axis.name +
             "' requires positive integer values");
      }
      if (!integral && !(v > 0.0)) {
        fail("config: sweep axis '" + axis.name + "' requires positive values");
      }
    }
  }

  if (config.sgd && config.features.M < 1 && !sweeps_m) {
    fail("config: features.M >= 1 is required with an explicit sgd block");
  }
  if (config.sgd) {
    if (config.sgd->b < 1) fail("config: sgd.b must be >= 1");
    if (!(config.sgd->gamma > 0.0)) fail("config: sgd.gamma must be > 0");
    if (!(config.sgd->theta >= 0.0 && config.sgd->theta < 1.0)) {
      fail("config: sgd.theta must lie in [0, 1)");
    }
    if (config.sgd->T < 0) fail("config: sgd.T must be >= 0");
  }
  if (config.regime) {
    const auto& rg = *config.regime;
    if (!(rg.r >= 0.5)) fail("config: regime.r must be >= 1/2");
    if (!(rg.alpha > 0.0 && rg.alpha <= 1.0)) {
      fail("config: regime.alpha must lie in (0, 1]");
    }
    if (!(rg.constants.c_gamma > 0.0) || !(rg.constants.c_b > 0.0) ||
        !(rg.constants.c_T > 0.0) || !(rg.constants.c_M > 0.0)) {
      fail("config: regime constants must be > 0");
    }
  }
}

// ---- sweep engine ----

namespace {

PointResolution resolve_point(const ExperimentConfig& config,
                              const std::vector<double>& values,
                              Eigen::Index file_n_train, double kappa2) {
  PointResolution res;
  res.values = values;

  Eigen::Index n = config.data.kind == DataKind::synthetic ? config.data.n
                                                           : file_n_train;
  Eigen::Index M_override = config.features.M;
  ExplicitSgd ex = config.sgd.value_or(ExplicitSgd{});
  RegimeSpec rg = config.regime.value_or(RegimeSpec{});
  for (std::size_t a = 0; a < config.sweep.size(); ++a) {
    const auto& name = config.sweep[a].name;
    const double v = values[a];
    if (name == "n") n = static_cast<Eigen::Index>(v);
    else if (name == "M") M_override = static_cast<Eigen::Index>(v);
    else if (name == "b") ex.b = static_cast<Eigen::Index>(v);
    else if (name == "gamma") ex.gamma = v;
    else if (name == "T") ex.T = static_cast<Eigen::Index>(v);
    else if (name == "c_gamma") rg.constants.c_gamma = v;
  }
  res.n_train = n;

  try {
    if (config.regime) {
      RegimePlan p = plan(rg.tag, n, rg.r, rg.alpha, rg.constants, kappa2);
      if (M_override > 0) p.M = M_override;
      res.plan_row = p;
      res.scfg.b = p.b;
      res.scfg.gamma = p.gamma;
      res.scfg.theta = p.theta;
      res.scfg.T = p.T;
      res.M = p.M;
    } else {
      if (M_override < 1) {
        throw ConfigError("resolve: features.M must be >= 1 in explicit mode");
      }
      RegimePlan p;
      p.tag = "explicit";
      p.n = n;
      p.b = ex.b;
      p.gamma = ex.gamma;
      p.theta = ex.theta;
      p.T = ex.T;
      p.M = M_override;
      p.kappa2 = kappa2;
      p.predicted_passes =
          static_cast<double>(ex.T) /
          static_cast<double>(iterations_per_pass(std::max<Eigen::Index>(n, 1),
                                                  std::min(ex.b, std::max<Eigen::Index>(n, 1))));
      p.predicted_rate_exponent = kNaN;
      res.plan_row = p;
      res.scfg.b = ex.b;
      res.scfg.gamma = ex.gamma;
      res.scfg.theta = ex.theta;
      res.scfg.T = ex.T;
      res.M = M_override;
    }
    res.scfg.memory_mode = config.memory_mode;
    res.scfg.checkpoint_every = config.checkpoint_every;
    res.adm = admissible(res.plan_row, config.delta, 1.0);
  } catch (const std::exception& e) {
    res.ok = false;
    res.error = e.what();
  }
  return res;
}

std::pair<Dataset, Dataset> build_parts(const ExperimentConfig& config,
                                        Eigen::Index n_train, int rep,
                                        const Dataset* shared_file) {
  const std::uint64_t seed_k = config.seed + static_cast<std::uint64_t>(rep);
  if (config.data.kind == DataKind::synthetic) {
    SyntheticSpec spec;
    spec.n = n_train + config.data.n_test;
    spec.D = config.data.D;
    spec.alpha = config.data.alpha;
    spec.r = config.data.r;
    spec.noise_sd = config.data.noise_sd;
    spec.seed = derive_seed(derive_seed(seed_k, kTagData),
                            static_cast<std::uint64_t>(spec.n));
    const Dataset full = generate_synthetic(spec);
    Dataset train_part = take_rows(full, 0, n_train);
    Dataset test_part = take_rows(full, n_train, config.data.n_test);
    if (config.data.standardize) standardize_train_test(train_part, test_part);
    return {std::move(train_part), std::move(test_part)};
  }
  Dataset loaded;
  const Dataset* file = shared_file;
  if (file == nullptr) {
    loaded = config.data.kind == DataKind::csv
                 ? load_csv(config.data.path, config.data.schema)
                 : load_libsvm(config.data.path, config.data.task);
    file = &loaded;
  }
  return split(*file, config.data.test_fraction,
               derive_seed(seed_k, kTagFileSplit), config.data.standardize);
}

Model execute_resolved(const ExperimentConfig& config,
                       const PointResolution& point, int rep,
                       const Dataset* shared_file) {
  const std::uint64_t seed_k = config.seed + static_cast<std::uint64_t>(rep);
  auto [train_part, test_part] =
      build_parts(config, point.n_train, rep, shared_file);

  FeatureMapSpec fspec;
  fspec.kind = config.features.kind;
  fspec.M = point.M;
  fspec.D = train_part.meta.D;
  fspec.sigma = config.features.sigma;
  fspec.unscaled_cosine = config.features.unscaled_cosine;
  fspec.seed = derive_seed(seed_k, kTagFeatures);
  const FeatureMap fm = build(fspec);

  SgdConfig scfg = point.scfg;
  scfg.sampling_seed = derive_seed(seed_k, kTagSampling);
  return train(train_part, fm, scfg, &test_part);
}

JobOutput run_job(const ExperimentConfig& config, const PointResolution& point,
                  int rep, const Dataset* file_data) {
  JobOutput out;
  try {
    out.records = execute_resolved(config, point, rep, file_data).history;
  } catch (const std::exception& e) {
    out.error = e.what();
  }
  return out;
}

double feature_kappa2(const ExperimentConfig& config) {
  FeatureMapSpec probe;
  probe.kind = config.features.kind;
  probe.M = 1;
  probe.D = 1;
  probe.sigma = config.features.sigma;
  probe.unscaled_cosine = config.features.unscaled_cosine;
  return kappa_squared(probe);
}

Eigen::Index file_train_count(const Dataset& file_data, double test_fraction) {
  const auto n_test = static_cast<Eigen::Index>(
      std::floor(static_cast<double>(file_data.meta.n) * test_fraction));
  return file_data.meta.n - n_test;
}

}  // namespace

std::pair<Dataset, Dataset> build_data(const ExperimentConfig& config, int rep) {
  return build_parts(config, config.data.n, rep, nullptr);
}

Model run_single(const ExperimentConfig& config, int rep) {
  validate(config);
  if (!config.sweep.empty()) {
    throw ConfigError("run_single: config must not contain sweep axes");
  }
  Eigen::Index n_train = config.data.n;
  Dataset file_data;
  const Dataset* shared = nullptr;
  if (config.data.kind != DataKind::synthetic) {
    file_data = config.data.kind == DataKind::csv
                    ? load_csv(config.data.path, config.data.schema)
                    : load_libsvm(config.data.path, config.data.task);
    n_train = file_train_count(file_data, config.data.test_fraction);
    shared = &file_data;
  }
  PointResolution point =
      resolve_point(config, {}, n_train, feature_kappa2(config));
  if (!point.ok) throw ConfigError("run_single: " + point.error);
  return execute_resolved(config, point, rep, shared);
}

RunResult run(const ExperimentConfig& config) {
  validate(config);
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  const auto path_in_out = [&](const char* name) {
    return (fs::path(config.out_dir) / name).string();
  };

  Dataset file_data;
  Eigen::Index file_n_train = 0;
  if (config.data.kind != DataKind::synthetic) {
    file_data = config.data.kind == DataKind::csv
                    ? load_csv(config.data.path, config.data.schema)
                    : load_libsvm(config.data.path, config.data.task);
    file_n_train = file_train_count(file_data, config.data.test_fraction);
  }

  const double kappa2 = feature_kappa2(config);

  const auto points = cartesian(config.sweep);
  std::vector<PointResolution> resolved;
  resolved.reserve(points.size());
  for (const auto& values : points) {
    resolved.push_back(resolve_point(config, values, file_n_train, kappa2));
  }

  // plan.csv: one row per sweep point with the resolved parameters.
  RunResult result;
  result.plan_path = path_in_out("plan.csv");
  {
    CsvWriter w(result.plan_path);
    std::vector<std::string> header{"point"};
    for (const auto& axis : config.sweep) header.push_back(axis.name);
    // resolved_ prefix keeps the header collision-free when an axis shares a
    // parameter's name.
    for (const char* c : {"tag", "resolved_n", "resolved_b", "resolved_gamma",
                          "resolved_theta", "resolved_T", "resolved_M", "kappa2",
                          "predicted_passes", "predicted_rate_exponent",
                          "admissible", "violations"}) {
      header.emplace_back(c);
    }
    w.header(header);
    for (std::size_t p = 0; p < resolved.size(); ++p) {
      const auto& res = resolved[p];
      std::vector<std::string> row{std::to_string(p)};
      for (double v : res.values) row.push_back(format_double(v));
      if (!res.ok) {
        row.insert(row.end(),
                   {"unresolved", "", "", "", "", "", "", "", "", "", "",
                    sanitize_message(res.error)});
      } else {
        const auto& pl = res.plan_row;
        std::string violations;
        for (const auto& v : res.adm.violations) {
          if (!violations.empty()) violations += "; ";
          violations += v.name;
        }
        row.insert(row.end(),
                   {pl.tag, std::to_string(pl.n), std::to_string(pl.b),
                    format_double(pl.gamma), format_double(pl.theta),
                    std::to_string(pl.T), std::to_string(pl.M),
                    format_double(pl.kappa2), format_double(pl.predicted_passes),
                    cell(pl.predicted_rate_exponent),
                    res.adm.ok ? "1" : "0", violations});
      }
      w.row(row);
    }
  }

  // Jobs execute on a bounded pool; outputs land in per-job slots so writes
  // below are ordered no matter which worker finishes first.
  const int R = config.replications;
  const std::size_t n_jobs = points.size() * static_cast<std::size_t>(R);
  std::vector<JobOutput> outputs(n_jobs);
  {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n_jobs) break;
        const std::size_t p = i / static_cast<std::size_t>(R);
        const int rep = static_cast<int>(i % static_cast<std::size_t>(R));
        if (!resolved[p].ok) continue;
        outputs[i] = run_job(config, resolved[p], rep,
                             config.data.kind == DataKind::synthetic
                                 ? nullptr
                                 : &file_data);
      }
    };
    const auto want = static_cast<std::size_t>(config.threads);
    const std::size_t tn = std::max<std::size_t>(1, std::min(want, n_jobs));
    if (tn == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(tn);
      for (std::size_t i = 0; i < tn; ++i) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
  }

  result.metrics_path = path_in_out("metrics.csv");
  result.timings_path = path_in_out("timings.csv");
  result.errors_path = path_in_out("errors.csv");
  CsvWriter metrics(result.metrics_path);
  CsvWriter timings(result.timings_path);
  CsvWriter errors(result.errors_path);
  {
    std::vector<std::string> mh{"point"};
    for (const auto& axis : config.sweep) mh.push_back(axis.name);
    std::vector<std::string> eh = mh, th = mh;
    for (const char* c : {"seed", "t", "pass", "gamma_t", "holdout_mse",
                          "holdout_excess_risk", "classification_error"}) {
      mh.emplace_back(c);
    }
    metrics.header(mh);
    for (const char* c : {"seed", "t", "elapsed_ms"}) th.emplace_back(c);
    timings.header(th);
    for (const char* c : {"seed", "message"}) eh.emplace_back(c);
    errors.header(eh);
  }

  // Final-checkpoint metric per (point, rep), for the curve.
  std::vector<std::vector<double>> final_excess(points.size()),
      final_mse(points.size());

  for (std::size_t p = 0; p < points.size(); ++p) {
    std::vector<std::string> prefix{std::to_string(p)};
    for (double v : resolved[p].values) prefix.push_back(format_double(v));
    if (!resolved[p].ok) {
      auto row = prefix;
      row.emplace_back("");
      row.push_back(sanitize_message(resolved[p].error));
      errors.row(row);
      ++result.failed_jobs;
      continue;
    }
    for (int rep = 0; rep < R; ++rep) {
      const auto& out = outputs[p * static_cast<std::size_t>(R) +
                                static_cast<std::size_t>(rep)];
      const std::uint64_t seed_k = config.seed + static_cast<std::uint64_t>(rep);
      if (!out.error.empty()) {
        auto row = prefix;
        row.push_back(std::to_string(seed_k));
        row.push_back(sanitize_message(out.error));
        errors.row(row);
        ++result.failed_jobs;
        continue;
      }
      for (const auto& rec : out.records) {
        auto row = prefix;
        row.push_back(std::to_string(seed_k));
        row.push_back(std::to_string(rec.t));
        row.push_back(format_double(rec.pass));
        row.push_back(format_double(rec.gamma_t));
        row.push_back(cell(rec.holdout_mse));
        row.push_back(cell(rec.holdout_excess_risk));
        row.push_back(cell(rec.classification_error));
        metrics.row(row);
        ++result.metric_rows;

        auto trow = prefix;
        trow.push_back(std::to_string(seed_k));
        trow.push_back(std::to_string(rec.t));
        trow.push_back(format_double(rec.elapsed_ms));
        timings.row(trow);
      }
      if (!out.records.empty()) {
        const auto& last = out.records.back();
        final_mse[p].push_back(last.holdout_mse);
        if (!std::isnan(last.holdout_excess_risk)) {
          final_excess[p].push_back(last.holdout_excess_risk);
        }
      }
    }
  }

  if (config.curve && config.sweep.size() == 1) {
    std::vector<double> xs, means, sds;
    bool use_excess = true;
    for (std::size_t p = 0; p < points.size(); ++p) {
      if (final_excess[p].size() != final_mse[p].size() ||
          final_excess[p].empty()) {
        use_excess = false;
      }
    }
    for (std::size_t p = 0; p < points.size(); ++p) {
      const auto& vals = use_excess ? final_excess[p] : final_mse[p];
      if (vals.empty()) continue;
      double mean = 0.0;
      for (double v : vals) mean += v;
      mean /= static_cast<double>(vals.size());
      double var = 0.0;
      for (double v : vals) var += (v - mean) * (v - mean);
      var = vals.size() > 1 ? var / static_cast<double>(vals.size() - 1) : 0.0;
      xs.push_back(resolved[p].values[0]);
      means.push_back(mean);
      sds.push_back(std::sqrt(var));
    }
    if (xs.size() >= 2) {
      result.curve_path = path_in_out("curve.svg");
      write_curve_svg(*result.curve_path, config.sweep[0].name,
                      use_excess ? "holdout excess risk" : "holdout mse", xs,
                      means, sds);
    }
  }
  return result;
}

// ---- kernel approximation check ----

std::vector<KernelCheckRow> kernel_check(const KernelCheckConfig& config) {
  if (config.M_values.empty()) {
    throw ConfigError("kernel_check: M_values must be nonempty");
  }
  for (Eigen::Index m : config.M_values) {
    if (m < 1) throw ConfigError("kernel_check: M values must be >= 1");
  }
  if (config.n_pairs < 1) throw ConfigError("kernel_check: n_pairs must be >= 1");
  if (config.seeds < 1) throw ConfigError("kernel_check: seeds must be >= 1");
  if (config.D < 1) throw ConfigError("kernel_check: D must be >= 1");
  if (config.kind == FeatureKind::fourier_gaussian && !(config.sigma > 0.0)) {
    throw ConfigError("kernel_check: sigma must be > 0");
  }

  const Eigen::Index M_max =
      *std::max_element(config.M_values.begin(), config.M_values.end());

  // Fixed pair grid of standard-normal points, shared by every seed.
  Rng pair_rng(derive_seed(config.seed, kTagPairs));
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
  pairs.reserve(static_cast<std::size_t>(config.n_pairs));
  for (Eigen::Index i = 0; i < config.n_pairs; ++i) {
    Eigen::VectorXd x(config.D), xp(config.D);
    for (Eigen::Index d = 0; d < config.D; ++d) x[d] = pair_rng.normal();
    for (Eigen::Index d = 0; d < config.D; ++d) xp[d] = pair_rng.normal();
    pairs.emplace_back(std::move(x), std::move(xp));
  }
  const double limit_scale =
      (config.kind == FeatureKind::fourier_gaussian && config.unscaled_cosine)
          ? 0.5
          : 1.0;
  std::vector<double> exact(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    exact[i] = limit_scale * exact_kernel(config.kind, config.sigma,
                                          pairs[i].first, pairs[i].second);
  }

  std::vector<std::vector<double>> abs_err(config.M_values.size());
  for (auto& bucket : abs_err) {
    bucket.reserve(pairs.size() * static_cast<std::size_t>(config.seeds));
  }

  for (int s = 0; s < config.seeds; ++s) {
    FeatureMapSpec fspec;
    fspec.kind = config.kind;
    fspec.M = M_max;
    fspec.D = config.D;
    fspec.sigma = config.sigma;
    fspec.unscaled_cosine = config.unscaled_cosine;
    fspec.seed = derive_seed(config.seed + static_cast<std::uint64_t>(s),
                             kTagFeatures);
    const FeatureMap fm = build(fspec);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const Eigen::VectorXd u = raw_features(fm, pairs[i].first);
      const Eigen::VectorXd v = raw_features(fm, pairs[i].second);
      for (std::size_t mi = 0; mi < config.M_values.size(); ++mi) {
        const Eigen::Index M = config.M_values[mi];
        const double k_m =
            u.head(M).dot(v.head(M)) / static_cast<double>(M);
        abs_err[mi].push_back(std::abs(k_m - exact[i]));
      }
    }
  }

  std::vector<KernelCheckRow> rows;
  rows.reserve(config.M_values.size());
  for (std::size_t mi = 0; mi < config.M_values.size(); ++mi) {
    auto& bucket = abs_err[mi];
    std::sort(bucket.begin(), bucket.end());
    KernelCheckRow row;
    row.M = config.M_values[mi];
    row.q25 = quantile_sorted(bucket, 0.25);
    row.median = quantile_sorted(bucket, 0.5);
    row.q75 = quantile_sorted(bucket, 0.75);
    double mean = 0.0;
    for (double e : bucket) mean += e;
    row.mean_abs = mean / static_cast<double>(bucket.size());
    rows.push_back(row);
  }
  return rows;
}

void write_kernel_check_csv(const std::vector<KernelCheckRow>& rows,
                            const std::string& path) {
  CsvWriter w(path);
  w.header({"M", "q25", "median", "q75", "mean_abs"});
  for (const auto& r : rows) {
    w.row({std::to_string(r.M), format_double(r.q25), format_double(r.median),
           format_double(r.q75), format_double(r.mean_abs)});
  }
}

}  // namespace rfsgd
