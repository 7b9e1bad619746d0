#include "rfsgd/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"

namespace rfsgd {

namespace {

using json = nlohmann::ordered_json;

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("config: unknown key '" +
                        (where.empty() ? it.key() : where + "." + it.key()) +
                        "'");
    }
  }
}

double get_double(const json& obj, const std::string& where,
                  const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) {
    throw ConfigError("config: '" + where + "." + key + "' must be a number");
  }
  return v.get<double>();
}

Eigen::Index get_index(const json& obj, const std::string& where,
                       const std::string& key, Eigen::Index fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw ConfigError("config: '" + where + "." + key + "' must be an integer");
  }
  return v.get<Eigen::Index>();
}

bool get_bool(const json& obj, const std::string& where, const std::string& key,
              bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) {
    throw ConfigError("config: '" + where + "." + key + "' must be a boolean");
  }
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& where,
                       const std::string& key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) {
    throw ConfigError("config: '" + where + "." + key + "' must be a string");
  }
  return v.get<std::string>();
}

Task parse_task(const std::string& name) {
  if (name == "regression") return Task::regression;
  if (name == "binary-classification") return Task::binary_classification;
  throw ConfigError("config: unknown task '" + name +
                    "' (expected regression or binary-classification)");
}

DataConfig parse_data(const json& obj) {
  check_keys(obj, "data",
             {"kind", "n", "n_test", "D", "alpha", "r", "noise_sd", "path",
              "target_column", "has_header", "task", "test_fraction",
              "standardize"});
  DataConfig d;
  const std::string kind = get_string(obj, "data", "kind", "synthetic");
  if (kind == "synthetic") {
    d.kind = DataKind::synthetic;
  } else if (kind == "csv") {
    d.kind = DataKind::csv;
  } else if (kind == "libsvm") {
    d.kind = DataKind::libsvm;
  } else {
    throw ConfigError("config: unknown data.kind '" + kind + "'");
  }
  d.n = get_index(obj, "data", "n", d.n);
  d.n_test = get_index(obj, "data", "n_test", d.n_test);
  d.D = get_index(obj, "data", "D", d.D);
  d.alpha = get_double(obj, "data", "alpha", d.alpha);
  d.r = get_double(obj, "data", "r", d.r);
  d.noise_sd = get_double(obj, "data", "noise_sd", d.noise_sd);
  d.path = get_string(obj, "data", "path", "");
  d.schema.target_column =
      static_cast<int>(get_index(obj, "data", "target_column", 0));
  d.schema.has_header = get_bool(obj, "data", "has_header", false);
  const std::string task = get_string(obj, "data", "task", "regression");
  d.schema.task = parse_task(task);
  d.task = d.schema.task;
  d.test_fraction = get_double(obj, "data", "test_fraction", d.test_fraction);
  // Raw coordinates already carry known scales for synthetic draws; measured
  // file columns default to train-statistics z-scoring.
  d.standardize = get_bool(obj, "data", "standardize",
                           d.kind != DataKind::synthetic);
  return d;
}

FeatureConfig parse_features(const json& obj) {
  check_keys(obj, "features", {"kind", "M", "sigma", "unscaled_cosine"});
  FeatureConfig f;
  const std::string kind =
      get_string(obj, "features", "kind", "fourier-gaussian");
  try {
    f.kind = feature_kind_from_string(kind);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  f.M = get_index(obj, "features", "M", 0);
  f.sigma = get_double(obj, "features", "sigma", 1.0);
  f.unscaled_cosine = get_bool(obj, "features", "unscaled_cosine", false);
  return f;
}

ExplicitSgd parse_sgd(const json& obj) {
  check_keys(obj, "sgd", {"b", "gamma", "theta", "T"});
  ExplicitSgd s;
  s.b = get_index(obj, "sgd", "b", 1);
  s.gamma = get_double(obj, "sgd", "gamma", 0.1);
  s.theta = get_double(obj, "sgd", "theta", 0.0);
  s.T = get_index(obj, "sgd", "T", 0);
  return s;
}

RegimeSpec parse_regime(const json& obj) {
  check_keys(obj, "regime", {"tag", "r", "alpha", "c_gamma", "c_b", "c_T", "c_M"});
  RegimeSpec r;
  r.tag = get_string(obj, "regime", "tag", "c1.2");
  r.r = get_double(obj, "regime", "r", 0.5);
  r.alpha = get_double(obj, "regime", "alpha", 1.0);
  r.constants.c_gamma = get_double(obj, "regime", "c_gamma", 1.0);
  r.constants.c_b = get_double(obj, "regime", "c_b", 1.0);
  r.constants.c_T = get_double(obj, "regime", "c_T", 1.0);
  r.constants.c_M = get_double(obj, "regime", "c_M", 1.0);
  return r;
}

std::vector<SweepAxis> parse_sweep(const json& obj) {
  if (!obj.is_object()) {
    throw ConfigError("config: 'sweep' must map axis names to value lists");
  }
  std::vector<SweepAxis> axes;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!it.value().is_array()) {
      throw ConfigError("config: 'sweep." + it.key() + "' must be an array");
    }
    SweepAxis axis;
    axis.name = it.key();
    for (const json& v : it.value()) {
      if (!v.is_number()) {
        throw ConfigError("config: 'sweep." + it.key() +
                          "' entries must be numbers");
      }
      axis.values.push_back(v.get<double>());
    }
    axes.push_back(std::move(axis));
  }
  return axes;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  if (!root.is_object()) {
    throw ConfigError("config: top level must be a JSON object");
  }
  check_keys(root, "",
             {"data", "features", "sgd", "regime", "memory_mode",
              "checkpoint_every", "sweep", "replications", "seed", "delta",
              "out_dir", "threads", "curve"});

  ExperimentConfig cfg;
  if (root.contains("data")) cfg.data = parse_data(root.at("data"));
  if (root.contains("features")) cfg.features = parse_features(root.at("features"));
  if (root.contains("sgd")) cfg.sgd = parse_sgd(root.at("sgd"));
  if (root.contains("regime")) cfg.regime = parse_regime(root.at("regime"));
  if (root.contains("memory_mode")) {
    try {
      cfg.memory_mode =
          memory_mode_from_string(get_string(root, "", "memory_mode", ""));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  cfg.checkpoint_every = get_index(root, "", "checkpoint_every", 0);
  if (root.contains("sweep")) cfg.sweep = parse_sweep(root.at("sweep"));
  cfg.replications =
      static_cast<int>(get_index(root, "", "replications", cfg.replications));
  if (root.contains("seed")) {
    const json& v = root.at("seed");
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
      throw ConfigError("config: 'seed' must be an integer");
    }
    cfg.seed = v.get<std::uint64_t>();
  }
  cfg.delta = get_double(root, "", "delta", cfg.delta);
  cfg.out_dir = get_string(root, "", "out_dir", cfg.out_dir);
  cfg.threads = static_cast<int>(get_index(root, "", "threads", cfg.threads));
  cfg.curve = get_bool(root, "", "curve", cfg.curve);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

}  // namespace rfsgd
