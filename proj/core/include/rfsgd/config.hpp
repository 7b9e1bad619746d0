#pragma once

#include <stdexcept>
#include <string>

#include "rfsgd/experiment.hpp"

namespace rfsgd {

// Config mistakes exit with a distinct status from runtime failures.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// JSON with // comments allowed. Unknown keys anywhere are a hard error.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace rfsgd
