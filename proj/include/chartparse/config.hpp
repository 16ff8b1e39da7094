#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "chartparse/model.hpp"
#include "chartparse/training.hpp"

namespace chartparse {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a training run needs. Serialized as flat `key = value` lines.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  std::string train_path;
  std::string dev_path;
  std::string model_out;
  std::string log_path;

  bool operator==(const RunConfig& other) const;
};

/// Throws ConfigError for unknown keys or malformed values.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
std::map<std::string, std::string> settings(const RunConfig& config);

/// Blank lines and `#` comments are skipped. Errors name the 1-based line.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig read_config(const std::string& path, RunConfig base = {});
std::string render_config(const RunConfig& config);

}  // namespace chartparse
