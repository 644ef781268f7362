#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "plap/classify.hpp"
#include "plap/continuum.hpp"
#include "plap/game.hpp"
#include "plap/graph.hpp"
#include "plap/kernel.hpp"
#include "plap/sparse.hpp"
#include "plap/variational.hpp"

namespace plap {

/// key = value settings with dotted section names and '#' comments.
///
/// Every key has a registered default; assigning an unknown key throws
/// std::invalid_argument. The seed has no default and must be set before
/// seed() is read.
class ExperimentConfig {
 public:
  ExperimentConfig();

  /// Applies "key = value" lines; `origin` names the source in errors.
  void parse(const std::string& text, const std::string& origin = "config");
  void load(const std::string& path);
  void set(const std::string& key, const std::string& value);

  bool known(const std::string& key) const { return values_.count(key) > 0; }
  bool has_seed() const { return seed_set_; }
  std::uint64_t seed() const;

  const std::string& str(const std::string& key) const;
  double real(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  bool flag(const std::string& key) const;
  std::vector<std::string> list(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::size_t> counts(const std::string& key) const;

  /// Every key with its resolved value (seed included when set).
  nlohmann::json to_json() const;
  /// Canonical "key = value" text of all resolved values.
  std::string canonical() const;
  /// FNV-1a of canonical(), 16 hex digits.
  std::string hash() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  bool seed_set_ = false;
};

// Builders from the resolved configuration.
LinearSolverOptions linear_options(const ExperimentConfig& cfg);
SolverConfig solver_config(const ExperimentConfig& cfg, std::size_t dim);
GameConfig game_config(const ExperimentConfig& cfg);
ClassifyConfig classify_config(const ExperimentConfig& cfg, std::size_t dim);
ScaleRule scale_rule(const ExperimentConfig& cfg);
Kernel kernel_from_config(const ExperimentConfig& cfg, std::size_t dim);
WeightRule weight_rule(const ExperimentConfig& cfg);

}  // namespace plap
