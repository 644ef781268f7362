#include "plap/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "plap/io.hpp"

namespace plap {

namespace {

// Registered keys and defaults. Empty means "unset" where a key is optional.
const std::vector<std::pair<std::string, std::string>>& defaults() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"run.out", "runs"},
      {"synth.n", "10000"},
      {"synth.d", "10"},
      {"synth.m", "10"},
      {"synth.points_format", "binary"},
      {"graph.K", "10"},
      {"graph.weights", "gaussian"},
      {"graph.brute_force_limit", "4096"},
      {"input.points", ""},
      {"input.graph", ""},
      {"input.labels", ""},
      {"solve.method", "newton"},
      {"solve.p", "2"},
      {"solve.lambda", "1"},
      {"solve.tol", "1e-8"},
      {"solve.homotopy", "true"},
      {"solve.max_outer", "50"},
      {"solve.dim", ""},
      {"game.alpha", ""},
      {"game.eps_reg", "0"},
      {"game.max_iter", "2000000"},
      {"game.theta_policy", "minimal"},
      {"game.theta_value", "1"},
      {"game.range", "neighbors"},
      {"game.stall_window", "50"},
      {"linear.method", "cg"},
      {"linear.preconditioner", "jacobi"},
      {"linear.drop_tol", "0.1"},
      {"linear.tol", "1e-10"},
      {"linear.maxit", "0"},
      {"linear.restart", "50"},
      {"classify.dataset", "two_gaussians"},
      {"classify.points", ""},
      {"classify.truth", ""},
      {"classify.idx_images", ""},
      {"classify.idx_labels", ""},
      {"classify.idx_limit", "0"},
      {"classify.n_list", "512,1024,2048,4096,8192"},
      {"classify.d", "5"},
      {"classify.separation", "4"},
      {"classify.K", "10"},
      {"classify.p_list", "2,9"},
      {"classify.method", "newton_like"},
      {"classify.labels_per_class", "1"},
      {"classify.label_pool", "512"},
      {"classify.seeds", "5"},
      {"classify.positive", "1"},
      {"classify.negative", "0"},
      {"consistency.preset", "uniform-quadratic"},
      {"consistency.d", "2"},
      {"consistency.families", "eps_ball,knn_nonsym,knn_sym"},
      {"consistency.variant", "infinity"},
      {"consistency.p", "inf"},
      {"consistency.n_list", "1024,16384"},
      {"consistency.seeds", "10"},
      {"consistency.eps_const", "0.57"},
      {"consistency.k_const", "1"},
      {"consistency.k_power", "0.6"},
      {"consistency.kernel", "gaussian"},
      {"consistency.drift", "false"},
      {"consistency.drift_n", "32768"},
      {"bench.methods", "newton,newton_like,semi_implicit,gradient_descent"},
      {"bench.n_list", "64,128,256,512,1024,2048,4096,8192,16384,32768"},
      {"bench.d_list", "2,5,10"},
      {"bench.p", "11"},
      {"bench.tol", "1e-7"},
      {"bench.trials", "3"},
      {"bench.m", "10"},
      {"bench.K", "10"},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& what) {
  throw std::invalid_argument("config key '" + key + "': '" + value + "' is not " + what);
}

double to_real(const std::string& key, const std::string& s) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) bad_value(key, s, "a number");
  return v;
}

std::uint64_t to_count(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    bad_value(key, s, "a nonnegative integer");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  for (const auto& [k, v] : defaults()) values_[k] = v;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "seed") {
    to_count(key, value);
    values_["seed"] = value;
    seed_set_ = true;
    return;
  }
  if (!known(key)) throw std::invalid_argument("unknown config key '" + key + "'");
  values_[key] = value;
}

void ExperimentConfig::parse(const std::string& text, const std::string& origin) {
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      set(key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  parse(buf.str(), path);
}

std::uint64_t ExperimentConfig::seed() const {
  if (!seed_set_) throw std::invalid_argument("seed is mandatory (config 'seed = ...' or --seed)");
  return to_count("seed", values_.at("seed"));
}

const std::string& ExperimentConfig::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("unknown config key '" + key + "'");
  return it->second;
}

double ExperimentConfig::real(const std::string& key) const { return to_real(key, str(key)); }

std::size_t ExperimentConfig::count(const std::string& key) const {
  return static_cast<std::size_t>(to_count(key, str(key)));
}

bool ExperimentConfig::flag(const std::string& key) const {
  const std::string& v = str(key);
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  bad_value(key, v, "a boolean");
}

std::vector<std::string> ExperimentConfig::list(const std::string& key) const {
  return split_list(str(key));
}

std::vector<double> ExperimentConfig::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& s : list(key)) out.push_back(to_real(key, s));
  return out;
}

std::vector<std::size_t> ExperimentConfig::counts(const std::string& key) const {
  std::vector<std::size_t> out;
  for (const auto& s : list(key)) out.push_back(static_cast<std::size_t>(to_count(key, s)));
  return out;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  return j;
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LinearSolverOptions linear_options(const ExperimentConfig& cfg) {
  LinearSolverOptions o;
  const std::string& m = cfg.str("linear.method");
  if (m == "cg") {
    o.method = LinearMethod::cg;
  } else if (m == "gmres") {
    o.method = LinearMethod::gmres;
  } else {
    bad_value("linear.method", m, "cg or gmres");
  }
  o.preconditioner = preconditioner_from_string(cfg.str("linear.preconditioner"));
  o.drop_tol = cfg.real("linear.drop_tol");
  o.tol = cfg.real("linear.tol");
  o.maxit = cfg.count("linear.maxit");
  o.restart = cfg.count("linear.restart");
  return o;
}

SolverConfig solver_config(const ExperimentConfig& cfg, std::size_t dim) {
  SolverConfig s;
  s.tol = cfg.real("solve.tol");
  s.max_outer = cfg.count("solve.max_outer");
  s.dim = dim;
  s.linear = linear_options(cfg);
  if (cfg.has_seed()) s.seed = cfg.seed();
  return s;
}

GameConfig game_config(const ExperimentConfig& cfg) {
  GameConfig g;
  g.p = PExponent::parse(cfg.str("solve.p"), cfg.real("solve.lambda"));
  if (!cfg.str("game.alpha").empty()) g.alpha = cfg.real("game.alpha");
  g.eps_reg = cfg.real("game.eps_reg");
  g.tol = cfg.real("solve.tol");
  g.max_iter = cfg.count("game.max_iter");
  g.theta_policy = theta_policy_from_string(cfg.str("game.theta_policy"));
  g.theta_value = cfg.real("game.theta_value");
  const std::string& range = cfg.str("game.range");
  if (range == "neighbors") {
    g.range = InfinityRange::neighbors;
  } else if (range == "all_vertices") {
    g.range = InfinityRange::all_vertices;
  } else {
    bad_value("game.range", range, "neighbors or all_vertices");
  }
  g.stall_window = cfg.count("game.stall_window");
  g.linear = linear_options(cfg);
  if (cfg.has_seed()) g.seed = cfg.seed();
  return g;
}

ClassifyConfig classify_config(const ExperimentConfig& cfg, std::size_t dim) {
  ClassifyConfig c;
  c.method = solver_method_from_string(cfg.str("solve.method"));
  c.p = PExponent::parse(cfg.str("solve.p"), cfg.real("solve.lambda"));
  c.homotopy = cfg.flag("solve.homotopy");
  c.positive = cfg.real("classify.positive");
  c.negative = cfg.real("classify.negative");
  c.variational = solver_config(cfg, dim);
  c.game = game_config(cfg);
  return c;
}

ScaleRule scale_rule(const ExperimentConfig& cfg) {
  ScaleRule r;
  r.eps_const = cfg.real("consistency.eps_const");
  r.k_const = cfg.real("consistency.k_const");
  r.k_power = cfg.real("consistency.k_power");
  return r;
}

Kernel kernel_from_config(const ExperimentConfig& cfg, std::size_t dim) {
  const std::string& k = cfg.str("consistency.kernel");
  if (k == "gaussian") return Kernel::gaussian(dim);
  if (k == "bump") return Kernel::bump(dim);
  bad_value("consistency.kernel", k, "gaussian or bump");
}

WeightRule weight_rule(const ExperimentConfig& cfg) {
  const std::string& w = cfg.str("graph.weights");
  if (w == "gaussian") return WeightRule::gaussian;
  if (w == "unit") return WeightRule::unit;
  bad_value("graph.weights", w, "gaussian or unit");
}

}  // namespace plap
