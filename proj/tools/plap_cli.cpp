// plap: synth | solve | classify | consistency | bench
//
// Exit codes: 0 success, 2 invalid arguments, 3 solver non-convergence,
// 4 I/O failure.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "plap/classify.hpp"
#include "plap/config.hpp"
#include "plap/continuum.hpp"
#include "plap/experiments.hpp"
#include "plap/graph.hpp"
#include "plap/io.hpp"
#include "plap/report.hpp"
#include "plap/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace plap;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 2;
constexpr int kNoConvergence = 3;
constexpr int kIo = 4;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::map<std::string, std::string> overrides;  // config key -> value
  std::vector<std::string> sets;                  // raw key=value
};

std::string utc_stamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

ExperimentConfig resolve(const Options& opt) {
  ExperimentConfig cfg;
  if (!opt.config.empty()) cfg.load(opt.config);
  for (const auto& kv : opt.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& [k, v] : opt.overrides) cfg.set(k, v);
  if (opt.seed) cfg.set("seed", std::to_string(*opt.seed));
  cfg.seed();  // mandatory
  return cfg;
}

// --out writes into that directory; otherwise <run.out>/<timestamp>-<hash>/.
fs::path run_dir(const ExperimentConfig& cfg, const Options& opt) {
  fs::path dir = opt.out.empty() ? fs::path(cfg.str("run.out")) / (utc_stamp() + "-" + cfg.hash())
                                 : fs::path(opt.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

std::ofstream open_file(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void close_file(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out = open_file(path);
  out << j.dump(2) << '\n';
  close_file(out, path);
}

json envelope(const std::string& command, const ExperimentConfig& cfg) {
  json j;
  j["version"] = version();
  j["command"] = command;
  j["config"] = cfg.to_json();
  return j;
}

void echo_config(const fs::path& dir, const ExperimentConfig& cfg) {
  const fs::path path = dir / "config.txt";
  std::ofstream out = open_file(path);
  out << cfg.canonical();
  close_file(out, path);
}

// ---- synth ---------------------------------------------------------------

int cmd_synth(const Options& opt) {
  const ExperimentConfig cfg = resolve(opt);
  const std::size_t n = cfg.count("synth.n");
  const std::size_t d = cfg.count("synth.d");
  const std::size_t m = cfg.count("synth.m");
  if (m > n) throw std::invalid_argument("synth: m must not exceed n");
  const SyntheticProblem prob = problem_s(n, d, m, cfg.seed());
  const std::size_t K = std::min(cfg.count("graph.K"), n - 1);
  const WeightedGraph graph =
      n > 1 ? knn_graph(prob.points, K, weight_rule(cfg), cfg.count("graph.brute_force_limit"))
            : WeightedGraph::from_edges(1, {});

  const fs::path dir = run_dir(cfg, opt);
  echo_config(dir, cfg);
  const std::string fmt = cfg.str("synth.points_format");
  fs::path points_path;
  if (fmt == "binary") {
    points_path = dir / "points.bin";
    write_points_binary(points_path.string(), prob.points);
  } else if (fmt == "csv") {
    points_path = dir / "points.csv";
    write_points_csv(points_path.string(), prob.points);
  } else {
    throw std::invalid_argument("synth.points_format must be binary or csv");
  }
  write_labels_csv((dir / "labels.csv").string(), prob.labels);
  write_graph_cache((dir / "graph.bin").string(), graph);

  json j = envelope("synth", cfg);
  j["n"] = n;
  j["d"] = d;
  j["m"] = m;
  j["K"] = K;
  j["nnz"] = graph.nnz();
  j["sigma"] = graph.sigma();
  j["connected"] = is_connected(graph);
  j["files"] = {points_path.filename().string(), "labels.csv", "graph.bin"};
  write_json(dir / "report.json", j);
  std::cout << dir.string() << '\n';
  return kOk;
}

// ---- solve ---------------------------------------------------------------

int cmd_solve(const Options& opt) {
  const ExperimentConfig cfg = resolve(opt);
  WeightedGraph graph;
  LabelSet labels;
  std::size_t dim = cfg.count("synth.d");
  std::optional<PointCloud> points;
  if (!cfg.str("input.points").empty()) {
    points = read_points(cfg.str("input.points"));
    dim = points->dim();
  }
  if (!cfg.str("input.graph").empty()) {
    graph = read_graph_cache(cfg.str("input.graph"));
  } else if (points) {
    graph = knn_graph(*points, cfg.count("graph.K"), weight_rule(cfg),
                      cfg.count("graph.brute_force_limit"));
  }
  if (!cfg.str("input.labels").empty()) labels = read_labels_csv(cfg.str("input.labels"));
  if (graph.size() == 0 || labels.size() == 0) {
    if (!cfg.str("input.graph").empty() || !cfg.str("input.points").empty() ||
        !cfg.str("input.labels").empty()) {
      throw std::invalid_argument("solve: need both a graph (input.graph or input.points) "
                                  "and input.labels");
    }
    const SyntheticProblem prob =
        problem_s(cfg.count("synth.n"), cfg.count("synth.d"), cfg.count("synth.m"), cfg.seed());
    graph = knn_graph(prob.points, cfg.count("graph.K"), weight_rule(cfg),
                      cfg.count("graph.brute_force_limit"));
    labels = prob.labels;
  }
  if (!cfg.str("solve.dim").empty()) dim = cfg.count("solve.dim");

  const ClassifyConfig ccfg = classify_config(cfg, dim);
  const fs::path dir = run_dir(cfg, opt);
  echo_config(dir, cfg);

  SolveResult res;
  int code = kOk;
  std::string error;
  try {
    res = solve_binary(graph, labels, ccfg);
  } catch (const SolverError& e) {
    res.report = e.report();
    error = e.what();
    code = kNoConvergence;
  }

  json j = envelope("solve", cfg);
  j["report"] = res.report.to_json(false);
  if (!error.empty()) j["error"] = error;
  write_json(dir / "report.json", j);
  write_json(dir / "timing.json", json{{"wall_time_ms", res.report.wall_time_ms}});

  const fs::path hist = dir / "residuals.csv";
  std::ofstream h = open_file(hist);
  h.precision(17);
  h << "stage,p,iteration,residual\n";
  for (std::size_t s = 0; s < res.report.stages.size(); ++s) {
    const StageReport& st = res.report.stages[s];
    for (std::size_t k = 0; k < st.residuals.size(); ++k) {
      h << s << ',' << json_number(st.p).dump() << ',' << k + 1 << ',' << st.residuals[k] << '\n';
    }
  }
  close_file(h, hist);

  if (!res.u.empty()) {
    const fs::path sol = dir / "solution.csv";
    std::ofstream out = open_file(sol);
    write_field_csv(out, res.u);
    close_file(out, sol);
  }
  std::cout << dir.string() << '\n';
  if (code != kOk) std::cerr << "solver did not converge: " << error << '\n';
  return code;
}

// ---- classify ------------------------------------------------------------

std::vector<PExponent> p_list(const ExperimentConfig& cfg) {
  std::vector<PExponent> out;
  for (const auto& s : cfg.list("classify.p_list")) {
    out.push_back(PExponent::parse(s, cfg.real("solve.lambda")));
  }
  if (out.empty()) throw std::invalid_argument("classify.p_list is empty");
  return out;
}

void write_predictions(const fs::path& path, const ScoreMatrix& scores) {
  std::ofstream out = open_file(path);
  write_predictions_csv(out, scores);
  close_file(out, path);
}

int cmd_classify(const Options& opt) {
  const ExperimentConfig cfg = resolve(opt);
  const std::string dataset = cfg.str("classify.dataset");
  const std::vector<PExponent> ps = p_list(cfg);
  const std::vector<std::size_t> per_class = cfg.counts("classify.labels_per_class");
  if (per_class.empty()) throw std::invalid_argument("classify.labels_per_class is empty");
  const SolverMethod method = solver_method_from_string(cfg.str("classify.method"));

  const fs::path dir = run_dir(cfg, opt);
  echo_config(dir, cfg);
  std::vector<AccuracyRow> rows;
  json j = envelope("classify", cfg);

  if (dataset == "two_gaussians") {
    TwoGaussianSweep sweep;
    sweep.d = cfg.count("classify.d");
    sweep.separation = cfg.real("classify.separation");
    sweep.K = cfg.count("classify.K");
    sweep.n_list = cfg.counts("classify.n_list");
    sweep.p_list = ps;
    sweep.labels_per_class = per_class;
    sweep.label_pool = cfg.count("classify.label_pool");
    sweep.seeds = cfg.count("classify.seeds");
    sweep.seed = cfg.seed();
    sweep.base = classify_config(cfg, sweep.d);
    sweep.base.method = method;
    const std::size_t n_max = *std::max_element(sweep.n_list.begin(), sweep.n_list.end());
    rows = two_gaussian_sweep(sweep, [&](const AccuracyRow& r, const ScoreMatrix& s) {
      if (r.seed == sweep.seed && r.n == n_max && r.labels_per_class == per_class.front()) {
        write_predictions(dir / ("predictions_p" + r.p + ".csv"), s);
      }
    });
  } else if (dataset == "points" || dataset == "idx") {
    PointCloud pts;
    std::vector<int> truth;
    if (dataset == "points") {
      pts = read_points(cfg.str("classify.points"));
      const MulticlassLabels all = read_class_labels_csv(cfg.str("classify.truth"));
      truth.assign(pts.size(), -1);
      for (std::size_t t = 0; t < all.size(); ++t) {
        if (all.indices[t] >= pts.size()) throw std::invalid_argument("classify.truth: index out of range");
        truth[all.indices[t]] = all.classes[t];
      }
      for (int c : truth) {
        if (c < 0) throw std::invalid_argument("classify.truth must give every vertex a class");
      }
    } else {
      const std::size_t limit = cfg.count("classify.idx_limit");
      pts = read_idx_images(cfg.str("classify.idx_images"), limit);
      truth = read_idx_labels(cfg.str("classify.idx_labels"), limit);
      if (truth.size() != pts.size()) throw IoError("IDX image and label counts differ");
      j["note"] = "raw-pixel features; not equivalent to scattering-transform features";
    }
    const int classes = *std::max_element(truth.begin(), truth.end()) + 1;
    const WeightedGraph graph = knn_graph(pts, cfg.count("classify.K"), weight_rule(cfg),
                                          cfg.count("graph.brute_force_limit"));
    if (!is_connected(graph)) {
      throw std::invalid_argument("graph is disconnected; increase classify.K");
    }
    ClassifyConfig base = classify_config(cfg, pts.dim());
    base.method = method;
    for (std::size_t s = 0; s < cfg.count("classify.seeds"); ++s) {
      const std::uint64_t seed = cfg.seed() + s;
      for (std::size_t m : per_class) {
        const MulticlassLabels labels = sample_labels(truth, classes, m, seed * 7919 + m);
        std::vector<char> labeled(pts.size(), 0);
        for (std::size_t i : labels.indices) labeled[i] = 1;
        std::vector<std::size_t> mask;
        for (std::size_t i = 0; i < pts.size(); ++i) {
          if (!labeled[i]) mask.push_back(i);
        }
        for (const PExponent& p : ps) {
          ClassifyConfig c = base;
          c.p = p;
          if (!p.is_infinite() && p.value() == 2.0) c.method = SolverMethod::laplace;
          const ScoreMatrix scores = one_vs_rest(graph, labels, c);
          rows.push_back({p.str(), to_string(c.method), m, pts.size(), seed,
                          accuracy(scores, truth, mask)});
          if (s == 0 && m == per_class.front()) {
            write_predictions(dir / ("predictions_p" + p.str() + ".csv"), scores);
          }
        }
      }
    }
  } else {
    throw std::invalid_argument("classify.dataset must be two_gaussians, points or idx");
  }

  const fs::path acc = dir / "accuracy.csv";
  std::ofstream out = open_file(acc);
  write_accuracy_csv(out, rows);
  close_file(out, acc);

  json summary = json::array();
  std::map<std::tuple<std::string, std::size_t, std::size_t>, bool> seen;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(r.p, r.labels_per_class, r.n);
    if (seen[key]) continue;
    seen[key] = true;
    summary.push_back({{"p", r.p},
                       {"method", r.method},
                       {"labels_per_class", r.labels_per_class},
                       {"n", r.n},
                       {"median_accuracy", median_accuracy(rows, r.p, r.labels_per_class, r.n)}});
  }
  j["summary"] = summary;
  write_json(dir / "report.json", j);
  std::cout << dir.string() << '\n';
  return kOk;
}

// ---- consistency ---------------------------------------------------------

int cmd_consistency(const Options& opt) {
  const ExperimentConfig cfg = resolve(opt);
  const std::size_t d = cfg.count("consistency.d");
  const ContinuumProblem problem = ContinuumProblem::preset(cfg.str("consistency.preset"), d);
  const Variant variant = variant_from_string(cfg.str("consistency.variant"));
  const PExponent p = PExponent::parse(cfg.str("consistency.p"));
  const std::vector<std::size_t> n_list = cfg.counts("consistency.n_list");
  if (n_list.empty()) throw std::invalid_argument("consistency.n_list is empty");
  std::vector<std::uint64_t> seeds;
  for (std::size_t s = 0; s < cfg.count("consistency.seeds"); ++s) seeds.push_back(cfg.seed() + s);
  const ScaleRule rule = scale_rule(cfg);
  const Kernel kernel = kernel_from_config(cfg, d);

  std::vector<ConsistencyRecord> rows;
  json summary = json::array();
  for (const auto& fname : cfg.list("consistency.families")) {
    const Family family = family_from_string(fname);
    const auto part = consistency_experiment(problem, family, variant, p, n_list, seeds, rule, kernel);
    // Seeds whose median error at the largest n is below the one at the smallest n.
    std::size_t improved = 0;
    const std::size_t lo = *std::min_element(n_list.begin(), n_list.end());
    const std::size_t hi = *std::max_element(n_list.begin(), n_list.end());
    for (std::uint64_t s : seeds) {
      double e_lo = 0.0;
      double e_hi = 0.0;
      for (const auto& r : part) {
        if (r.seed != s) continue;
        if (r.n == lo) e_lo = r.err_median;
        if (r.n == hi) e_hi = r.err_median;
      }
      if (e_hi < e_lo) ++improved;
    }
    summary.push_back({{"family", fname}, {"seeds_improved", improved}, {"seeds", seeds.size()}});
    rows.insert(rows.end(), part.begin(), part.end());
  }

  const fs::path dir = run_dir(cfg, opt);
  echo_config(dir, cfg);
  const fs::path csv = dir / "consistency.csv";
  std::ofstream out = open_file(csv);
  write_consistency_csv(out, rows);
  close_file(out, csv);

  json j = envelope("consistency", cfg);
  j["summary"] = summary;
  if (cfg.flag("consistency.drift")) {
    const ContinuumProblem drift = ContinuumProblem::preset("drift-exp", 2);
    json dj = json::array();
    for (std::uint64_t s : seeds) {
      const DriftRecord r =
          drift_experiment(drift, cfg.count("consistency.drift_n"), s, ScaleRule{}, Kernel::gaussian(2));
      dj.push_back({{"seed", s},
                    {"k", r.k},
                    {"eps", r.eps},
                    {"interior_count", r.interior_count},
                    {"knn_median", r.knn_median},
                    {"target_median", r.target_median},
                    {"eps_median", r.eps_median},
                    {"eps_abs_median", r.eps_abs_median},
                    {"knn_abs_median", r.knn_abs_median},
                    {"within_30_percent", r.within_30_percent},
                    {"eps_three_times_smaller", r.eps_three_times_smaller}});
    }
    j["drift"] = dj;
  }
  write_json(dir / "report.json", j);
  std::cout << dir.string() << '\n';
  return kOk;
}

// ---- bench ---------------------------------------------------------------

int cmd_bench(const Options& opt) {
  const ExperimentConfig cfg = resolve(opt);
  BenchSpec spec;
  for (const auto& m : cfg.list("bench.methods")) spec.methods.push_back(solver_method_from_string(m));
  spec.n_list = cfg.counts("bench.n_list");
  spec.d_list = cfg.counts("bench.d_list");
  spec.p = PExponent::parse(cfg.str("bench.p"), cfg.real("solve.lambda"));
  spec.tol = cfg.real("bench.tol");
  spec.trials = cfg.count("bench.trials");
  spec.m = cfg.count("bench.m");
  spec.K = cfg.count("bench.K");
  spec.seed = cfg.seed();
  spec.base = classify_config(cfg, 1);
  const auto rows = bench(spec);

  const fs::path dir = run_dir(cfg, opt);
  echo_config(dir, cfg);
  const fs::path csv = dir / "timing.csv";
  std::ofstream out = open_file(csv);
  write_bench_csv(out, rows);
  close_file(out, csv);
  write_json(dir / "report.json", envelope("bench", cfg));
  std::cout << dir.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph p-Laplacian semi-supervised learning toolkit"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);
  Options opt;
  std::string p, method, tol, n, d, m, K;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "key = value configuration file");
    sub->add_option("--seed", opt.seed, "random seed (mandatory unless set in the config)");
    sub->add_option("--out", opt.out, "output directory (default runs/<timestamp>-<hash>)");
    sub->add_option("--set", opt.sets, "extra key=value override, repeatable");
  };
  auto flag = [&](CLI::App* sub, const std::string& name, std::string& target,
                  const std::string& help) { sub->add_option(name, target, help); };

  CLI::App* synth = app.add_subcommand("synth", "generate problem S: points, labels, graph cache");
  common(synth);
  flag(synth, "--n", n, "number of points");
  flag(synth, "--d", d, "dimension");
  flag(synth, "--m", m, "number of labels");
  flag(synth, "--K", K, "nearest neighbors");

  CLI::App* solve = app.add_subcommand("solve", "solve one p-Laplace problem");
  common(solve);
  flag(solve, "--p", p, "exponent (number or inf)");
  flag(solve, "--method", method, "laplace|newton|newton_like|gradient_descent|semi_implicit");
  flag(solve, "--tol", tol, "scaled residual tolerance");
  flag(solve, "--n", n, "problem S size when no input is given");
  flag(solve, "--d", d, "problem S dimension");
  flag(solve, "--m", m, "problem S labels");
  flag(solve, "--K", K, "nearest neighbors");

  CLI::App* classify = app.add_subcommand("classify", "one-vs-rest classification sweep");
  common(classify);
  flag(classify, "--p", p, "comma separated exponents");
  flag(classify, "--method", method, "solver for p > 2");
  flag(classify, "--tol", tol, "solver tolerance");
  flag(classify, "--n", n, "comma separated sizes");
  flag(classify, "--d", d, "dimension of the synthetic data");
  flag(classify, "--m", m, "labels per class (comma separated)");
  flag(classify, "--K", K, "nearest neighbors");

  CLI::App* consistency = app.add_subcommand("consistency", "discrete-to-continuum operator check");
  common(consistency);
  flag(consistency, "--p", p, "exponent");
  flag(consistency, "--n", n, "comma separated sizes");
  flag(consistency, "--d", d, "dimension");

  CLI::App* benchc = app.add_subcommand("bench", "solver timing on problem S");
  common(benchc);
  flag(benchc, "--p", p, "exponent");
  flag(benchc, "--method", method, "comma separated methods");
  flag(benchc, "--tol", tol, "tolerance");
  flag(benchc, "--n", n, "comma separated sizes");
  flag(benchc, "--d", d, "comma separated dimensions");
  flag(benchc, "--m", m, "labels");
  flag(benchc, "--K", K, "nearest neighbors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  auto put = [&](const std::string& key, const std::string& v) {
    if (!v.empty()) opt.overrides[key] = v;
  };
  try {
    if (synth->parsed()) {
      put("synth.n", n);
      put("synth.d", d);
      put("synth.m", m);
      put("graph.K", K);
      return cmd_synth(opt);
    }
    if (solve->parsed()) {
      put("solve.p", p);
      put("solve.method", method);
      put("solve.tol", tol);
      put("synth.n", n);
      put("synth.d", d);
      put("synth.m", m);
      put("graph.K", K);
      return cmd_solve(opt);
    }
    if (classify->parsed()) {
      put("classify.p_list", p);
      put("classify.method", method);
      put("solve.tol", tol);
      put("classify.n_list", n);
      put("classify.d", d);
      put("classify.labels_per_class", m);
      put("classify.K", K);
      return cmd_classify(opt);
    }
    if (consistency->parsed()) {
      put("consistency.p", p);
      put("consistency.n_list", n);
      put("consistency.d", d);
      return cmd_consistency(opt);
    }
    put("bench.p", p);
    put("bench.methods", method);
    put("bench.tol", tol);
    put("bench.n_list", n);
    put("bench.d_list", d);
    put("bench.m", m);
    put("bench.K", K);
    return cmd_bench(opt);
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNoConvergence;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
