#include "plap/classify.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

namespace plap {

MulticlassLabels::MulticlassLabels(std::vector<std::size_t> idx, std::vector<int> cls,
                                   int m) {
  if (idx.size() != cls.size()) {
    throw std::invalid_argument("multiclass labels: index and class counts differ");
  }
  if (idx.empty()) throw std::invalid_argument("multiclass labels: empty");
  int max_cls = -1;
  for (int c : cls) {
    if (c < 0) throw std::invalid_argument("multiclass labels: negative class id");
    max_cls = std::max(max_cls, c);
  }
  num_classes = m > 0 ? m : max_cls + 1;
  if (max_cls >= num_classes) {
    throw std::invalid_argument("multiclass labels: class id out of range");
  }
  std::vector<std::size_t> order(idx.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return idx[a] < idx[b]; });
  std::vector<char> seen(static_cast<std::size_t>(num_classes), 0);
  for (std::size_t t : order) {
    if (!indices.empty() && indices.back() == idx[t]) {
      throw std::invalid_argument("multiclass labels: duplicate vertex " +
                                  std::to_string(idx[t]));
    }
    indices.push_back(idx[t]);
    classes.push_back(cls[t]);
    seen[static_cast<std::size_t>(cls[t])] = 1;
  }
  for (int c = 0; c < num_classes; ++c) {
    if (!seen[static_cast<std::size_t>(c)]) {
      throw std::invalid_argument("multiclass labels: class " + std::to_string(c) +
                                  " has no labeled vertex");
    }
  }
}

int ScoreMatrix::predict(std::size_t i) const {
  int best = 0;
  for (int c = 1; c < m_; ++c) {
    if (at(i, c) > at(i, best)) best = c;
  }
  return best;
}

std::vector<int> ScoreMatrix::predictions() const {
  std::vector<int> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = predict(i);
  return out;
}

std::string to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::laplace: return "laplace";
    case SolverMethod::newton: return "newton";
    case SolverMethod::newton_like: return "newton_like";
    case SolverMethod::gradient_descent: return "gradient_descent";
    case SolverMethod::semi_implicit: return "semi_implicit";
  }
  return "unknown";
}

SolverMethod solver_method_from_string(const std::string& name) {
  if (name == "laplace") return SolverMethod::laplace;
  if (name == "newton") return SolverMethod::newton;
  if (name == "newton_like" || name == "newton-like") return SolverMethod::newton_like;
  if (name == "gradient_descent" || name == "gd") return SolverMethod::gradient_descent;
  if (name == "semi_implicit" || name == "semi-implicit") return SolverMethod::semi_implicit;
  throw std::invalid_argument("unknown solver method '" + name + "'");
}

bool is_game_method(SolverMethod m) {
  return m == SolverMethod::newton_like || m == SolverMethod::gradient_descent ||
         m == SolverMethod::semi_implicit;
}

SolveResult solve_binary(const WeightedGraph& graph, const LabelSet& labels,
                         const ClassifyConfig& cfg) {
  const PExponent& p = cfg.p;
  if (cfg.method == SolverMethod::laplace || (!p.is_infinite() && p.value() == 2.0 &&
                                              cfg.method == SolverMethod::newton)) {
    return solve_laplace(graph, labels, cfg.variational);
  }
  if (cfg.method == SolverMethod::newton) {
    if (p.is_infinite()) {
      throw std::invalid_argument("Newton's method needs finite p");
    }
    std::optional<HomotopySchedule> schedule;
    if (cfg.homotopy && p.value() > 3.0) schedule = HomotopySchedule::standard(p.value());
    return solve_variational(graph, labels, p.value(), schedule, cfg.variational);
  }
  GameConfig game = cfg.game;
  game.p = p;
  switch (cfg.method) {
    case SolverMethod::newton_like: {
      std::optional<HomotopySchedule> schedule;
      if (cfg.homotopy && !p.is_infinite() && p.value() > 3.0) {
        schedule = HomotopySchedule::standard(p.value());
      }
      return newton_like_solve(graph, labels, game, schedule);
    }
    case SolverMethod::gradient_descent: return gradient_descent_solve(graph, labels, game);
    default: return semi_implicit_solve(graph, labels, game);
  }
}

ScoreMatrix one_vs_rest(const WeightedGraph& graph, const MulticlassLabels& labels,
                        const ClassifyConfig& cfg, std::vector<SolveReport>* reports) {
  if (labels.num_classes < 1) throw std::invalid_argument("one_vs_rest: no classes");
  if (!labels.indices.empty() && labels.indices.back() >= graph.size()) {
    throw std::invalid_argument("one_vs_rest: labeled vertex out of range");
  }
  ScoreMatrix scores(graph.size(), labels.num_classes);
  if (reports) reports->clear();
  for (int c = 0; c < labels.num_classes; ++c) {
    std::vector<double> g(labels.size());
    for (std::size_t t = 0; t < labels.size(); ++t) {
      g[t] = labels.classes[t] == c ? cfg.positive : cfg.negative;
    }
    const LabelSet binary(labels.indices, std::move(g));
    SolveResult res;
    try {
      res = solve_binary(graph, binary, cfg);
    } catch (const SolverError& e) {
      throw SolverError("class " + std::to_string(c) + ": " + e.what(), e.report());
    }
    for (std::size_t i = 0; i < graph.size(); ++i) scores.at(i, c) = res.u[i];
    if (reports) reports->push_back(std::move(res.report));
  }
  return scores;
}

double accuracy(const ScoreMatrix& scores, const std::vector<int>& truth,
                const std::vector<std::size_t>& mask) {
  if (truth.size() != scores.rows()) {
    throw std::invalid_argument("accuracy: truth length does not match scores");
  }
  std::size_t total = 0;
  std::size_t hits = 0;
  auto count = [&](std::size_t i) {
    ++total;
    if (scores.predict(i) == truth[i]) ++hits;
  };
  if (mask.empty()) {
    for (std::size_t i = 0; i < truth.size(); ++i) count(i);
  } else {
    for (std::size_t i : mask) {
      if (i >= truth.size()) throw std::invalid_argument("accuracy: mask out of range");
      count(i);
    }
  }
  if (total == 0) throw std::invalid_argument("accuracy: empty evaluation set");
  return static_cast<double>(hits) / static_cast<double>(total);
}

MulticlassLabels sample_labels(const std::vector<int>& truth, int num_classes,
                               std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx;
  std::vector<int> cls;
  for (int c = 0; c < num_classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] == c) members.push_back(i);
    }
    if (members.size() < per_class) {
      throw std::invalid_argument("sample_labels: class " + std::to_string(c) +
                                  " has too few members");
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (std::size_t t = 0; t < per_class; ++t) {
      idx.push_back(members[t]);
      cls.push_back(c);
    }
  }
  return MulticlassLabels(std::move(idx), std::move(cls), num_classes);
}

}  // namespace plap
