#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "plap/game.hpp"
#include "plap/graph.hpp"
#include "plap/operators.hpp"
#include "plap/variational.hpp"

namespace plap {

struct MulticlassLabels {
  std::vector<std::size_t> indices;
  std::vector<int> classes;
  int num_classes = 0;

  MulticlassLabels() = default;
  /// num_classes <= 0 infers max(class) + 1. Throws on duplicates, negative or
  /// out-of-range classes, or a class with no labeled vertex.
  MulticlassLabels(std::vector<std::size_t> idx, std::vector<int> cls, int num_classes = 0);

  std::size_t size() const { return indices.size(); }
};

/// n x M scores, row-major.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::size_t n, int classes) : n_(n), m_(classes), s_(n * classes, 0.0) {}

  std::size_t rows() const { return n_; }
  int classes() const { return m_; }
  double& at(std::size_t i, int c) { return s_[i * m_ + c]; }
  double at(std::size_t i, int c) const { return s_[i * m_ + c]; }
  const std::vector<double>& data() const { return s_; }

  /// argmax over classes, lowest class id on ties.
  int predict(std::size_t i) const;
  std::vector<int> predictions() const;

 private:
  std::size_t n_ = 0;
  int m_ = 0;
  std::vector<double> s_;
};

enum class SolverMethod { laplace, newton, newton_like, gradient_descent, semi_implicit };

std::string to_string(SolverMethod m);
SolverMethod solver_method_from_string(const std::string& name);
bool is_game_method(SolverMethod m);

/// Everything needed to run one binary solve.
struct ClassifyConfig {
  SolverMethod method = SolverMethod::newton;
  PExponent p{2.0};
  bool homotopy = true;        // newton / newton_like: standard ladder
  double positive = 1.0;       // label value for the class
  double negative = 0.0;       // label value for the rest
  SolverConfig variational;
  GameConfig game;             // game.p is overridden by p
};

/// Solves one binary problem with the configured method.
SolveResult solve_binary(const WeightedGraph& graph, const LabelSet& labels,
                         const ClassifyConfig& cfg);

/// Column c holds the solution of the problem with g = positive on class c
/// and negative on the other labeled vertices. Solver failures are rethrown
/// as SolverError naming the class.
ScoreMatrix one_vs_rest(const WeightedGraph& graph, const MulticlassLabels& labels,
                        const ClassifyConfig& cfg,
                        std::vector<SolveReport>* reports = nullptr);

/// Fraction of vertices in `mask` (all vertices when empty) whose predicted
/// class equals truth. Throws on an empty evaluation set.
double accuracy(const ScoreMatrix& scores, const std::vector<int>& truth,
                const std::vector<std::size_t>& mask = {});

/// `per_class` labeled vertices of every class, drawn without replacement.
MulticlassLabels sample_labels(const std::vector<int>& truth, int num_classes,
                               std::size_t per_class, std::uint64_t seed);

}  // namespace plap
