#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "plap/classify.hpp"
#include "plap/experiments.hpp"
#include "plap/graph.hpp"
#include "plap/synthetic.hpp"

using namespace plap;

namespace {

// Two 10-vertex cliques joined by one weak edge 9 - 10.
WeightedGraph two_clusters() {
  std::vector<WeightedGraph::Edge> e;
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < 10; ++i) {
      for (std::size_t j = 0; j < 10; ++j) {
        if (i != j) e.push_back({10 * c + i, 10 * c + j, 1.0});
      }
    }
  }
  e.push_back({9, 10, 0.01});
  e.push_back({10, 9, 0.01});
  return WeightedGraph::from_edges(20, std::move(e));
}

std::vector<ClassifyConfig> all_methods() {
  std::vector<ClassifyConfig> out;
  ClassifyConfig lap;
  lap.method = SolverMethod::laplace;
  out.push_back(lap);
  for (SolverMethod m : {SolverMethod::newton, SolverMethod::newton_like,
                         SolverMethod::gradient_descent, SolverMethod::semi_implicit}) {
    ClassifyConfig c;
    c.method = m;
    c.p = PExponent(4.0);
    c.game.tol = 1e-8;
    out.push_back(c);
  }
  ClassifyConfig inf;
  inf.method = SolverMethod::gradient_descent;
  inf.p = PExponent::infinity();
  inf.game.tol = 1e-8;
  out.push_back(inf);
  return out;
}

}  // namespace

TEST_SUITE("ssl_classify") {
  TEST_CASE("MulticlassLabels validation") {
    const MulticlassLabels l({3, 1}, {1, 0});
    CHECK(l.num_classes == 2);
    CHECK_THROWS_AS(MulticlassLabels({1, 1}, {0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(MulticlassLabels({1, 2}, {0, -1}), std::invalid_argument);
    CHECK_THROWS_AS(MulticlassLabels({1, 2}, {0, 2}, 2), std::invalid_argument);
    CHECK_THROWS_AS(MulticlassLabels({1, 2}, {0, 2}, 3), std::invalid_argument);  // class 1 empty
  }

  TEST_CASE("two clusters are separated by every solver") {
    const WeightedGraph g = two_clusters();
    const MulticlassLabels labels({2, 15}, {0, 1});
    std::vector<int> truth(20, 0);
    std::fill(truth.begin() + 10, truth.end(), 1);
    for (const ClassifyConfig& cfg : all_methods()) {
      const ScoreMatrix s = one_vs_rest(g, labels, cfg);
      CHECK(accuracy(s, truth) == 1.0);
      CHECK(s.at(2, 0) == 1.0);
      CHECK(s.at(2, 1) == 0.0);
      for (double v : s.data()) {
        CHECK(v >= -1e-12);
        CHECK(v <= 1.0 + 1e-12);
      }
    }
  }

  TEST_CASE("labeled vertices predict their own class") {
    const LabeledCloud lc = two_gaussians(300, 3, 2.0, 4);
    const WeightedGraph g = knn_graph(lc.points, 10);
    const MulticlassLabels labels = sample_labels(lc.classes, 2, 3, 1);
    ClassifyConfig c;
    c.method = SolverMethod::newton;
    c.p = PExponent(5.0);
    const ScoreMatrix s = one_vs_rest(g, labels, c);
    for (std::size_t t = 0; t < labels.size(); ++t) {
      CHECK(s.predict(labels.indices[t]) == labels.classes[t]);
    }
  }

  TEST_CASE("permuting class ids permutes the columns") {
    const LabeledCloud lc = two_gaussians(200, 2, 3.0, 2);
    const WeightedGraph g = knn_graph(lc.points, 10);
    // Three classes by splitting class 1 on the sign of x_2.
    std::vector<int> truth = lc.classes;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (truth[i] == 1 && lc.points.point(i)[1] > 0) truth[i] = 2;
    }
    const MulticlassLabels a = sample_labels(truth, 3, 2, 3);
    const std::vector<int> perm{2, 0, 1};
    std::vector<int> cls;
    for (int c : a.classes) cls.push_back(perm[c]);
    const MulticlassLabels b(a.indices, cls, 3);
    ClassifyConfig cfg;
    cfg.method = SolverMethod::laplace;
    const ScoreMatrix sa = one_vs_rest(g, a, cfg);
    const ScoreMatrix sb = one_vs_rest(g, b, cfg);
    for (std::size_t i = 0; i < g.size(); ++i) {
      for (int c = 0; c < 3; ++c) CHECK(sb.at(i, perm[c]) == sa.at(i, c));
      CHECK(sb.predict(i) == perm[sa.predict(i)]);
    }
  }

  TEST_CASE("one_vs_rest is deterministic") {
    const LabeledCloud lc = two_gaussians(250, 3, 2.0, 7);
    const WeightedGraph g = knn_graph(lc.points, 10);
    const MulticlassLabels labels = sample_labels(lc.classes, 2, 2, 7);
    ClassifyConfig c;
    c.method = SolverMethod::newton_like;
    c.p = PExponent(6.0);
    CHECK(one_vs_rest(g, labels, c).data() == one_vs_rest(g, labels, c).data());
  }

  TEST_CASE("accuracy") {
    ScoreMatrix s(4, 2);
    const std::vector<int> truth{0, 1, 1, 0};
    for (std::size_t i = 0; i < 4; ++i) s.at(i, truth[i]) = 1.0;
    CHECK(accuracy(s, truth) == 1.0);
    const std::vector<int> shifted{1, 0, 0, 1};
    CHECK(accuracy(s, shifted) == 0.0);
    const std::vector<int> one_off{0, 1, 1, 1};
    CHECK(accuracy(s, one_off) == 0.75);
    CHECK(accuracy(s, one_off, {0, 1}) == 1.0);
    ScoreMatrix tie(1, 3);
    CHECK(tie.predict(0) == 0);
    CHECK_THROWS_AS(accuracy(ScoreMatrix(0, 2), {}), std::invalid_argument);
  }

  TEST_CASE("sample_labels") {
    const std::vector<int> truth{0, 1, 0, 1, 0, 1, 2, 2};
    const MulticlassLabels a = sample_labels(truth, 3, 2, 5);
    const MulticlassLabels b = sample_labels(truth, 3, 2, 5);
    CHECK(a.indices == b.indices);
    CHECK(a.size() == 6);
    for (std::size_t t = 0; t < a.size(); ++t) CHECK(truth[a.indices[t]] == a.classes[t]);
    CHECK_THROWS_AS(sample_labels(truth, 3, 3, 5), std::invalid_argument);
  }

  TEST_CASE("solver method names round trip") {
    for (SolverMethod m : {SolverMethod::laplace, SolverMethod::newton, SolverMethod::newton_like,
                           SolverMethod::gradient_descent, SolverMethod::semi_implicit}) {
      CHECK(solver_method_from_string(to_string(m)) == m);
    }
    CHECK(is_game_method(SolverMethod::semi_implicit));
    CHECK_FALSE(is_game_method(SolverMethod::newton));
    CHECK_THROWS_AS(solver_method_from_string("irls"), std::invalid_argument);
  }

  TEST_CASE("two-Gaussian sweep") {
    TwoGaussianSweep sw;
    sw.d = 2;
    sw.separation = 3.0;
    sw.K = 20;
    sw.n_list = {128, 256};
    sw.p_list = {PExponent(2.0), PExponent(5.0)};
    sw.label_pool = 128;
    sw.seeds = 2;
    sw.base.method = SolverMethod::newton_like;
    sw.base.game.tol = 1e-8;
    const auto rows = two_gaussian_sweep(sw);
    CHECK(rows.size() == 8);
    for (const auto& r : rows) CHECK(r.accuracy >= 0.5);
    CHECK(median_accuracy(rows, "5", 1, 256) >= 0.85);
    // Far apart clusters leave the 10-NN graph disconnected.
    sw.separation = 40.0;
    CHECK_THROWS_AS(two_gaussian_sweep(sw), std::invalid_argument);
  }

  TEST_CASE("percentile") {
    CHECK(percentile({5, 1, 4, 2, 3}, 0.5) == 3);
    CHECK(percentile({5, 1, 4, 2, 3}, 0.0) == 1);
    CHECK(percentile({5, 1, 4, 2, 3}, 1.0) == 5);
    CHECK_THROWS_AS(percentile({}, 0.5), std::invalid_argument);
  }
}
