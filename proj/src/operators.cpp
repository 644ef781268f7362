#include "plap/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace plap {

PExponent::PExponent(double p, double lambda) : p_(p), lambda_(lambda) {
  if (std::isnan(p) || p < 2.0) {
    throw std::invalid_argument("p must be >= 2 (got " + std::to_string(p) + ")");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be positive");
  }
  infinite_ = std::isinf(p);
}

PExponent PExponent::infinity(double lambda) {
  return PExponent(std::numeric_limits<double>::infinity(), lambda);
}

double PExponent::value() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : p_;
}

std::string PExponent::str() const {
  if (infinite_) return "inf";
  std::ostringstream os;
  os << p_;
  return os.str();
}

PExponent PExponent::parse(const std::string& text, double lambda) {
  if (text == "inf" || text == "infinity" || text == "Inf") return infinity(lambda);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse p from '" + text + "'");
  }
  if (used != text.size()) throw std::invalid_argument("cannot parse p from '" + text + "'");
  return PExponent(v, lambda);
}

LabelSet::LabelSet(std::vector<std::size_t> idx, std::vector<double> vals,
                   std::vector<double> f) {
  if (idx.size() != vals.size()) {
    throw std::invalid_argument("labels: index and value counts differ");
  }
  std::vector<std::size_t> order(idx.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return idx[a] < idx[b]; });
  indices.reserve(idx.size());
  values.reserve(idx.size());
  for (std::size_t t : order) {
    if (!indices.empty() && indices.back() == idx[t]) {
      throw std::invalid_argument("labels: duplicate vertex " + std::to_string(idx[t]));
    }
    if (!std::isfinite(vals[t])) throw std::invalid_argument("labels: non-finite value");
    indices.push_back(idx[t]);
    values.push_back(vals[t]);
  }
  for (double v : f) {
    if (!std::isfinite(v)) throw std::invalid_argument("labels: non-finite source");
  }
  source = std::move(f);
}

bool LabelSet::has_source() const {
  return std::any_of(source.begin(), source.end(), [](double v) { return v != 0.0; });
}

void LabelSet::validate(std::size_t n, bool require_nonempty) const {
  if (require_nonempty && indices.empty()) {
    throw std::invalid_argument("labels: at least one labeled vertex is required");
  }
  if (!indices.empty() && indices.back() >= n) {
    throw std::invalid_argument("labels: vertex " + std::to_string(indices.back()) +
                                " out of range for n=" + std::to_string(n));
  }
  if (!source.empty() && source.size() != n) {
    throw std::invalid_argument("labels: source length must equal n");
  }
}

std::vector<char> LabelSet::mask(std::size_t n) const {
  std::vector<char> m(n, 0);
  for (std::size_t i : indices) m[i] = 1;
  return m;
}

std::vector<std::size_t> LabelSet::unlabeled(std::size_t n) const {
  std::vector<std::size_t> out;
  out.reserve(n - std::min(n, indices.size()));
  std::size_t t = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (t < indices.size() && indices[t] == i) {
      ++t;
      continue;
    }
    out.push_back(i);
  }
  return out;
}

ScalarField LabelSet::impose(ScalarField u) const {
  for (std::size_t t = 0; t < indices.size(); ++t) u[indices[t]] = values[t];
  return u;
}

double LabelSet::min_value() const {
  if (values.empty()) throw std::invalid_argument("labels: empty");
  return *std::min_element(values.begin(), values.end());
}

double LabelSet::max_value() const {
  if (values.empty()) throw std::invalid_argument("labels: empty");
  return *std::max_element(values.begin(), values.end());
}

void check_field(const WeightedGraph& graph, const ScalarField& u) {
  if (u.size() != graph.size()) {
    throw std::invalid_argument("field length " + std::to_string(u.size()) +
                                " does not match graph size " +
                                std::to_string(graph.size()));
  }
  for (double v : u) {
    if (!std::isfinite(v)) throw std::invalid_argument("field has non-finite entries");
  }
}

double energy_Jp(const WeightedGraph& graph, const ScalarField& u, const LabelSet& labels,
                 const PExponent& p) {
  check_field(graph, u);
  labels.validate(graph.size(), false);
  const std::size_t n = graph.size();
  if (p.is_infinite()) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto cols = graph.neighbors(i);
      const auto ws = graph.weights(i);
      for (std::size_t t = 0; t < cols.size(); ++t) {
        m = std::max(m, ws[t] * std::abs(u[i] - u[cols[t]]));
      }
    }
    return m;
  }
  const double pv = p.value();
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto cols = graph.neighbors(i);
    const auto ws = graph.weights(i);
    for (std::size_t t = 0; t < cols.size(); ++t) {
      s += ws[t] * std::pow(std::abs(u[i] - u[cols[t]]), pv);
    }
  }
  double src = 0.0;
  for (std::size_t i = 0; i < n; ++i) src += labels.f(i) * u[i];
  return s / (2.0 * pv) + src;
}

ScalarField variational_residual(const WeightedGraph& graph, const ScalarField& u,
                                 double p) {
  check_field(graph, u);
  if (!(p >= 2.0) || !std::isfinite(p)) {
    throw std::invalid_argument("variational_residual: p must be finite and >= 2");
  }
  const std::size_t n = graph.size();
  ScalarField out(n, 0.0);
  const bool linear = p == 2.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto cols = graph.neighbors(i);
    const auto ws = graph.weights(i);
    double s = 0.0;
    for (std::size_t t = 0; t < cols.size(); ++t) {
      const double diff = u[cols[t]] - u[i];
      if (linear) {
        s += ws[t] * diff;
      } else if (diff != 0.0) {
        s += ws[t] * std::pow(std::abs(diff), p - 2.0) * diff;
      }
    }
    out[i] = s;
  }
  return out;
}

ScalarField graph_laplacian_2(const WeightedGraph& graph, const ScalarField& u) {
  check_field(graph, u);
  const std::size_t n = graph.size();
  ScalarField out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cols = graph.neighbors(i);
    const auto ws = graph.weights(i);
    double s = 0.0;
    for (std::size_t t = 0; t < cols.size(); ++t) s += ws[t] * (u[cols[t]] - u[i]);
    out[i] = s;
  }
  return out;
}

ScalarField graph_infinity(const WeightedGraph& graph, const ScalarField& u,
                           InfinityRange range) {
  check_field(graph, u);
  const std::size_t n = graph.size();
  ScalarField out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cols = graph.neighbors(i);
    const auto ws = graph.weights(i);
    if (cols.empty()) {
      throw std::domain_error("graph_infinity: vertex " + std::to_string(i) +
                              " has no neighbors");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t t = 0; t < cols.size(); ++t) {
      const double v = ws[t] * (u[cols[t]] - u[i]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (range == InfinityRange::all_vertices && cols.size() + 1 < n) {
      lo = std::min(lo, 0.0);
      hi = std::max(hi, 0.0);
    }
    out[i] = lo + hi;
  }
  return out;
}

ScalarField game_operator(const WeightedGraph& graph, const ScalarField& u,
                          const PExponent& p, InfinityRange range) {
  const ScalarField lap = graph_laplacian_2(graph, u);
  const double ip = p.inv();
  const double c_inf = p.lambda() * (1.0 - 2.0 * ip);
  ScalarField inf;
  if (c_inf != 0.0) inf = graph_infinity(graph, u, range);
  ScalarField out(graph.size(), 0.0);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const double d = graph.degree(i);
    if (!(d > 0.0)) {
      throw std::domain_error("game_operator: vertex " + std::to_string(i) +
                              " has zero degree");
    }
    out[i] = ip * lap[i] / d + (c_inf != 0.0 ? c_inf * inf[i] : 0.0);
  }
  return out;
}

double residual_length_scale(const WeightedGraph& graph) {
  return graph.sigma() > 0.0 ? graph.sigma() : 1.0;
}

double variational_scaled_residual(const WeightedGraph& graph, const ScalarField& u,
                                   const LabelSet& labels, double p, std::size_t dim) {
  const ScalarField r = variational_residual(graph, u, p);
  const auto mask = labels.mask(graph.size());
  double m = 0.0;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (!mask[i]) m = std::max(m, std::abs(r[i] - labels.f(i)));
  }
  const double sigma = residual_length_scale(graph);
  const double scale =
      static_cast<double>(graph.size()) * std::pow(sigma, static_cast<double>(dim) + p - 1.0);
  return m / scale;
}

double game_scaled_residual(const WeightedGraph& graph, const ScalarField& u,
                            const LabelSet& labels, const PExponent& p,
                            InfinityRange range) {
  const ScalarField r = game_operator(graph, u, p, range);
  const auto mask = labels.mask(graph.size());
  double m = 0.0;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (!mask[i]) m = std::max(m, std::abs(r[i] + labels.f(i)));
  }
  return m / residual_length_scale(graph);
}

}  // namespace plap
