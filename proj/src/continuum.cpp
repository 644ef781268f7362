#include "plap/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>

namespace plap {

std::string to_string(Family f) {
  switch (f) {
    case Family::eps_ball: return "eps_ball";
    case Family::knn_nonsym: return "knn_nonsym";
    case Family::knn_sym: return "knn_sym";
  }
  return "unknown";
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::unnormalized: return "unnormalized";
    case Variant::random_walk: return "random_walk";
    case Variant::infinity: return "infinity";
    case Variant::game_p: return "game_p";
    case Variant::knn_unnormalized: return "knn_unnormalized";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  if (name == "eps_ball") return Family::eps_ball;
  if (name == "knn_nonsym") return Family::knn_nonsym;
  if (name == "knn_sym") return Family::knn_sym;
  throw std::invalid_argument("unknown graph family '" + name + "'");
}

Variant variant_from_string(const std::string& name) {
  if (name == "unnormalized") return Variant::unnormalized;
  if (name == "random_walk" || name == "rw") return Variant::random_walk;
  if (name == "infinity" || name == "inf") return Variant::infinity;
  if (name == "game_p" || name == "game") return Variant::game_p;
  if (name == "knn_unnormalized") return Variant::knn_unnormalized;
  throw std::invalid_argument("unknown operator variant '" + name + "'");
}

ContinuumProblem ContinuumProblem::preset(const std::string& name, std::size_t d) {
  if (d == 0) throw std::invalid_argument("continuum problem: d must be positive");
  ContinuumProblem pr;
  pr.name = name;
  pr.dim = d;
  auto zeros = [d](std::span<const double>) { return std::vector<double>(d, 0.0); };
  if (name == "uniform-linear" || name == "uniform-quadratic") {
    pr.rho = [](std::span<const double>) { return 1.0; };
    pr.grad_log_rho = zeros;
    if (name == "uniform-linear") {
      pr.u = [](std::span<const double> x) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) s += x[i] / static_cast<double>(i + 1);
        return s;
      };
      pr.grad_u = [d](std::span<const double>) {
        std::vector<double> g(d);
        for (std::size_t i = 0; i < d; ++i) g[i] = 1.0 / static_cast<double>(i + 1);
        return g;
      };
      pr.hess_u = [d](std::span<const double>) { return std::vector<double>(d * d, 0.0); };
    } else {
      pr.u = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return 0.5 * s;
      };
      pr.grad_u = [](std::span<const double> x) {
        return std::vector<double>(x.begin(), x.end());
      };
      pr.hess_u = [d](std::span<const double>) {
        std::vector<double> h(d * d, 0.0);
        for (std::size_t i = 0; i < d; ++i) h[i * d + i] = 1.0;
        return h;
      };
    }
    return pr;
  }
  if (name == "drift-exp") {
    const double norm = std::numbers::e - 1.0;
    pr.rho = [norm](std::span<const double> x) { return std::exp(x[0]) / norm; };
    pr.grad_log_rho = [d](std::span<const double>) {
      std::vector<double> g(d, 0.0);
      g[0] = 1.0;
      return g;
    };
    pr.u = [](std::span<const double> x) { return x[0]; };
    pr.grad_u = [d](std::span<const double>) {
      std::vector<double> g(d, 0.0);
      g[0] = 1.0;
      return g;
    };
    pr.hess_u = [d](std::span<const double>) { return std::vector<double>(d * d, 0.0); };
    pr.rho_min = 1.0 / norm;
    pr.rho_max = std::numbers::e / norm;
    return pr;
  }
  throw std::invalid_argument("unknown continuum preset '" + name +
                              "' (uniform-linear, uniform-quadratic, drift-exp)");
}

double integrate_density(const ContinuumProblem& problem, std::size_t per_axis) {
  const std::size_t d = problem.dim;
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  const double h = 1.0 / static_cast<double>(per_axis);
  double total = 0.0;
  while (true) {
    for (std::size_t i = 0; i < d; ++i) x[i] = (static_cast<double>(idx[i]) + 0.5) * h;
    total += problem.rho(x);
    std::size_t k = 0;
    while (k < d && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == d) break;
  }
  return total * std::pow(h, static_cast<double>(d));
}

PointCloud sample_density(const ContinuumProblem& problem, std::size_t n,
                          std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_density: n must be positive");
  const std::size_t d = problem.dim;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> coords;
  coords.reserve(n * d);
  std::vector<double> x(d);
  std::size_t proposals = 0;
  std::size_t accepted = 0;
  while (accepted < n) {
    for (double& v : x) v = unif(rng);
    const double r = unif(rng) * problem.rho_max;
    ++proposals;
    if (r < problem.rho(x)) {
      coords.insert(coords.end(), x.begin(), x.end());
      ++accepted;
    }
    if (proposals >= 1000 && static_cast<double>(accepted) < 0.01 * proposals) {
      throw std::runtime_error("sample_density: acceptance rate below 1%");
    }
  }
  return PointCloud(n, d, std::move(coords));
}

ScalarField evaluate_u(const ContinuumProblem& problem, const PointCloud& points) {
  ScalarField u(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) u[i] = problem.u(points.point(i));
  return u;
}

namespace {

struct Prefactors {
  double rw = 0.0;     // times sum w (u_y - u_x) / deg
  double inf = 0.0;    // times (min + max)
  double unnorm = 0.0; // times sum w (u_y - u_x)
};

// eps2 is eps^{-2} or (n alpha / k)^{2/d}.
Prefactors prefactors(const Kernel& kernel, double eps2) {
  Prefactors f;
  f.rw = 2.0 * kernel.mass() * eps2 / kernel.sigma_eta();
  f.inf = eps2 / (kernel.r0() * kernel.r0_eta_r0());
  return f;
}

double combine(Variant variant, const PExponent& p, const Prefactors& f, double sum,
               double deg, double lo, double hi) {
  const double rw = f.rw * sum / deg;
  const double inf = f.inf * (lo + hi);
  switch (variant) {
    case Variant::unnormalized:
    case Variant::knn_unnormalized: return f.unnorm * sum;
    case Variant::random_walk: return rw;
    case Variant::infinity: return inf;
    case Variant::game_p: return p.inv() * rw + (1.0 - 2.0 * p.inv()) * inf;
  }
  return 0.0;
}

template <typename Cols, typename Ws>
double row_value(Cols cols, Ws ws, std::size_t i, const ScalarField& u, Variant variant,
                 const PExponent& p, const Prefactors& f) {
  if (cols.empty()) {
    throw std::domain_error("vertex " + std::to_string(i) + " has an empty neighborhood");
  }
  double sum = 0.0;
  double deg = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t t = 0; t < cols.size(); ++t) {
    const double v = ws[t] * (u[cols[t]] - u[i]);
    sum += v;
    deg += ws[t];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return combine(variant, p, f, sum, deg, lo, hi);
}

void check_variant(Family family, Variant variant) {
  if (variant == Variant::unnormalized && family != Family::eps_ball) {
    throw std::invalid_argument("unnormalized variant is defined for eps_ball only");
  }
  if (variant == Variant::knn_unnormalized && family != Family::knn_sym) {
    throw std::invalid_argument("knn_unnormalized variant is defined for knn_sym only");
  }
}

}  // namespace

double eps_operator_at(const PointCloud& points, const NeighborSearch& search,
                       const ScalarField& u, std::size_t i, double eps, Variant variant,
                       const PExponent& p, const Kernel& kernel) {
  check_variant(Family::eps_ball, variant);
  if (!(eps > 0.0)) throw std::invalid_argument("eps_operator_at: eps must be positive");
  const double n = static_cast<double>(points.size());
  const double d = static_cast<double>(points.dim());
  Prefactors f = prefactors(kernel, 1.0 / (eps * eps));
  f.unnorm = 2.0 / (kernel.sigma_eta() * n * std::pow(eps, d + 2.0));
  std::vector<std::size_t> cols;
  std::vector<double> ws;
  // Inflate the query so a neighbor at distance exactly eps (e.g. eps = eps_k)
  // survives the round trip through sqrt; filter on the distance itself.
  for (const Neighbor& nb : search.within(i, eps * eps * (1.0 + 1e-12))) {
    const double r = std::sqrt(nb.dist2);
    if (r > eps) continue;
    const double w = kernel(r / eps);
    if (w > 0.0) {
      cols.push_back(nb.index);
      ws.push_back(w);
    }
  }
  return row_value(std::span<const std::size_t>(cols), std::span<const double>(ws), i, u,
                   variant, p, f);
}

ScalarField discrete_operator(const PointCloud& points, const ScalarField& u, Family family,
                              Variant variant, double scale, const PExponent& p,
                              const Kernel& kernel, const std::vector<std::size_t>& subset,
                              std::size_t brute_force_limit) {
  check_variant(family, variant);
  if (u.size() != points.size()) {
    throw std::invalid_argument("discrete_operator: u does not match the point cloud");
  }
  if (kernel.dim() != points.dim()) {
    throw std::invalid_argument("discrete_operator: kernel dimension differs from the data");
  }
  const std::size_t n = points.size();
  const double nd = static_cast<double>(n);
  const double d = static_cast<double>(points.dim());
  WeightedGraph graph;
  Prefactors f;
  if (family == Family::eps_ball) {
    if (!(scale > 0.0)) throw std::invalid_argument("discrete_operator: eps must be > 0");
    graph = eps_graph(points, scale, kernel, brute_force_limit);
    f = prefactors(kernel, 1.0 / (scale * scale));
    f.unnorm = 2.0 / (kernel.sigma_eta() * nd * std::pow(scale, d + 2.0));
  } else {
    if (!(scale >= 1.0) || scale != std::floor(scale)) {
      throw std::invalid_argument("discrete_operator: k must be a positive integer");
    }
    const std::size_t k = static_cast<std::size_t>(scale);
    const double ratio = nd * unit_ball_volume(points.dim()) / static_cast<double>(k);
    graph = knn_kernel_graph(points, k, kernel,
                             family == Family::knn_sym ? KnnMode::symmetric
                                                       : KnnMode::nonsymmetric,
                             brute_force_limit);
    f = prefactors(kernel, std::pow(ratio, 2.0 / d));
    f.unnorm = 2.0 / (kernel.sigma_eta() * nd) * std::pow(ratio, 1.0 + 2.0 / d);
  }
  ScalarField out(n, std::numeric_limits<double>::quiet_NaN());
  auto eval = [&](std::size_t i) {
    out[i] = row_value(graph.neighbors(i), graph.weights(i), i, u, variant, p, f);
  };
  if (subset.empty()) {
    for (std::size_t i = 0; i < n; ++i) eval(i);
  } else {
    for (std::size_t i : subset) {
      if (i >= n) throw std::invalid_argument("discrete_operator: subset out of range");
      eval(i);
    }
  }
  return out;
}

double continuum_operator(const ContinuumProblem& problem, std::span<const double> x,
                          const PExponent& p, Family family, Variant variant) {
  check_variant(family, variant);
  const std::size_t d = problem.dim;
  const std::vector<double> g = problem.grad_u(x);
  const std::vector<double> h = problem.hess_u(x);
  const std::vector<double> gl = problem.grad_log_rho(x);
  const double rho = problem.rho(x);
  double lap = 0.0;
  double gg = 0.0;
  double glg = 0.0;
  double hgg = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    lap += h[i * d + i];
    gg += g[i] * g[i];
    glg += gl[i] * g[i];
    for (std::size_t j = 0; j < d; ++j) hgg += g[i] * h[i * d + j] * g[j];
  }
  const bool needs_inf =
      variant == Variant::infinity || (variant == Variant::game_p && p.inv() < 0.5);
  if (needs_inf && std::sqrt(gg) < 1e-8) return std::numeric_limits<double>::quiet_NaN();
  const double dinf = gg > 0.0 ? hgg / gg : 0.0;
  const double dd = static_cast<double>(d);
  const double knn_factor = std::pow(rho, -2.0 / dd);

  double rw = 0.0;
  double inf = 0.0;
  switch (family) {
    case Family::eps_ball:
      if (variant == Variant::unnormalized) return rho * (lap + 2.0 * glg);
      rw = lap + 2.0 * glg;
      inf = dinf;
      break;
    case Family::knn_nonsym:
      rw = knn_factor * (lap + 2.0 * glg);
      inf = knn_factor * dinf;
      break;
    case Family::knn_sym:
      rw = knn_factor * (lap + (1.0 - 2.0 / dd) * glg);
      inf = knn_factor * (dinf - glg / dd);
      if (variant == Variant::knn_unnormalized) return rw;
      break;
  }
  switch (variant) {
    case Variant::random_walk: return rw;
    case Variant::infinity: return inf;
    default: return p.inv() * rw + (1.0 - 2.0 * p.inv()) * inf;
  }
}

double ScaleRule::eps(std::size_t n, std::size_t d) const {
  const double ln = std::log(static_cast<double>(n));
  return eps_const * std::pow(ln / static_cast<double>(n), 1.0 / (static_cast<double>(d) + 4.0));
}

std::size_t ScaleRule::k(std::size_t n, std::size_t d) const {
  if (k_power > 0.0) {
    return static_cast<std::size_t>(
        std::ceil(k_const * std::pow(static_cast<double>(n), k_power)));
  }
  const double ln = std::log(static_cast<double>(n));
  return static_cast<std::size_t>(
      std::ceil(k_const * std::pow(2.0, static_cast<double>(d)) * ln * ln));
}

double boundary_margin(Family family, double scale, std::size_t n, std::size_t d,
                       double beta) {
  if (family == Family::eps_ball) return scale;
  return 3.0 * std::pow(scale / (static_cast<double>(n) * unit_ball_volume(d) * beta),
                        1.0 / static_cast<double>(d));
}

std::vector<std::size_t> interior_vertices(const PointCloud& points, double margin) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool inside = true;
    for (double v : points.point(i)) {
      if (!(std::min(v, 1.0 - v) > margin)) {
        inside = false;
        break;
      }
    }
    if (inside) out.push_back(i);
  }
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

std::vector<ConsistencyRecord> consistency_experiment(
    const ContinuumProblem& problem, Family family, Variant variant, const PExponent& p,
    const std::vector<std::size_t>& n_list, const std::vector<std::uint64_t>& seeds,
    const ScaleRule& rule, const Kernel& kernel) {
  check_variant(family, variant);
  std::vector<ConsistencyRecord> rows;
  for (std::size_t n : n_list) {
    const double scale = family == Family::eps_ball
                             ? rule.eps(n, problem.dim)
                             : static_cast<double>(rule.k(n, problem.dim));
    const double margin = boundary_margin(family, scale, n, problem.dim, problem.beta());
    for (std::uint64_t seed : seeds) {
      const PointCloud pts = sample_density(problem, n, seed);
      const ScalarField u = evaluate_u(problem, pts);
      std::vector<std::size_t> interior = interior_vertices(pts, margin);
      std::vector<double> target(interior.size());
      std::vector<std::size_t> kept;
      std::vector<double> kept_target;
      for (std::size_t t = 0; t < interior.size(); ++t) {
        const double v =
            continuum_operator(problem, pts.point(interior[t]), p, family, variant);
        if (std::isnan(v)) continue;
        kept.push_back(interior[t]);
        kept_target.push_back(v);
      }
      ConsistencyRecord rec;
      rec.family = family;
      rec.variant = variant;
      rec.p = p.str();
      rec.n = n;
      rec.scale = scale;
      rec.seed = seed;
      rec.interior_count = kept.size();
      if (!kept.empty()) {
        const ScalarField disc =
            discrete_operator(pts, u, family, variant, scale, p, kernel, kept);
        std::vector<double> err(kept.size());
        std::vector<double> dv(kept.size());
        for (std::size_t t = 0; t < kept.size(); ++t) {
          dv[t] = disc[kept[t]];
          err[t] = std::abs(dv[t] - kept_target[t]);
        }
        rec.err_median = median(err);
        rec.err_max = *std::max_element(err.begin(), err.end());
        rec.target_median = median(kept_target);
        rec.discrete_median = median(dv);
      } else {
        rec.err_median = rec.err_max = rec.target_median = rec.discrete_median =
            std::numeric_limits<double>::quiet_NaN();
      }
      rows.push_back(rec);
    }
  }
  return rows;
}

void write_consistency_csv(std::ostream& os, const std::vector<ConsistencyRecord>& rows) {
  os << "family,variant,p,n,scale,seed,interior_count,err_median,err_max,target_median\n";
  const auto old = os.precision(17);
  for (const auto& r : rows) {
    os << to_string(r.family) << ',' << to_string(r.variant) << ',' << r.p << ',' << r.n
       << ',' << r.scale << ',' << r.seed << ',' << r.interior_count << ',' << r.err_median
       << ',' << r.err_max << ',' << r.target_median << '\n';
  }
  os.precision(old);
}

DriftRecord drift_experiment(const ContinuumProblem& problem, std::size_t n,
                             std::uint64_t seed, const ScaleRule& rule, const Kernel& kernel) {
  const std::size_t d = problem.dim;
  DriftRecord rec;
  rec.n = n;
  rec.seed = seed;
  rec.k = rule.k(n, d);
  const PointCloud pts = sample_density(problem, n, seed);
  const ScalarField u = evaluate_u(problem, pts);
  const KnnRadii radii = knn_radii(pts, rec.k, 4096);
  rec.eps = median(radii.eps_k);
  const double margin = std::max(
      boundary_margin(Family::knn_sym, static_cast<double>(rec.k), n, d, problem.beta()),
      rec.eps);
  std::vector<std::size_t> interior;
  std::vector<double> target;
  for (std::size_t i : interior_vertices(pts, margin)) {
    const double v =
        continuum_operator(problem, pts.point(i), PExponent::infinity(), Family::knn_sym,
                           Variant::infinity);
    if (std::isnan(v)) continue;
    interior.push_back(i);
    target.push_back(v);
  }
  rec.interior_count = interior.size();
  if (interior.empty()) throw std::runtime_error("drift experiment: no interior vertices");
  const ScalarField knn =
      discrete_operator(pts, u, Family::knn_sym, Variant::infinity,
                        static_cast<double>(rec.k), PExponent::infinity(), kernel, interior);
  const ScalarField eps = discrete_operator(pts, u, Family::eps_ball, Variant::infinity,
                                            rec.eps, PExponent::infinity(), kernel, interior);
  std::vector<double> kv;
  std::vector<double> ev;
  for (std::size_t i : interior) {
    kv.push_back(knn[i]);
    ev.push_back(eps[i]);
  }
  rec.eps_median = median(ev);
  for (double& v : ev) v = std::abs(v);
  {
    std::vector<double> ka(kv);
    for (double& v : ka) v = std::abs(v);
    rec.knn_abs_median = median(ka);
  }
  rec.knn_median = median(kv);
  rec.target_median = median(target);
  rec.eps_abs_median = median(ev);
  rec.within_30_percent =
      std::abs(rec.knn_median - rec.target_median) <= 0.3 * std::abs(rec.target_median);
  // Signed medians: per-vertex values of both operators carry sampling noise
  // of the same size as the drift itself, so medians of |value| measure the
  // noise, not the bias.
  rec.eps_three_times_smaller = std::abs(rec.eps_median) * 3.0 <= std::abs(rec.knn_median);
  return rec;
}

}  // namespace plap
