#include "plap/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace plap {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> entries, bool symmetric) {
  for (const Triplet& t : entries) {
    if (t.row >= rows || t.col >= cols) {
      throw std::invalid_argument("SparseMatrix: entry out of range");
    }
    if (!std::isfinite(t.value)) {
      throw std::invalid_argument("SparseMatrix: non-finite entry");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row < b.row || (a.row == b.row && a.col < b.col);
  });
  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.offsets_.assign(rows + 1, 0);
  m.indices_.reserve(entries.size());
  m.values_.reserve(entries.size());
  for (std::size_t t = 0; t < entries.size(); ++t) {
    const Triplet& e = entries[t];
    if (!m.indices_.empty() && t > 0 && entries[t - 1].row == e.row &&
        entries[t - 1].col == e.col) {
      m.values_.back() += e.value;
      continue;
    }
    m.indices_.push_back(e.col);
    m.values_.push_back(e.value);
    ++m.offsets_[e.row + 1];
  }
  std::partial_sum(m.offsets_.begin(), m.offsets_.end(), m.offsets_.begin());

  if (symmetric) {
    if (rows != cols) throw std::invalid_argument("SparseMatrix: symmetric but not square");
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t t = m.offsets_[i]; t < m.offsets_[i + 1]; ++t) {
        if (m.at(m.indices_[t], i) != m.values_[t]) {
          throw std::invalid_argument("SparseMatrix: claimed symmetric but is not");
        }
      }
    }
  }
  m.symmetric_ = symmetric;
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t), true);
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t t = offsets_[i]; t < offsets_[i + 1]; ++t) {
      s += values_[t] * x[indices_[t]];
    }
    y[i] = s;
  }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(rows_);
  multiply(x, y);
  return y;
}

std::vector<double> SparseMatrix::diagonal() const {
  std::vector<double> d(std::min(rows_, cols_), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = at(i, i);
  return d;
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto b = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
  const auto e = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
  const auto it = std::lower_bound(b, e, j);
  if (it == e || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - indices_.begin())];
}

std::string to_string(PreconditionerKind kind) {
  switch (kind) {
    case PreconditionerKind::identity: return "identity";
    case PreconditionerKind::jacobi: return "jacobi";
    case PreconditionerKind::incomplete_cholesky: return "ichol";
    case PreconditionerKind::incomplete_lu: return "ilu";
  }
  return "unknown";
}

PreconditionerKind preconditioner_from_string(const std::string& name) {
  if (name == "identity" || name == "none") return PreconditionerKind::identity;
  if (name == "jacobi") return PreconditionerKind::jacobi;
  if (name == "ichol" || name == "ic" || name == "incomplete_cholesky") {
    return PreconditionerKind::incomplete_cholesky;
  }
  if (name == "ilu" || name == "incomplete_lu") return PreconditionerKind::incomplete_lu;
  throw std::invalid_argument("unknown preconditioner '" + name + "'");
}

Preconditioner Preconditioner::identity(std::size_t n) {
  Preconditioner p;
  p.kind_ = PreconditionerKind::identity;
  p.n_ = n;
  return p;
}

Preconditioner Preconditioner::jacobi(const SparseMatrix& A) {
  Preconditioner p;
  p.kind_ = PreconditionerKind::jacobi;
  p.n_ = A.rows();
  p.inv_diag_ = A.diagonal();
  for (double& d : p.inv_diag_) {
    if (!(d > 0.0)) {
      throw std::invalid_argument("jacobi preconditioner needs a positive diagonal");
    }
    d = 1.0 / d;
  }
  return p;
}

namespace {

struct IlutFactors {
  std::vector<SparseMatrix::Triplet> lower;
  std::vector<SparseMatrix::Triplet> upper;  // strictly upper
  std::vector<double> diag;
  bool bad_pivot = false;
};

// Row-wise IKJ threshold ILU.
IlutFactors ilut(const SparseMatrix& A, double drop_tol) {
  const std::size_t n = A.rows();
  IlutFactors f;
  f.diag.assign(n, 0.0);
  // Rows of U kept as (col, value) lists for the elimination.
  std::vector<std::vector<std::pair<std::size_t, double>>> urows(n);

  std::vector<double> w(n, 0.0);
  std::vector<char> used(n, 0);
  std::vector<std::size_t> touched;
  const auto& off = A.offsets();
  const auto& idx = A.indices();
  const auto& val = A.values();

  for (std::size_t i = 0; i < n; ++i) {
    touched.clear();
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> pending;
    double row_norm = 0.0;
    for (std::size_t t = off[i]; t < off[i + 1]; ++t) {
      const std::size_t j = idx[t];
      w[j] = val[t];
      used[j] = 1;
      touched.push_back(j);
      row_norm += val[t] * val[t];
      if (j < i) pending.push(j);
    }
    row_norm = std::sqrt(row_norm);
    const double threshold = drop_tol * row_norm;

    std::size_t last = n;
    while (!pending.empty()) {
      const std::size_t k = pending.top();
      pending.pop();
      if (k == last) continue;
      last = k;
      if (w[k] == 0.0) continue;
      const double lik = w[k] / f.diag[k];
      w[k] = 0.0;
      if (std::abs(lik) * std::abs(f.diag[k]) < threshold && k != i) continue;
      f.lower.push_back({i, k, lik});
      for (const auto& [j, ukj] : urows[k]) {
        if (!used[j]) {
          used[j] = 1;
          w[j] = 0.0;
          touched.push_back(j);
          if (j < i) pending.push(j);
        }
        w[j] -= lik * ukj;
      }
    }

    double diag = used[i] ? w[i] : 0.0;
    for (std::size_t j : touched) {
      if (j > i && w[j] != 0.0 && std::abs(w[j]) >= threshold) {
        urows[i].emplace_back(j, w[j]);
      }
    }
    std::sort(urows[i].begin(), urows[i].end());
    if (!(std::abs(diag) > 0.0) || !std::isfinite(diag)) {
      f.bad_pivot = true;
      diag = row_norm > 0.0 ? row_norm * std::max(drop_tol, 1e-8) : 1.0;
    }
    f.diag[i] = diag;
    for (std::size_t j : touched) {
      w[j] = 0.0;
      used[j] = 0;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& [j, v] : urows[i]) f.upper.push_back({i, j, v});
  }
  return f;
}

}  // namespace

Preconditioner Preconditioner::incomplete_lu(const SparseMatrix& A, double drop_tol) {
  if (A.rows() != A.cols()) throw std::invalid_argument("ilu: matrix must be square");
  if (!(drop_tol >= 0.0)) throw std::invalid_argument("ilu: drop_tol must be >= 0");
  IlutFactors f = ilut(A, drop_tol);
  Preconditioner p;
  p.kind_ = PreconditionerKind::incomplete_lu;
  p.n_ = A.rows();
  p.lower_ = SparseMatrix::from_triplets(p.n_, p.n_, std::move(f.lower));
  p.upper_ = SparseMatrix::from_triplets(p.n_, p.n_, std::move(f.upper));
  p.diag_ = std::move(f.diag);
  if (f.bad_pivot) p.warnings_.push_back("ilu: zero pivot replaced");
  return p;
}

Preconditioner Preconditioner::incomplete_cholesky(const SparseMatrix& A, double drop_tol) {
  if (!A.is_symmetric()) {
    throw std::invalid_argument("ichol: matrix must be flagged symmetric");
  }
  if (!(drop_tol >= 0.0)) throw std::invalid_argument("ichol: drop_tol must be >= 0");
  IlutFactors f = ilut(A, drop_tol);
  bool positive = !f.bad_pivot;
  for (double d : f.diag) positive = positive && d > 0.0;
  if (!positive) {
    Preconditioner p = jacobi(A);
    p.warnings_.push_back("ichol: nonpositive pivot, fell back to jacobi");
    return p;
  }
  Preconditioner p;
  p.kind_ = PreconditionerKind::incomplete_cholesky;
  p.n_ = A.rows();
  p.upper_ = SparseMatrix::from_triplets(p.n_, p.n_, std::move(f.upper));
  p.diag_ = std::move(f.diag);
  p.symmetric_factor_ = true;
  return p;
}

Preconditioner Preconditioner::make(PreconditionerKind kind, const SparseMatrix& A,
                                    double drop_tol) {
  switch (kind) {
    case PreconditionerKind::identity: return identity(A.rows());
    case PreconditionerKind::jacobi: return jacobi(A);
    case PreconditionerKind::incomplete_cholesky: return incomplete_cholesky(A, drop_tol);
    case PreconditionerKind::incomplete_lu: return incomplete_lu(A, drop_tol);
  }
  throw std::invalid_argument("unknown preconditioner kind");
}

void Preconditioner::apply(std::span<const double> r, std::span<double> z) const {
  const std::size_t n = n_;
  switch (kind_) {
    case PreconditionerKind::identity:
      std::copy(r.begin(), r.end(), z.begin());
      return;
    case PreconditionerKind::jacobi:
      for (std::size_t i = 0; i < n; ++i) z[i] = r[i] * inv_diag_[i];
      return;
    default:
      break;
  }
  const auto& uo = upper_.offsets();
  const auto& ui = upper_.indices();
  const auto& uv = upper_.values();
  if (symmetric_factor_) {
    // M = U^T D^{-1} U: solve U^T t = r, then U z = D t.
    std::vector<double> t(r.begin(), r.end());
    for (std::size_t i = 0; i < n; ++i) {
      t[i] /= diag_[i];
      for (std::size_t q = uo[i]; q < uo[i + 1]; ++q) t[ui[q]] -= uv[q] * t[i];
    }
    for (std::size_t i = 0; i < n; ++i) t[i] *= diag_[i];
    for (std::size_t ii = n; ii-- > 0;) {
      double s = t[ii];
      for (std::size_t q = uo[ii]; q < uo[ii + 1]; ++q) s -= uv[q] * z[ui[q]];
      z[ii] = s / diag_[ii];
    }
    return;
  }
  const auto& lo = lower_.offsets();
  const auto& li = lower_.indices();
  const auto& lv = lower_.values();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = r[i];
    for (std::size_t q = lo[i]; q < lo[i + 1]; ++q) s -= lv[q] * y[li[q]];
    y[i] = s;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t q = uo[ii]; q < uo[ii + 1]; ++q) s -= uv[q] * z[ui[q]];
    z[ii] = s / diag_[ii];
  }
}

namespace {

void check_system(const SparseMatrix& A, std::span<const double> b,
                  const Preconditioner& M, double tol, const char* who) {
  if (A.rows() != A.cols() || b.size() != A.rows() || M.size() != A.rows()) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  }
  if (!(tol > 0.0)) throw std::invalid_argument(std::string(who) + ": tol must be > 0");
}

}  // namespace

LinearSolveResult cg_solve(const SparseMatrix& A, std::span<const double> b,
                           const Preconditioner& M, double tol, std::size_t maxit,
                           std::span<const double> x0) {
  check_system(A, b, M, tol, "cg_solve");
  if (!A.is_symmetric()) throw std::invalid_argument("cg_solve: matrix is not symmetric");
  const std::size_t n = A.rows();
  LinearSolveResult out;
  out.x.assign(n, 0.0);
  if (!x0.empty()) std::copy(x0.begin(), x0.end(), out.x.begin());
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(out.x.begin(), out.x.end(), 0.0);
    out.report.converged = true;
    return out;
  }

  std::vector<double> r(n), z(n), p(n), Ap(n);
  auto& rep = out.report;
  // A few restarts guard against drift between recursive and true residuals.
  for (int restart = 0; restart < 4; ++restart) {
    A.multiply(out.x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    rep.relative_residual = norm2(r) / bnorm;
    if (rep.relative_residual <= tol) {
      rep.converged = true;
      return out;
    }
    if (rep.iterations >= maxit) break;
    M.apply(r, z);
    p = z;
    double rz = dot(r, z);
    bool breakdown = false;
    while (rep.iterations < maxit) {
      A.multiply(p, Ap);
      const double pAp = dot(p, Ap);
      if (!(pAp > 0.0) || !std::isfinite(pAp)) {
        breakdown = true;
        break;
      }
      const double alpha = rz / pAp;
      for (std::size_t i = 0; i < n; ++i) {
        out.x[i] += alpha * p[i];
        r[i] -= alpha * Ap[i];
      }
      ++rep.iterations;
      const double rel = norm2(r) / bnorm;
      rep.residual_history.push_back(rel);
      if (rel <= tol) break;
      M.apply(r, z);
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    if (breakdown) break;
  }
  A.multiply(out.x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
  rep.relative_residual = norm2(r) / bnorm;
  rep.converged = rep.relative_residual <= tol;
  return out;
}

LinearSolveResult gmres_solve(const SparseMatrix& A, std::span<const double> b,
                              const Preconditioner& M, double tol, std::size_t restart,
                              std::size_t maxit, std::span<const double> x0) {
  check_system(A, b, M, tol, "gmres_solve");
  if (restart == 0) throw std::invalid_argument("gmres_solve: restart must be >= 1");
  const std::size_t n = A.rows();
  LinearSolveResult out;
  out.x.assign(n, 0.0);
  if (!x0.empty()) std::copy(x0.begin(), x0.end(), out.x.begin());
  auto& rep = out.report;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(out.x.begin(), out.x.end(), 0.0);
    rep.converged = true;
    return out;
  }
  const std::size_t m = std::min(restart, n);

  std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
  std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
  std::vector<double> cs(m), sn(m), g(m + 1), r(n), w(n), z(n);
  double previous_cycle = std::numeric_limits<double>::infinity();

  while (true) {
    A.multiply(out.x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    const double beta = norm2(r);
    rep.relative_residual = beta / bnorm;
    if (rep.relative_residual <= tol) {
      rep.converged = true;
      return out;
    }
    if (rep.iterations >= maxit || !std::isfinite(beta)) break;
    if (beta >= previous_cycle * (1.0 - 1e-12)) break;  // stagnation
    previous_cycle = beta;

    for (std::size_t i = 0; i < n; ++i) V[0][i] = r[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    std::size_t j = 0;
    for (; j < m && rep.iterations < maxit; ++j) {
      M.apply(V[j], z);
      A.multiply(z, w);
      for (std::size_t i = 0; i <= j; ++i) {
        H[i][j] = dot(w, V[i]);
        for (std::size_t q = 0; q < n; ++q) w[q] -= H[i][j] * V[i][q];
      }
      H[j + 1][j] = norm2(w);
      if (H[j + 1][j] > 0.0) {
        for (std::size_t q = 0; q < n; ++q) V[j + 1][q] = w[q] / H[j + 1][j];
      }
      for (std::size_t i = 0; i < j; ++i) {
        const double t = cs[i] * H[i][j] + sn[i] * H[i + 1][j];
        H[i + 1][j] = -sn[i] * H[i][j] + cs[i] * H[i + 1][j];
        H[i][j] = t;
      }
      const double denom = std::hypot(H[j][j], H[j + 1][j]);
      cs[j] = denom > 0.0 ? H[j][j] / denom : 1.0;
      sn[j] = denom > 0.0 ? H[j + 1][j] / denom : 0.0;
      H[j][j] = denom;
      H[j + 1][j] = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++rep.iterations;
      const double est = std::abs(g[j + 1]) / bnorm;
      rep.residual_history.push_back(est);
      if (est <= tol || denom == 0.0) {
        ++j;
        break;
      }
    }
    // Back substitution for y, then x += M^{-1} V y.
    std::vector<double> y(j, 0.0);
    for (std::size_t ii = j; ii-- > 0;) {
      double s = g[ii];
      for (std::size_t k = ii + 1; k < j; ++k) s -= H[ii][k] * y[k];
      y[ii] = H[ii][ii] != 0.0 ? s / H[ii][ii] : 0.0;
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (std::size_t k = 0; k < j; ++k) {
      for (std::size_t q = 0; q < n; ++q) w[q] += y[k] * V[k][q];
    }
    M.apply(w, z);
    for (std::size_t q = 0; q < n; ++q) out.x[q] += z[q];
  }
  rep.converged = rep.relative_residual <= tol;
  return out;
}

std::string describe(const LinearSolverOptions& opts) {
  std::ostringstream os;
  os << (opts.method == LinearMethod::cg ? "cg" : "gmres") << "+"
     << to_string(opts.preconditioner);
  if (opts.preconditioner == PreconditionerKind::incomplete_cholesky ||
      opts.preconditioner == PreconditionerKind::incomplete_lu) {
    os << "(drop=" << opts.drop_tol << ")";
  }
  os << ",tol=" << opts.tol;
  return os.str();
}

LinearSolveResult solve_linear(const SparseMatrix& A, std::span<const double> b,
                               const LinearSolverOptions& opts,
                               std::span<const double> x0, const Preconditioner* M) {
  const std::size_t maxit = opts.maxit > 0 ? opts.maxit : 10 * std::max<std::size_t>(A.rows(), 1);
  std::optional<Preconditioner> own;
  if (M == nullptr) {
    own = Preconditioner::make(opts.preconditioner, A, opts.drop_tol);
    M = &*own;
  }
  if (opts.method == LinearMethod::cg) return cg_solve(A, b, *M, opts.tol, maxit, x0);
  return gmres_solve(A, b, *M, opts.tol, opts.restart, maxit, x0);
}

}  // namespace plap
