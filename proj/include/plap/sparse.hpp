#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace plap {

/// Real CSR matrix. Column indices are strictly increasing within each row.
class SparseMatrix {
 public:
  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SparseMatrix() = default;

  /// Duplicate (row, col) entries are summed. `symmetric` is a claim that is
  /// verified; a false claim throws std::invalid_argument.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> entries, bool symmetric = false);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  bool is_symmetric() const { return symmetric_; }

  const std::vector<std::size_t>& offsets() const { return offsets_; }
  const std::vector<std::size_t>& indices() const { return indices_; }
  const std::vector<double>& values() const { return values_; }

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;

  std::vector<double> diagonal() const;
  double at(std::size_t i, std::size_t j) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::size_t> indices_;
  std::vector<double> values_;
  bool symmetric_ = false;
};

enum class PreconditionerKind { identity, jacobi, incomplete_cholesky, incomplete_lu };

std::string to_string(PreconditionerKind kind);
PreconditionerKind preconditioner_from_string(const std::string& name);

/// Linear map z = M^{-1} r approximating A^{-1}.
class Preconditioner {
 public:
  static Preconditioner identity(std::size_t n);
  /// Requires a strictly positive diagonal.
  static Preconditioner jacobi(const SparseMatrix& A);
  /// Threshold incomplete LU (row-wise IKJ). Entries below
  /// drop_tol * ||row of A||_2 are dropped; the diagonal is always kept.
  static Preconditioner incomplete_lu(const SparseMatrix& A, double drop_tol);
  /// Threshold incomplete Cholesky M = U^T D^{-1} U built from the upper
  /// factor of the threshold ILU. A nonpositive pivot falls back to jacobi and
  /// records a warning.
  static Preconditioner incomplete_cholesky(const SparseMatrix& A, double drop_tol);
  static Preconditioner make(PreconditionerKind kind, const SparseMatrix& A,
                             double drop_tol);

  PreconditionerKind kind() const { return kind_; }
  std::size_t size() const { return n_; }
  void apply(std::span<const double> r, std::span<double> z) const;

  const std::vector<std::string>& warnings() const { return warnings_; }
  /// Number of stored off-diagonal factor entries (0 for identity/jacobi).
  std::size_t fill() const { return lower_.nnz() + upper_.nnz(); }

 private:
  PreconditionerKind kind_ = PreconditionerKind::identity;
  std::size_t n_ = 0;
  std::vector<double> inv_diag_;
  // Strictly lower unit factor and upper factor (diagonal in diag_).
  SparseMatrix lower_;
  SparseMatrix upper_;
  std::vector<double> diag_;
  bool symmetric_factor_ = false;
  std::vector<std::string> warnings_;
};

struct LinearSolveReport {
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  std::vector<double> residual_history;  // relative residual per iteration
};

struct LinearSolveResult {
  std::vector<double> x;
  LinearSolveReport report;
};

/// Preconditioned conjugate gradients for symmetric positive definite A.
/// Stops when ||b - A x||_2 <= tol ||b||_2. Throws std::invalid_argument when A
/// is not flagged symmetric; a nonpositive curvature direction ends the solve
/// with converged == false.
LinearSolveResult cg_solve(const SparseMatrix& A, std::span<const double> b,
                           const Preconditioner& M, double tol, std::size_t maxit,
                           std::span<const double> x0 = {});

/// Right-preconditioned restarted GMRES(restart). `maxit` counts inner
/// iterations over all cycles.
LinearSolveResult gmres_solve(const SparseMatrix& A, std::span<const double> b,
                              const Preconditioner& M, double tol, std::size_t restart,
                              std::size_t maxit, std::span<const double> x0 = {});

enum class LinearMethod { cg, gmres };

/// Inner-solver selection shared by the Newton-type methods.
struct LinearSolverOptions {
  LinearMethod method = LinearMethod::cg;
  PreconditionerKind preconditioner = PreconditionerKind::jacobi;
  double drop_tol = 1e-1;
  double tol = 1e-10;
  std::size_t maxit = 0;  // 0: 10 n
  std::size_t restart = 50;
};

std::string describe(const LinearSolverOptions& opts);

/// Dispatches to cg_solve or gmres_solve. Uses `M` when given, otherwise
/// builds the preconditioner named in `opts`.
LinearSolveResult solve_linear(const SparseMatrix& A, std::span<const double> b,
                               const LinearSolverOptions& opts,
                               std::span<const double> x0 = {},
                               const Preconditioner* M = nullptr);

}  // namespace plap
