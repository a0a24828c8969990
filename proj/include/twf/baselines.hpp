#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>

#include "twf/measurement.hpp"
#include "twf/scalar.hpp"

namespace twf {

struct CgConfig {
  int max_iters = 200;
  double tol = 1e-12;  // stop when |A^T A z - A^T b| <= tol * |A^T b|
};

enum class CgStatus { converged, max_iters, breakdown };

struct CgRecord {
  int iter = 0;            // iterations completed when the row was taken
  double residual_norm = 0.0;
  double relative_error = std::numeric_limits<double>::quiet_NaN();
  long matvecs = 0;        // transforms consumed up to this iterate
};

template <class T>
struct CgResult {
  std::vector<T> z;
  std::vector<CgRecord> trace;
  CgStatus status = CgStatus::max_iters;
  long matvecs = 0;
};

// Conjugate gradient on the normal equations A^T A z = A^T b, matrix-free:
// one forward + one adjoint per iteration.  truth (optional) only feeds the
// per-iteration relative-error column; it plays no part in the iteration.
template <class E>
CgResult<typename E::scalar_type> solve_cg_normal(
    const E& e, std::span<const typename E::scalar_type> b,
    const CgConfig& cfg,
    std::span<const typename E::scalar_type> truth = {}) {
  using T = typename E::scalar_type;
  const std::size_t n = e.dim();
  if (b.size() != e.rows())
    throw std::invalid_argument("solve_cg_normal: b size mismatch");

  auto rel_err = [&](const std::vector<T>& z) {
    if (truth.empty()) return std::numeric_limits<double>::quiet_NaN();
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += abs2(z[j] - truth[j]);
    return std::sqrt(acc) / nrm(truth);
  };

  CgResult<T> out;
  out.z.assign(n, T{});
  std::vector<T> r = e.adjoint(b);  // residual of the normal equations at z=0
  out.matvecs = 1;
  const double target = cfg.tol * nrm(cspan(r));

  out.trace.push_back({0, nrm(cspan(r)), rel_err(out.z), out.matvecs});

  double rho = norm2(cspan(r));
  if (std::sqrt(rho) <= target) {
    out.status = CgStatus::converged;
    return out;
  }
  std::vector<T> p = r, Ap(e.rows()), q(n);
  for (int k = 0; k < cfg.max_iters; ++k) {
    e.forward(cspan(p), std::span<T>(Ap));
    e.adjoint(cspan(Ap), std::span<T>(q));
    out.matvecs += 2;
    double curv = norm2(cspan(Ap));  // <p, A^T A p> = |A p|^2 >= 0
    if (curv <= 0.0) {
      out.status = CgStatus::breakdown;
      return out;
    }
    double alpha = rho / curv;
    axpy(alpha, cspan(p), std::span<T>(out.z));
    axpy(-alpha, cspan(q), std::span<T>(r));
    double rho_next = norm2(cspan(r));
    out.trace.push_back(
        {k + 1, std::sqrt(rho_next), rel_err(out.z), out.matvecs});
    if (std::sqrt(rho_next) <= target) {
      out.status = CgStatus::converged;
      return out;
    }
    double beta = rho_next / rho;
    for (std::size_t j = 0; j < n; ++j) p[j] = r[j] + beta * p[j];
    rho = rho_next;
  }
  out.status = CgStatus::max_iters;
  return out;
}

struct ConditionEstimate {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double kappa = 0.0;
};

// Extreme eigenvalues of (1/m) A^T A for a dense real ensemble, via an exact
// cyclic-Jacobi diagonalization of the n x n normal matrix.
ConditionEstimate normal_condition_number(const DenseEnsemble<double>& e);

// Cyclic Jacobi eigenvalue iteration for a dense symmetric matrix (row-major,
// n x n).  Returns the eigenvalues, unordered.  Exposed for testing.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, std::size_t n);

struct OracleConfig {
  int max_iters = 3000;
  double grad_tol = 1e-9;  // absolute bound on |gradient of mean likelihood|
  double beta = 0.5;       // Armijo shrink factor
};

enum class OracleStatus { converged, max_iters };

struct OracleResult {
  std::vector<double> z;
  std::vector<double> objective_trace;  // entry value, then after each accepted step
  double gradient_norm = 0.0;
  OracleStatus status = OracleStatus::max_iters;
  int iters = 0;
};

// Sign-oracle maximum likelihood for the real Gaussian model: minimize
//   f(z) = (1/m) sum_i [ (a_i^T z)^2 - 2 y_i log(s_i a_i^T z) ]
// given the true measurement signs s_i (terms with y_i = 0 drop the log).
// f is convex on the feasible cone {s_i a_i^T z > 0 for all y_i > 0}; descent
// steps are kept interior by a 0.99 fraction-to-boundary rule.  The start is
// the least-squares fit to s .* sqrt(y), nudged into the cone by halfspace
// projection sweeps; if no strictly feasible start is found this throws.
OracleResult solve_phase_oracle_mle(const DenseEnsemble<double>& e,
                                    std::span<const double> y,
                                    std::span<const double> signs,
                                    const OracleConfig& cfg);

}  // namespace twf
