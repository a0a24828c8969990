#include "twf/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace twf {

std::vector<double> symmetric_eigenvalues(std::vector<double> a,
                                          std::size_t n) {
  if (a.size() != n * n)
    throw std::invalid_argument("symmetric_eigenvalues: bad size");
  auto at = [&](std::size_t i, std::size_t j) -> double& {
    return a[i * n + j];
  };

  double fro = 0.0;
  for (double v : a) fro += v * v;
  fro = std::sqrt(fro);
  const double stop = 1e-13 * std::max(fro, 1.0);

  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    if (std::sqrt(2.0 * off) <= stop) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = at(p, q);
        if (std::fabs(apq) == 0.0) continue;
        double app = at(p, p), aqq = at(q, q);
        double theta = 0.5 * (aqq - app) / apq;
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(1.0 + theta * theta));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        at(p, p) = c * c * app - 2.0 * s * c * apq + s * s * aqq;
        at(q, q) = s * s * app + 2.0 * s * c * apq + c * c * aqq;
        at(p, q) = at(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          double akp = at(k, p), akq = at(k, q);
          at(k, p) = at(p, k) = c * akp - s * akq;
          at(k, q) = at(q, k) = s * akp + c * akq;
        }
      }
    }
  }

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = at(i, i);
  return eig;
}

ConditionEstimate normal_condition_number(const DenseEnsemble<double>& e) {
  const std::size_t m = e.rows(), n = e.dim();
  std::vector<double> g(n * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    auto a = e.row(i);
    for (std::size_t j = 0; j < n; ++j) {
      double aj = a[j];
      double* gr = g.data() + j * n;
      for (std::size_t k = j; k < n; ++k) gr[k] += aj * a[k];
    }
  }
  double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = j; k < n; ++k) {
      g[j * n + k] *= inv_m;
      g[k * n + j] = g[j * n + k];
    }

  auto eig = symmetric_eigenvalues(std::move(g), n);
  ConditionEstimate ce;
  ce.lambda_max = *std::max_element(eig.begin(), eig.end());
  ce.lambda_min = *std::min_element(eig.begin(), eig.end());
  ce.kappa = ce.lambda_min > 0.0
                 ? ce.lambda_max / ce.lambda_min
                 : std::numeric_limits<double>::infinity();
  return ce;
}

namespace {

// Kaczmarz-style repair: sweep the constraints s_i a_i^T z >= margin_i
// (indices with y_i > 0) and project z onto each violated halfspace.  The
// margins are tiny relative to the signal scale, so the target cone is
// comfortably nonempty whenever the signs are consistent.
bool repair_feasibility(const DenseEnsemble<double>& e,
                        std::span<const double> y,
                        const std::vector<double>& s,
                        const std::vector<double>& margin,
                        std::vector<double>& z) {
  const std::size_t m = e.rows();
  for (int sweep = 0; sweep < 200; ++sweep) {
    bool changed = false;
    for (std::size_t i = 0; i < m; ++i) {
      if (!(y[i] > 0.0)) continue;
      auto a = e.row(i);
      double c = s[i] * dot(a, cspan(z));
      if (c < margin[i]) {
        double rn = e.row_norms()[i];
        axpy(s[i] * (margin[i] - c) / (rn * rn), a, std::span<double>(z));
        changed = true;
      }
    }
    if (!changed) break;
  }
  auto w = e.forward(cspan(z));
  for (std::size_t i = 0; i < m; ++i)
    if (y[i] > 0.0 && !(s[i] * w[i] > 0.0)) return false;
  return true;
}

}  // namespace

OracleResult solve_phase_oracle_mle(const DenseEnsemble<double>& e,
                                    std::span<const double> y,
                                    std::span<const double> signs,
                                    const OracleConfig& cfg) {
  const std::size_t m = e.rows(), n = e.dim();
  if (y.size() != m || signs.size() != m)
    throw std::invalid_argument("solve_phase_oracle_mle: size mismatch");
  std::vector<double> s(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (signs[i] != 1.0 && signs[i] != -1.0)
      throw std::invalid_argument("solve_phase_oracle_mle: signs must be +-1");
    s[i] = signs[i];
  }

  // Least-squares start against the signed amplitudes.
  std::vector<double> b(m);
  double y_mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double yi = std::max(y[i], 0.0);
    b[i] = s[i] * std::sqrt(yi);
    y_mean += yi;
  }
  y_mean /= static_cast<double>(m);
  double lam = std::sqrt(y_mean);

  CgConfig cg_cfg;
  cg_cfg.max_iters = 50;
  auto ls = solve_cg_normal(e, cspan(b), cg_cfg);
  std::vector<double> z = std::move(ls.z);

  const double sqrt_n = std::sqrt(static_cast<double>(n));
  std::vector<double> margin(m);
  for (std::size_t i = 0; i < m; ++i)
    margin[i] = 1e-6 * lam * e.row_norms()[i] / sqrt_n;
  if (!repair_feasibility(e, y, s, margin, z))
    throw std::runtime_error(
        "solve_phase_oracle_mle: no strictly feasible start for the given signs");

  OracleResult out;
  const double inv_m = 1.0 / static_cast<double>(m);
  std::vector<double> w(m), v(m), grad(n), d(n), Ad(m);
  bool entry_recorded = false;

  auto objective = [&](const std::vector<double>& wv) {
    double f = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      f += wv[i] * wv[i];
      if (y[i] > 0.0) {
        double swi = s[i] * wv[i];
        if (!(swi > 0.0)) return std::numeric_limits<double>::infinity();
        f -= 2.0 * y[i] * std::log(swi);
      }
    }
    return f * inv_m;
  };

  double prev_tau = 1.0;
  double f = 0.0;
  for (out.iters = 0; out.iters < cfg.max_iters; ++out.iters) {
    e.forward(cspan(z), std::span<double>(w));
    f = objective(w);
    if (!entry_recorded) {
      out.objective_trace.push_back(f);
      entry_recorded = true;
    }
    for (std::size_t i = 0; i < m; ++i)
      v[i] = y[i] > 0.0 ? 2.0 * (w[i] - y[i] / w[i]) : 2.0 * w[i];
    e.adjoint(cspan(v), std::span<double>(grad));
    scal(inv_m, std::span<double>(grad));
    out.gradient_norm = nrm(cspan(grad));
    if (out.gradient_norm <= cfg.grad_tol) {
      out.status = OracleStatus::converged;
      break;
    }

    for (std::size_t j = 0; j < n; ++j) d[j] = -grad[j];
    e.forward(cspan(d), std::span<double>(Ad));

    double tau_fb = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      if (!(y[i] > 0.0)) continue;
      double dw = s[i] * Ad[i];
      if (dw < 0.0) tau_fb = std::min(tau_fb, -(s[i] * w[i]) / dw);
    }
    double tau = std::min(prev_tau * 2.0, 1.0);
    if (std::isfinite(tau_fb)) tau = std::min(tau, 0.99 * tau_fb);

    const double slope = out.gradient_norm * out.gradient_norm;
    bool accepted = false;
    while (tau > 1e-20) {
      double f_trial = 0.0;
      bool feasible = true;
      for (std::size_t i = 0; i < m; ++i) {
        double wt = w[i] + tau * Ad[i];
        f_trial += wt * wt;
        if (y[i] > 0.0) {
          double swt = s[i] * wt;
          if (!(swt > 0.0)) {
            feasible = false;
            break;
          }
          f_trial -= 2.0 * y[i] * std::log(swt);
        }
      }
      if (feasible && f_trial * inv_m <= f - 1e-4 * tau * slope) {
        axpy(tau, cspan(d), std::span<double>(z));
        out.objective_trace.push_back(f_trial * inv_m);
        prev_tau = tau;
        accepted = true;
        break;
      }
      tau *= cfg.beta;
    }
    if (!accepted) break;  // step underflow; report with current gradient norm
  }

  out.z = std::move(z);
  return out;
}

}  // namespace twf
