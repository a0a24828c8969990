#pragma once

#include <cstdint>
#include <stdexcept>

#include "twf/rng.hpp"
#include "twf/scalar.hpp"

namespace twf {

struct InitConfig {
  double alpha_y = 3.0;   // intensity truncation level; rows with |y_i| above
                          // alpha_y^2 * lambda0^2 are dropped
  int power_iters = 50;
  std::uint64_t seed = 0;
  bool truncated = true;  // false: keep every row (plain spectral method)
};

template <class T>
struct InitResult {
  std::vector<T> z0;
  double lambda0 = 0.0;
  std::size_t kept_count = 0;
};

// Scale estimate sqrt(mean(y)).  Concentrates at |x| for intensity data.
inline double lambda0(std::span<const double> y) {
  if (y.empty()) throw std::invalid_argument("lambda0: empty y");
  double s = 0.0;
  for (double v : y) s += v;
  double mean = s / static_cast<double>(y.size());
  if (mean < 0.0)
    throw std::domain_error("lambda0: mean of y is negative");
  return std::sqrt(mean);
}

// out = (1/m) * sum_i keep_i * y_i * a_i * <a_i, v>, evaluated matrix-free as
// adjoint(keep .* y .* forward(v)) / m.  Two passes, no n x n matrix.
template <class E, class T>
void truncated_matvec(const E& e, std::span<const double> y,
                      const std::vector<std::uint8_t>& keep,
                      std::span<const T> v, std::span<T> out) {
  const std::size_t m = e.rows();
  if (y.size() != m || keep.size() != m)
    throw std::invalid_argument("truncated_matvec: size mismatch");
  std::vector<T> w(m);
  e.forward(v, std::span<T>(w));
  for (std::size_t i = 0; i < m; ++i)
    w[i] = keep[i] ? T(y[i] * w[i]) : T{};
  e.adjoint(std::span<const T>(w), out);
  double inv_m = 1.0 / static_cast<double>(m);
  for (auto& o : out) o = inv_m * o;
}

// Deterministic start vector for the power method (unit norm).
template <class T>
std::vector<T> init_start_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<T> v(n);
  for (auto& x : v) {
    if constexpr (is_complex_v<T>)
      x = rng.cnormal();
    else
      x = rng.normal();
  }
  double nv = nrm(cspan(v));
  if (nv > 0.0) scal(1.0 / nv, std::span<T>(v));
  return v;
}

// Truncated spectral initialization: power iterations on
//   Y = (1/m) sum_i y_i a_i a_i^*  restricted to rows with |y_i| <= alpha_y^2 lambda0^2,
// then scaling to sqrt(m*n / sum_i |a_i|^2) * lambda0.  A zero matvec output
// triggers one restart from a fresh seeded vector before giving up.
template <class E>
InitResult<typename E::scalar_type> spectral_init(const E& e,
                                                  std::span<const double> y,
                                                  const InitConfig& cfg) {
  using T = typename E::scalar_type;
  const std::size_t m = e.rows();
  const std::size_t n = e.dim();
  if (y.size() != m) throw std::invalid_argument("spectral_init: y size mismatch");
  if (cfg.power_iters < 1)
    throw std::invalid_argument("spectral_init: power_iters must be >= 1");
  if (cfg.truncated && !(cfg.alpha_y >= 3.0))
    throw std::invalid_argument("spectral_init: alpha_y must be >= 3");

  InitResult<T> res;
  res.lambda0 = lambda0(y);

  std::vector<std::uint8_t> keep(m, 1);
  if (cfg.truncated) {
    double cut = cfg.alpha_y * cfg.alpha_y * res.lambda0 * res.lambda0;
    for (std::size_t i = 0; i < m; ++i) keep[i] = std::fabs(y[i]) <= cut;
  }
  res.kept_count = 0;
  for (std::size_t i = 0; i < m; ++i) res.kept_count += keep[i];
  if (res.kept_count == 0)
    throw std::runtime_error("spectral_init: truncation removed every row");

  std::vector<T> v = init_start_vector<T>(n, cfg.seed);
  std::vector<T> w(n);
  bool restarted = false;
  for (int it = 0; it < cfg.power_iters; ++it) {
    truncated_matvec(e, y, keep, cspan(v), std::span<T>(w));
    double nw = nrm(cspan(w));
    if (nw == 0.0) {
      if (restarted)
        throw std::runtime_error("spectral_init: power iteration collapsed");
      restarted = true;
      v = init_start_vector<T>(n, cfg.seed ^ 0x517CC1B727220A95ull);
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) v[j] = w[j] * (1.0 / nw);
  }

  double norm_sum = 0.0;
  for (double rn : e.row_norms()) norm_sum += rn * rn;
  double scale =
      std::sqrt(static_cast<double>(m) * static_cast<double>(n) / norm_sum) *
      res.lambda0;
  res.z0 = std::move(v);
  scal(scale, std::span<T>(res.z0));
  return res;
}

}  // namespace twf
