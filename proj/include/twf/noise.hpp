#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "twf/metrics.hpp"
#include "twf/scalar.hpp"

namespace twf {

struct NoiseSpec {
  enum class Kind { noiseless, poisson, additive };

  Kind kind = Kind::noiseless;
  std::vector<double> eta;  // additive only, one entry per measurement

  static NoiseSpec noiseless() { return {}; }
  static NoiseSpec poisson() { return {Kind::poisson, {}}; }
  static NoiseSpec additive(std::vector<double> eta) {
    return {Kind::additive, std::move(eta)};
  }
};

// Turn clean intensities mu into observations y:
//   noiseless: y = mu
//   poisson:   y_i ~ Poisson(mu_i), entrywise, one seeded stream per call
//   additive:  y = mu + eta (entries may go negative; downstream code accepts that)
std::vector<double> observe(std::span<const double> mu, const NoiseSpec& spec,
                            std::uint64_t seed);

// Signal strength proxy 3*|x|^2 used as the SNR of a Poisson experiment.
template <class T>
double snr(std::span<const T> x) {
  return 3.0 * norm2(x);
}

template <class T>
double snr_db(std::span<const T> x) {
  double s = snr(x);
  if (s <= 0.0) throw std::invalid_argument("snr_db: x must be nonzero");
  return 10.0 * std::log10(s);
}

// dist^2(zhat, x) / |x|^2
template <class T>
double relative_mse(std::span<const T> zhat, std::span<const T> x) {
  double r = relative_error(zhat, x);
  return r * r;
}

inline double to_db(double v) { return 10.0 * std::log10(v); }

}  // namespace twf
