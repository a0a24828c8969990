#include "twf/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace twf {

double Rng::normal() {
  if (have_cached_) {
    have_cached_ = false;
    return cached_;
  }
  double u1 = uniform01_pos();
  double u2 = uniform01();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  cached_ = r * std::sin(a);
  have_cached_ = true;
  return r * std::cos(a);
}

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean))
    throw std::invalid_argument("poisson: mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  // The mode switch at 30 is part of the reproducibility contract; both
  // branches are exact samplers, so only the consumed stream differs.
  if (mean < 30.0) return poisson_inversion(mean);
  return poisson_ptrs(mean);
}

std::uint64_t Rng::poisson_inversion(double mean) {
  double p = std::exp(-mean);
  double cdf = p;
  double u = uniform01();
  std::uint64_t k = 0;
  // cdf can saturate a hair below 1 in floating point; the cap terminates the
  // walk far beyond any mass that matters (mean < 30 here).
  const std::uint64_t cap =
      static_cast<std::uint64_t>(mean + 60.0 * std::sqrt(mean + 1.0) + 100.0);
  while (u > cdf && k < cap) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

// Hormann's PTRS transformed-rejection sampler, valid for mean >= 10;
// used here for mean >= 30.
std::uint64_t Rng::poisson_ptrs(double mean) {
  const double smu = std::sqrt(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  const double lmu = std::log(mean);
  for (;;) {
    double u = uniform01() - 0.5;
    double v = uniform01_pos();
    double us = 0.5 - std::fabs(u);
    double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    double k = kf;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * lmu - mean - std::lgamma(k + 1.0))
      return static_cast<std::uint64_t>(kf);
  }
}

}  // namespace twf
