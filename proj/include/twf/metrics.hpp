#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "twf/scalar.hpp"

namespace twf {

// Distance modulo the unrecoverable global phase:
//   real:    min(|z - x|, |z + x|)
//   complex: min over phi of |exp(-i*phi) z - x|, attained at phi = arg<x, z>
// Both branches evaluate the minimizing candidate elementwise, so there is no
// cancellation blow-up when z is close to (a rotation of) x.
template <class T>
double dist(std::span<const T> z, std::span<const T> x) {
  if (z.size() != x.size()) throw std::invalid_argument("dist: size mismatch");
  if constexpr (is_complex_v<T>) {
    cplx s = dot(x, z);
    double mag = std::abs(s);
    cplx rot = mag > 0.0 ? std::conj(s) / mag : cplx{1.0, 0.0};
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) acc += abs2(rot * z[i] - x[i]);
    return std::sqrt(acc);
  } else {
    double dm = 0.0, dp = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      dm += abs2(z[i] - x[i]);
      dp += abs2(z[i] + x[i]);
    }
    return std::sqrt(dm <= dp ? dm : dp);
  }
}

// dist / |x|; requires a nonzero reference signal.
template <class T>
double relative_error(std::span<const T> z, std::span<const T> x) {
  double nx = nrm(x);
  if (nx == 0.0) throw std::invalid_argument("relative_error: x must be nonzero");
  return dist(z, x) / nx;
}

template <class T>
struct AlignedEstimate {
  std::vector<T> z_aligned;  // exp(-i*phase) * z, resp. sign * z
  double phase;              // in [0, 2*pi); 0 or pi in the real case
  double distance;           // == dist(z, x)
};

// Optimal global-phase alignment of z onto x.  Ties at the real branch go to
// phase 0.
template <class T>
AlignedEstimate<T> align(std::span<const T> z, std::span<const T> x) {
  if (z.size() != x.size()) throw std::invalid_argument("align: size mismatch");
  AlignedEstimate<T> out;
  out.z_aligned.assign(z.begin(), z.end());
  if constexpr (is_complex_v<T>) {
    cplx s = dot(x, z);
    double mag = std::abs(s);
    double phi = mag > 0.0 ? std::arg(s) : 0.0;
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    cplx rot = mag > 0.0 ? std::conj(s) / mag : cplx{1.0, 0.0};
    for (T& v : out.z_aligned) v = rot * v;
    out.phase = phi;
  } else {
    double dm = 0.0, dp = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      dm += abs2(z[i] - x[i]);
      dp += abs2(z[i] + x[i]);
    }
    if (dm <= dp) {
      out.phase = 0.0;
    } else {
      out.phase = std::numbers::pi;
      for (T& v : out.z_aligned) v = -v;
    }
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) acc += abs2(out.z_aligned[i] - x[i]);
  out.distance = std::sqrt(acc);
  return out;
}

}  // namespace twf
