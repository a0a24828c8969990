#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <type_traits>
#include <vector>

namespace twf {

using cplx = std::complex<double>;

template <class T>
struct is_complex : std::false_type {};
template <>
struct is_complex<cplx> : std::true_type {};
template <class T>
inline constexpr bool is_complex_v = is_complex<T>::value;

inline double abs2(double x) { return x * x; }
inline double abs2(const cplx& z) { return std::norm(z); }

inline double conj_of(double x) { return x; }
inline cplx conj_of(const cplx& z) { return std::conj(z); }

// dot(a, b) = sum_i conj(a_i) b_i.  Fixed-order accumulation; results are
// bit-stable for a given build.
inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

template <class T>
double norm2(std::span<const T> v) {
  double s = 0.0;
  for (const T& x : v) s += abs2(x);
  return s;
}

template <class T>
double nrm(std::span<const T> v) {
  return std::sqrt(norm2(v));
}

// y += alpha * x
template <class T, class S>
void axpy(S alpha, std::span<const T> x, std::span<T> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

template <class T, class S>
void scal(S alpha, std::span<T> v) {
  for (T& x : v) x = alpha * x;
}

template <class T>
bool all_finite(std::span<const T> v) {
  for (const T& x : v) {
    if constexpr (is_complex_v<T>) {
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
    } else {
      if (!std::isfinite(x)) return false;
    }
  }
  return true;
}

template <class T>
std::span<const T> cspan(const std::vector<T>& v) {
  return {v.data(), v.size()};
}

}  // namespace twf
