#pragma once

#include <cstdint>
#include <stdexcept>

#include "twf/dft.hpp"
#include "twf/scalar.hpp"

namespace twf {

// Row-major m x n sensing matrix with explicit rows a_i.  Conventions used
// everywhere downstream:
//   forward(z)_i = <a_i, z> = sum_j conj(a_ij) z_j   (plain dot in the real case)
//   adjoint(v)   = sum_i v_i a_i
// With the inner product <u, w> = sum conj(u_i) w_i these are exact adjoints
// of each other.  Instances are immutable after construction and safe to
// share across threads.
template <class T>
class DenseEnsemble {
 public:
  using scalar_type = T;

  DenseEnsemble(std::size_t m, std::size_t n, std::vector<T> entries)
      : m_(m), n_(n), entries_(std::move(entries)) {
    if (m == 0 || n == 0)
      throw std::invalid_argument("DenseEnsemble: m and n must be positive");
    if (entries_.size() != m * n)
      throw std::invalid_argument("DenseEnsemble: entries size != m*n");
    row_norms_.resize(m);
    for (std::size_t i = 0; i < m; ++i)
      row_norms_[i] = nrm(std::span<const T>(entries_.data() + i * n, n));
  }

  std::size_t rows() const { return m_; }
  std::size_t dim() const { return n_; }

  std::span<const T> row(std::size_t i) const {
    return {entries_.data() + i * n_, n_};
  }

  const std::vector<double>& row_norms() const { return row_norms_; }

  void forward(std::span<const T> z, std::span<T> out) const {
    if (z.size() != n_ || out.size() != m_)
      throw std::invalid_argument("forward: size mismatch");
    for (std::size_t i = 0; i < m_; ++i) out[i] = dot(row(i), z);
  }

  std::vector<T> forward(std::span<const T> z) const {
    std::vector<T> out(m_);
    forward(z, std::span<T>(out));
    return out;
  }

  void adjoint(std::span<const T> v, std::span<T> out) const {
    if (v.size() != m_ || out.size() != n_)
      throw std::invalid_argument("adjoint: size mismatch");
    for (std::size_t j = 0; j < n_; ++j) out[j] = T{};
    for (std::size_t i = 0; i < m_; ++i) {
      const T* a = entries_.data() + i * n_;
      T vi = v[i];
      for (std::size_t j = 0; j < n_; ++j) out[j] += vi * a[j];
    }
  }

  std::vector<T> adjoint(std::span<const T> v) const {
    std::vector<T> out(n_);
    adjoint(v, std::span<T>(out));
    return out;
  }

 private:
  std::size_t m_, n_;
  std::vector<T> entries_;
  std::vector<double> row_norms_;
};

// Coded diffraction pattern ensemble: L unimodular masks d^(l) with symbols
// drawn from {1, -1, i, -i}, rows indexed i = l*n + k, and
//   forward(z)|_l  = DFT(d^(l) .* z)            (unnormalized)
//   adjoint(v)|summed over l = conj(d^(l)) .* IDFT(v^(l))  (unnormalized)
// Every row norm is exactly sqrt(n).  m = n * L.
class CdpEnsemble {
 public:
  using scalar_type = cplx;

  CdpEnsemble(std::size_t n, std::size_t num_masks, std::vector<cplx> masks);

  std::size_t rows() const { return n_ * L_; }
  std::size_t dim() const { return n_; }
  std::size_t num_masks() const { return L_; }

  std::span<const cplx> mask(std::size_t l) const {
    return {masks_.data() + l * n_, n_};
  }

  const std::vector<double>& row_norms() const { return row_norms_; }

  void forward(std::span<const cplx> z, std::span<cplx> out) const;
  std::vector<cplx> forward(std::span<const cplx> z) const;
  void adjoint(std::span<const cplx> v, std::span<cplx> out) const;
  std::vector<cplx> adjoint(std::span<const cplx> v) const;

 private:
  std::size_t n_, L_;
  std::vector<cplx> masks_;
  Dft dft_;
  std::vector<double> row_norms_;
};

// Sampling.  Entry order is row-major and fixed, so a given (shape, seed)
// pair reproduces the same ensemble on every platform.
DenseEnsemble<double> sample_gaussian_real(std::size_t n, std::size_t m,
                                           std::uint64_t seed);
DenseEnsemble<cplx> sample_gaussian_complex(std::size_t n, std::size_t m,
                                            std::uint64_t seed);
CdpEnsemble sample_cdp(std::size_t n, std::size_t num_masks,
                       std::uint64_t seed);

// Noiseless intensities |<a_i, x>|^2.
template <class E>
std::vector<double> intensities(const E& e,
                                std::span<const typename E::scalar_type> x) {
  auto w = e.forward(x);
  std::vector<double> mu(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) mu[i] = abs2(w[i]);
  return mu;
}

}  // namespace twf
