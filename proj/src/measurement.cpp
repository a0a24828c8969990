#include "twf/measurement.hpp"

#include <cmath>

#include "twf/rng.hpp"

namespace twf {

CdpEnsemble::CdpEnsemble(std::size_t n, std::size_t num_masks,
                         std::vector<cplx> masks)
    : n_(n), L_(num_masks), masks_(std::move(masks)), dft_(n) {
  if (n == 0 || num_masks == 0)
    throw std::invalid_argument("CdpEnsemble: n and L must be positive");
  if (masks_.size() != n_ * L_)
    throw std::invalid_argument("CdpEnsemble: masks size != n*L");
  row_norms_.assign(n_ * L_, std::sqrt(static_cast<double>(n_)));
}

void CdpEnsemble::forward(std::span<const cplx> z, std::span<cplx> out) const {
  if (z.size() != n_ || out.size() != n_ * L_)
    throw std::invalid_argument("forward: size mismatch");
  std::vector<cplx> tmp(n_);
  for (std::size_t l = 0; l < L_; ++l) {
    const cplx* d = masks_.data() + l * n_;
    for (std::size_t j = 0; j < n_; ++j) tmp[j] = d[j] * z[j];
    dft_.forward(tmp.data(), out.data() + l * n_);
  }
}

std::vector<cplx> CdpEnsemble::forward(std::span<const cplx> z) const {
  std::vector<cplx> out(n_ * L_);
  forward(z, std::span<cplx>(out));
  return out;
}

void CdpEnsemble::adjoint(std::span<const cplx> v, std::span<cplx> out) const {
  if (v.size() != n_ * L_ || out.size() != n_)
    throw std::invalid_argument("adjoint: size mismatch");
  std::vector<cplx> tmp(n_);
  for (std::size_t j = 0; j < n_; ++j) out[j] = cplx{};
  for (std::size_t l = 0; l < L_; ++l) {
    dft_.backward(v.data() + l * n_, tmp.data());
    const cplx* d = masks_.data() + l * n_;
    for (std::size_t j = 0; j < n_; ++j) out[j] += std::conj(d[j]) * tmp[j];
  }
}

std::vector<cplx> CdpEnsemble::adjoint(std::span<const cplx> v) const {
  std::vector<cplx> out(n_);
  adjoint(v, std::span<cplx>(out));
  return out;
}

DenseEnsemble<double> sample_gaussian_real(std::size_t n, std::size_t m,
                                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> entries(m * n);
  for (double& x : entries) x = rng.normal();
  return {m, n, std::move(entries)};
}

DenseEnsemble<cplx> sample_gaussian_complex(std::size_t n, std::size_t m,
                                            std::uint64_t seed) {
  Rng rng(seed);
  std::vector<cplx> entries(m * n);
  for (cplx& x : entries) x = rng.cnormal();
  return {m, n, std::move(entries)};
}

CdpEnsemble sample_cdp(std::size_t n, std::size_t num_masks,
                       std::uint64_t seed) {
  static const cplx symbols[4] = {
      {1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
  Rng rng(seed);
  std::vector<cplx> masks(n * num_masks);
  for (cplx& x : masks) x = symbols[rng.two_bits()];
  return {n, num_masks, std::move(masks)};
}

}  // namespace twf
