#pragma once

#include <cstddef>

#include "twf/scalar.hpp"

namespace twf {

// Unnormalized 1-D DFT pair backed by FFTW.
//   forward:  out_k = sum_j in_j exp(-2*pi*i*j*k/n)
//   backward: out_j = sum_k in_k exp(+2*pi*i*j*k/n)   (the exact adjoint)
// Neither direction applies a 1/n factor, so <forward(z), v> == <z, backward(v)>
// holds to round-off.  Plans are created with FFTW_ESTIMATE for run-to-run
// determinism and FFTW_UNALIGNED so execution works on arbitrary buffers.
// Plan creation/destruction is serialized behind a global mutex (FFTW's
// planner is not thread-safe); execution on distinct buffers is safe
// concurrently.
class Dft {
 public:
  explicit Dft(std::size_t n);
  ~Dft();
  Dft(Dft&& other) noexcept;
  Dft& operator=(Dft&& other) noexcept;
  Dft(const Dft&) = delete;
  Dft& operator=(const Dft&) = delete;

  std::size_t size() const { return n_; }
  void forward(const cplx* in, cplx* out) const;
  void backward(const cplx* in, cplx* out) const;

 private:
  std::size_t n_ = 0;
  void* fwd_ = nullptr;  // fftw_plan
  void* bwd_ = nullptr;  // fftw_plan
};

}  // namespace twf
