#include "twf/dft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>
#include <vector>

namespace twf {

namespace {
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Dft::Dft(std::size_t n) : n_(n) {
  if (n == 0) throw std::invalid_argument("Dft: n must be positive");
  std::vector<cplx> scratch_in(n), scratch_out(n);
  auto* in = reinterpret_cast<fftw_complex*>(scratch_in.data());
  auto* out = reinterpret_cast<fftw_complex*>(scratch_out.data());
  std::lock_guard<std::mutex> lock(plan_mutex());
  fwd_ = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
  bwd_ = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_BACKWARD,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (fwd_ == nullptr || bwd_ == nullptr)
    throw std::runtime_error("Dft: fftw plan creation failed");
}

Dft::~Dft() {
  if (fwd_ != nullptr || bwd_ != nullptr) {
    std::lock_guard<std::mutex> lock(plan_mutex());
    if (fwd_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (bwd_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
  }
}

Dft::Dft(Dft&& other) noexcept
    : n_(other.n_), fwd_(other.fwd_), bwd_(other.bwd_) {
  other.fwd_ = nullptr;
  other.bwd_ = nullptr;
  other.n_ = 0;
}

Dft& Dft::operator=(Dft&& other) noexcept {
  if (this != &other) {
    this->~Dft();
    n_ = other.n_;
    fwd_ = other.fwd_;
    bwd_ = other.bwd_;
    other.fwd_ = nullptr;
    other.bwd_ = nullptr;
    other.n_ = 0;
  }
  return *this;
}

void Dft::forward(const cplx* in, cplx* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(fwd_),
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void Dft::backward(const cplx* in, cplx* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(bwd_),
                   reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace twf
