#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "twf/scalar.hpp"

namespace twf {

// SplitMix64 finisher.  Used for seed derivation only, never as a stream.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Deterministic per-trial seed: fold the master seed and the cell coordinates
// (experiment id, design id, n, m, snr, trial index, stream id, ...) through
// SplitMix64.  Every run of the harness derives the same seeds for the same
// spec, which is what makes the CSV output byte-reproducible.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = mix64(master ^ 0x243F6A8885A308D3ull);
  for (std::uint64_t c : coords) h = mix64(h ^ c);
  return h;
}

// Reproducible random stream.  The engine is std::mt19937_64 (fully specified
// by the standard); all distributions are implemented here by hand because the
// std:: distribution adaptors are implementation-defined and would break
// cross-platform reproducibility:
//   uniform:  53-bit mantissa scaling of the raw 64-bit word
//   normal:   Box-Muller, pairs cached
//   poisson:  sequential-search inversion for mean < 30, Hormann's PTRS
//             transformed rejection for mean >= 30
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1)
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // (0, 1], safe as a log argument
  double uniform01_pos() {
    return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
  }

  double normal();

  // Standard complex Gaussian CN(0,1): variance 1/2 per component.
  cplx cnormal() {
    constexpr double half = 0.70710678118654752440;
    double re = normal();
    double im = normal();
    return {re * half, im * half};
  }

  std::uint64_t poisson(double mean);

  // Top two bits of the next word; used for four-symbol mask draws.
  unsigned two_bits() { return static_cast<unsigned>(eng_() >> 62); }

 private:
  std::uint64_t poisson_inversion(double mean);
  std::uint64_t poisson_ptrs(double mean);

  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace twf
