#include "twf/noise.hpp"

#include <cmath>

#include "twf/rng.hpp"

namespace twf {

std::vector<double> observe(std::span<const double> mu, const NoiseSpec& spec,
                            std::uint64_t seed) {
  std::vector<double> y(mu.begin(), mu.end());
  switch (spec.kind) {
    case NoiseSpec::Kind::noiseless:
      break;
    case NoiseSpec::Kind::poisson: {
      Rng rng(seed);
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(mu[i] >= 0.0) || !std::isfinite(mu[i]))
          throw std::invalid_argument(
              "observe: poisson requires finite nonnegative intensities");
        y[i] = static_cast<double>(rng.poisson(mu[i]));
      }
      break;
    }
    case NoiseSpec::Kind::additive: {
      if (spec.eta.size() != mu.size())
        throw std::invalid_argument("observe: eta size mismatch");
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += spec.eta[i];
      break;
    }
  }
  return y;
}

}  // namespace twf
