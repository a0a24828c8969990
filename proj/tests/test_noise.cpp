#include <cmath>
#include <vector>

#include "doctest.h"
#include "twf/noise.hpp"
#include "twf/rng.hpp"

using twf::cplx;
using twf::cspan;
using twf::NoiseSpec;
using twf::observe;

TEST_CASE("noiseless observation is the identity") {
  std::vector<double> mu{1.0, 4.0, 0.25};
  auto y = observe(cspan(mu), NoiseSpec::noiseless(), 99);
  CHECK(y == mu);
}

TEST_CASE("poisson observation reproduces under a fixed seed") {
  std::vector<double> mu{3.0, 50.0, 0.0, 7.5};
  auto a = observe(cspan(mu), NoiseSpec::poisson(), 5);
  auto b = observe(cspan(mu), NoiseSpec::poisson(), 5);
  auto c = observe(cspan(mu), NoiseSpec::poisson(), 6);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a[2] == 0.0);  // Poisson(0) is degenerate at 0
}

TEST_CASE("poisson rejects negative intensities") {
  std::vector<double> mu{1.0, -0.5};
  CHECK_THROWS_AS(observe(cspan(mu), NoiseSpec::poisson(), 1),
                  std::invalid_argument);
}

TEST_CASE("poisson sample mean tracks the intensity") {
  {
    std::vector<double> mu(10000, 100.0);
    auto y = observe(cspan(mu), NoiseSpec::poisson(), 12);
    double s = 0.0;
    for (double v : y) s += v;
    CHECK(std::fabs(s / 10000.0 - 100.0) < 3.0);
  }
  {
    const std::size_t N = 100000;
    double c = 100.0;
    std::vector<double> mu(N, c);
    auto y = observe(cspan(mu), NoiseSpec::poisson(), 13);
    double s = 0.0;
    for (double v : y) s += v;
    CHECK(std::fabs(s / static_cast<double>(N) - c) <=
          4.0 * std::sqrt(c / static_cast<double>(N)));
  }
}

TEST_CASE("additive noise is passed through verbatim, negatives included") {
  std::vector<double> mu{1.0, 2.0, 3.0};
  std::vector<double> eta{0.5, -4.0, 0.0};
  auto y = observe(cspan(mu), NoiseSpec::additive(eta), 0);
  CHECK(y[0] == 1.5);
  CHECK(y[1] == -2.0);
  CHECK(y[2] == 3.0);

  std::vector<double> short_eta{1.0};
  CHECK_THROWS_AS(observe(cspan(mu), NoiseSpec::additive(short_eta), 0),
                  std::invalid_argument);
}

TEST_CASE("snr is three times the squared norm") {
  std::vector<double> x{0.6, 0.8};  // unit norm
  CHECK(twf::snr(cspan(x)) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(twf::snr_db(cspan(x)) ==
        doctest::Approx(10.0 * std::log10(3.0)).epsilon(1e-14));
  CHECK(twf::snr_db(cspan(x)) == doctest::Approx(4.77121254719662).epsilon(1e-12));

  std::vector<double> zero{0.0, 0.0};
  CHECK(twf::snr(cspan(zero)) == 0.0);
  CHECK_THROWS_AS(twf::snr_db(cspan(zero)), std::invalid_argument);
}

TEST_CASE("relative mse handles the sign and scale cases") {
  std::vector<double> x{0.6, 0.8};
  std::vector<double> nx{-0.6, -0.8};
  std::vector<double> x2{1.2, 1.6};
  CHECK(twf::relative_mse(cspan(x), cspan(x)) == 0.0);
  CHECK(twf::relative_mse(cspan(nx), cspan(x)) == 0.0);
  // dist(2x, x) = min(|x|, |3x|) = 1 with |x| = 1
  CHECK(twf::relative_mse(cspan(x2), cspan(x)) ==
        doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("relative mse ignores a global phase") {
  std::vector<cplx> x{cplx{1.0, 2.0}, cplx{-0.5, 0.25}};
  auto z = x;
  cplx rot = std::polar(1.0, 2.1);
  for (auto& v : z) v *= rot;
  CHECK(twf::relative_mse(cspan(z), cspan(x)) < 1e-24);
}

TEST_CASE("db conversion") {
  CHECK(twf::to_db(1.0) == 0.0);
  CHECK(twf::to_db(0.01) == doctest::Approx(-20.0).epsilon(1e-13));
}
