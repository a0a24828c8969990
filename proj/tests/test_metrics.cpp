#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "twf/metrics.hpp"
#include "twf/rng.hpp"

using twf::align;
using twf::cplx;
using twf::cspan;
using twf::dist;
using twf::relative_error;

namespace {

template <class T>
std::vector<T> random_vec(std::size_t n, std::uint64_t seed) {
  twf::Rng rng(seed);
  std::vector<T> v(n);
  for (auto& x : v) {
    if constexpr (twf::is_complex_v<T>)
      x = rng.cnormal();
    else
      x = rng.normal();
  }
  return v;
}

double grid_min_phase_distance(std::span<const cplx> z, std::span<const cplx> x,
                               int grid) {
  double best = std::numeric_limits<double>::infinity();
  for (int g = 0; g < grid; ++g) {
    double phi = 2.0 * std::numbers::pi * g / grid;
    cplx rot = std::polar(1.0, -phi);
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
      acc += std::norm(rot * z[i] - x[i]);
    best = std::min(best, std::sqrt(acc));
  }
  return best;
}

}  // namespace

TEST_CASE("distance vanishes at the signal and its negation") {
  std::vector<double> x{1.5, -2.0, 0.25};
  std::vector<double> nx{-1.5, 2.0, -0.25};
  CHECK(dist(cspan(x), cspan(x)) == 0.0);
  CHECK(dist(cspan(nx), cspan(x)) == 0.0);
}

TEST_CASE("two-point real distance picks the closer sign") {
  std::vector<double> z{3.0, 6.0};
  std::vector<double> x{2.7, 8.0};
  // |z-x|^2 = 0.09 + 4 = 4.09, |z+x|^2 = 32.49 + 196
  CHECK(dist(cspan(z), cspan(x)) ==
        doctest::Approx(std::sqrt(4.09)).epsilon(1e-14));
  CHECK(relative_error(cspan(z), cspan(x)) ==
        doctest::Approx(std::sqrt(4.09) / std::sqrt(7.29 + 64.0))
            .epsilon(1e-14));
}

TEST_CASE("relative error is 1 from the origin and rejects a zero reference") {
  std::vector<double> x{2.0, -1.0};
  std::vector<double> zero{0.0, 0.0};
  CHECK(relative_error(cspan(zero), cspan(x)) == 1.0);
  CHECK_THROWS_AS(relative_error(cspan(x), cspan(zero)),
                  std::invalid_argument);
}

TEST_CASE("complex distance is phase invariant and symmetric") {
  auto z = random_vec<cplx>(7, 31);
  auto x = random_vec<cplx>(7, 32);
  double d = dist(cspan(z), cspan(x));
  CHECK(dist(cspan(x), cspan(z)) == doctest::Approx(d).epsilon(1e-12));
  for (double theta : {0.3, 1.7, 4.4}) {
    auto zr = z;
    cplx rot = std::polar(1.0, theta);
    for (auto& v : zr) v *= rot;
    CHECK(dist(cspan(zr), cspan(x)) == doctest::Approx(d).epsilon(1e-10));
  }
}

TEST_CASE("real distance is bit-stable under global negation") {
  auto z = random_vec<double>(9, 41);
  auto x = random_vec<double>(9, 42);
  auto nz = z;
  for (auto& v : nz) v = -v;
  CHECK(dist(cspan(z), cspan(x)) == dist(cspan(nz), cspan(x)));
}

TEST_CASE("distance never exceeds the plain Euclidean distance") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto z = random_vec<cplx>(5, 500 + s);
    auto x = random_vec<cplx>(5, 600 + s);
    double acc = 0.0;
    for (std::size_t i = 0; i < 5; ++i) acc += std::norm(z[i] - x[i]);
    CHECK(dist(cspan(z), cspan(x)) <= std::sqrt(acc) + 1e-12);
  }
}

TEST_CASE("closed-form complex distance matches a dense phase grid") {
  for (std::uint64_t s = 0; s < 50; ++s) {
    auto z = random_vec<cplx>(5, 700 + s);
    auto x = random_vec<cplx>(5, 800 + s);
    double closed = dist(cspan(z), cspan(x));
    double grid = grid_min_phase_distance(cspan(z), cspan(x), 10000);
    CHECK(closed <= grid + 1e-9);   // the closed form is the true minimum
    CHECK(std::fabs(closed - grid) <= 1e-6);
  }
}

TEST_CASE("alignment reproduces the distance exactly") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto z = random_vec<cplx>(6, 900 + s);
    auto x = random_vec<cplx>(6, 950 + s);
    auto al = align(cspan(z), cspan(x));
    CHECK(al.distance == doctest::Approx(dist(cspan(z), cspan(x))).epsilon(1e-12));
    double acc = 0.0;
    for (std::size_t i = 0; i < 6; ++i) acc += std::norm(al.z_aligned[i] - x[i]);
    CHECK(al.distance == doctest::Approx(std::sqrt(acc)).epsilon(1e-12));
    CHECK(twf::nrm(cspan(al.z_aligned)) ==
          doctest::Approx(twf::nrm(cspan(z))).epsilon(1e-12));
  }
}

TEST_CASE("alignment fixes a pure phase rotation") {
  auto x = random_vec<cplx>(5, 1000);
  auto z = x;
  for (auto& v : z) v *= cplx{0.0, 1.0};
  auto al = align(cspan(z), cspan(x));
  CHECK(al.phase == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(std::abs(al.z_aligned[i] - x[i]) < 1e-12);
}

TEST_CASE("real alignment flips the sign only when that is closer") {
  std::vector<double> x{1.0, 2.0};
  std::vector<double> z{-1.0, -2.0};
  auto al = align(cspan(z), cspan(x));
  CHECK(al.phase == std::numbers::pi);
  CHECK(al.z_aligned[0] == 1.0);
  CHECK(al.distance == 0.0);

  std::vector<double> zero{0.0, 0.0};  // tie: keep phase 0
  auto tie = align(cspan(zero), cspan(x));
  CHECK(tie.phase == 0.0);
}

TEST_CASE("orthogonal unit vectors sit at distance sqrt(2) with phase 0") {
  std::vector<cplx> x{cplx{1.0, 0.0}, cplx{0.0, 0.0}};
  std::vector<cplx> z{cplx{0.0, 0.0}, cplx{1.0, 0.0}};
  CHECK(dist(cspan(z), cspan(x)) ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(align(cspan(z), cspan(x)).phase == 0.0);
}

TEST_CASE("size mismatch is rejected") {
  std::vector<double> a{1.0, 2.0};
  std::vector<double> b{1.0};
  CHECK_THROWS_AS(dist(cspan(a), cspan(b)), std::invalid_argument);
  CHECK_THROWS_AS(align(cspan(a), cspan(b)), std::invalid_argument);
}
