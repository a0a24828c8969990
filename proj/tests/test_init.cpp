#include <cmath>
#include <vector>

#include "doctest.h"
#include "twf/init.hpp"
#include "twf/measurement.hpp"
#include "twf/metrics.hpp"
#include "twf/rng.hpp"

using twf::cplx;
using twf::cspan;
using twf::DenseEnsemble;
using twf::InitConfig;
using twf::spectral_init;

TEST_CASE("lambda0 is the root of the mean observation") {
  std::vector<double> y1{4.0, 4.0, 4.0};
  CHECK(twf::lambda0(cspan(y1)) == 2.0);
  std::vector<double> y2{0.0, 0.0};
  CHECK(twf::lambda0(cspan(y2)) == 0.0);
  std::vector<double> y3{1.0, 2.0, 3.0, 6.0};
  CHECK(twf::lambda0(cspan(y3)) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
  std::vector<double> none;
  CHECK_THROWS_AS(twf::lambda0(cspan(none)), std::invalid_argument);
  std::vector<double> neg{-4.0, 1.0};
  CHECK_THROWS_AS(twf::lambda0(cspan(neg)), std::domain_error);
}

TEST_CASE("masked quadratic matvec drops rows and divides by m") {
  DenseEnsemble<double> e(2, 2, {1, 0, 0, 1});
  std::vector<double> y{3.0, 1.0};
  std::vector<double> v{1.0, 0.0};
  std::vector<double> out(2);

  std::vector<std::uint8_t> none(2, 0);
  twf::truncated_matvec(e, cspan(y), none, cspan(v), std::span<double>(out));
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);

  std::vector<std::uint8_t> all(2, 1);
  twf::truncated_matvec(e, cspan(y), all, cspan(v), std::span<double>(out));
  CHECK(out[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(out[1] == 0.0);
}

TEST_CASE("matvec agrees with the dense quadratic-form oracle") {
  auto e = twf::sample_gaussian_real(3, 6, 71);
  twf::Rng rng(72);
  std::vector<double> y(6), v{0.4, -1.1, 0.7};
  std::vector<std::uint8_t> keep(6);
  for (std::size_t i = 0; i < 6; ++i) {
    y[i] = 10.0 * rng.uniform01();
    keep[i] = rng.uniform01() < 0.7;
  }
  keep[0] = 1;  // at least one row survives

  // explicit Y = (1/m) sum keep_i y_i a_i a_i^T, then Y*v
  double Y[3][3] = {};
  for (std::size_t i = 0; i < 6; ++i) {
    if (!keep[i]) continue;
    auto a = e.row(i);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) Y[r][c] += y[i] * a[r] * a[c] / 6.0;
  }
  std::vector<double> want(3, 0.0);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) want[r] += Y[r][c] * v[c];

  std::vector<double> got(3);
  twf::truncated_matvec(e, cspan(y), keep, cspan(v), std::span<double>(got));
  for (int r = 0; r < 3; ++r)
    CHECK(got[r] == doctest::Approx(want[r]).epsilon(1e-10));
}

TEST_CASE("identity-design initialization recovers the dominant axis") {
  DenseEnsemble<double> e(2, 2, {1, 0, 0, 1});
  std::vector<double> y{3.0, 1.0};
  InitConfig cfg;
  cfg.seed = 3;
  auto res = spectral_init(e, cspan(y), cfg);
  CHECK(res.kept_count == 2);
  CHECK(res.lambda0 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  // scale = sqrt(m*n / sum |a_i|^2) * lambda0 = sqrt(2)*sqrt(2) = 2
  CHECK(twf::nrm(cspan(res.z0)) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::fabs(res.z0[0]) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::fabs(res.z0[1]) < 1e-6);
}

TEST_CASE("initialization norm follows the scale formula") {
  auto check_norm = [](const auto& e, std::span<const double> y) {
    InitConfig cfg;
    cfg.seed = 4;
    auto res = spectral_init(e, y, cfg);
    double norm_sum = 0.0;
    for (double rn : e.row_norms()) norm_sum += rn * rn;
    double want = std::sqrt(static_cast<double>(e.rows()) *
                            static_cast<double>(e.dim()) / norm_sum) *
                  res.lambda0;
    CHECK(twf::nrm(cspan(res.z0)) == doctest::Approx(want).epsilon(1e-12));
  };
  {
    auto e = twf::sample_gaussian_real(8, 32, 5);
    twf::Rng rng(6);
    std::vector<double> x(8);
    for (auto& v : x) v = rng.normal();
    auto y = twf::intensities(e, cspan(x));
    check_norm(e, cspan(y));
  }
  {
    auto e = twf::sample_cdp(8, 2, 7);
    twf::Rng rng(8);
    std::vector<cplx> x(8);
    for (auto& v : x) v = rng.cnormal();
    auto y = twf::intensities(e, cspan(x));
    check_norm(e, cspan(y));
  }
}

TEST_CASE("scaling the observations by 4 doubles the start exactly") {
  auto run = [](const auto& e, const std::vector<double>& y) {
    InitConfig cfg;
    cfg.seed = 10;
    auto base = spectral_init(e, cspan(y), cfg);
    std::vector<double> y4(y);
    for (auto& v : y4) v *= 4.0;
    auto scaled = spectral_init(e, cspan(y4), cfg);
    CHECK(scaled.kept_count == base.kept_count);
    for (std::size_t j = 0; j < base.z0.size(); ++j)
      CHECK(scaled.z0[j] == 2.0 * base.z0[j]);
  };
  auto e = twf::sample_gaussian_real(5, 12, 9);
  twf::Rng rng(10);
  std::vector<double> x(5);
  for (auto& v : x) v = rng.normal();
  run(e, twf::intensities(e, cspan(x)));
}

TEST_CASE("truncated and plain starts coincide when the cut is inactive") {
  auto e = twf::sample_gaussian_real(6, 24, 11);
  twf::Rng xr(12);
  std::vector<double> x(6);
  for (auto& v : x) v = xr.normal();
  auto y = twf::intensities(e, cspan(x));
  InitConfig cfg;
  cfg.seed = 13;
  cfg.alpha_y = 1e6;  // cut far above every observation
  auto trunc = spectral_init(e, cspan(y), cfg);
  cfg.truncated = false;
  auto plain = spectral_init(e, cspan(y), cfg);
  CHECK(trunc.kept_count == 24);
  CHECK(plain.kept_count == 24);
  for (std::size_t j = 0; j < 6; ++j) CHECK(trunc.z0[j] == plain.z0[j]);
}

TEST_CASE("rayleigh quotient is nondecreasing along power iterations") {
  auto e = twf::sample_gaussian_real(6, 24, 14);
  twf::Rng xr2(15);
  std::vector<double> x(6);
  for (auto& v : x) v = xr2.normal();
  auto y = twf::intensities(e, cspan(x));
  std::vector<std::uint8_t> keep(24, 1);
  auto v = twf::init_start_vector<double>(6, 16);
  std::vector<double> w(6);
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < 30; ++it) {
    twf::truncated_matvec(e, cspan(y), keep, cspan(v), std::span<double>(w));
    CHECK(twf::nrm(cspan(v)) == doctest::Approx(1.0).epsilon(1e-12));
    double rq = twf::dot(cspan(v), cspan(w));  // v is unit
    CHECK(rq >= prev - 1e-12 * std::max(1.0, std::fabs(prev)));
    prev = rq;
    double nw = twf::nrm(cspan(w));
    REQUIRE(nw > 0.0);
    for (std::size_t j = 0; j < 6; ++j) v[j] = w[j] / nw;
  }
}

TEST_CASE("degenerate observations are rejected") {
  DenseEnsemble<double> e(2, 2, {1, 0, 0, 1});
  InitConfig cfg;
  cfg.seed = 17;
  {
    // both rows fall outside the cut: 9 * mean = 0.45 < |y_i|
    std::vector<double> y{-10.0, 10.1};
    CHECK_THROWS_AS(spectral_init(e, cspan(y), cfg), std::runtime_error);
  }
  {
    // all-zero observations collapse the power iteration even after a restart
    std::vector<double> y{0.0, 0.0};
    CHECK_THROWS_AS(spectral_init(e, cspan(y), cfg), std::runtime_error);
  }
  {
    std::vector<double> y{1.0, 1.0};
    InitConfig bad = cfg;
    bad.alpha_y = 2.0;
    CHECK_THROWS_AS(spectral_init(e, cspan(y), bad), std::invalid_argument);
    bad = cfg;
    bad.power_iters = 0;
    CHECK_THROWS_AS(spectral_init(e, cspan(y), bad), std::invalid_argument);
    std::vector<double> wrong_len{1.0};
    CHECK_THROWS_AS(spectral_init(e, cspan(wrong_len), cfg),
                    std::invalid_argument);
  }
  {
    // the loose cut is legal for the plain variant
    std::vector<double> y{1.0, 1.0};
    InitConfig plain = cfg;
    plain.truncated = false;
    plain.alpha_y = 0.5;
    CHECK_NOTHROW(spectral_init(e, cspan(y), plain));
  }
}

TEST_CASE("noiseless start lands in the basin at moderate oversampling") {
  // n=128, m=6n: the start error concentrates near 0.71 with the right norm;
  // 50 trials must land below 0.85 in at least 45
  const std::size_t n = 128, m = 6 * n;
  int good = 0;
  for (std::uint64_t t = 0; t < 50; ++t) {
    auto e = twf::sample_gaussian_real(n, m, twf::derive_seed(90, {t, 1}));
    twf::Rng rng(twf::derive_seed(90, {t, 2}));
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    auto y = twf::intensities(e, cspan(x));
    InitConfig cfg;
    cfg.seed = twf::derive_seed(90, {t, 3});
    auto res = spectral_init(e, cspan(y), cfg);
    double rel = twf::relative_error(cspan(res.z0), cspan(x));
    if (rel <= 0.85) ++good;
    CHECK(res.z0.size() == n);
    CHECK(twf::nrm(cspan(res.z0)) > 0.5 * twf::nrm(cspan(x)));
    CHECK(twf::nrm(cspan(res.z0)) < 1.5 * twf::nrm(cspan(x)));
  }
  CHECK(good >= 45);
}
