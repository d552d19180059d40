// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "matwalk/rng.hpp"
#include "matwalk/stats.hpp"

using namespace matwalk;
using namespace matwalk::stats;

TEST_SUITE("stats") {
  TEST_CASE("wilson interval matches the textbook 1-in-10 case") {
    const Interval ci = wilson_ci(1, 10);
    CHECK(ci.lo == doctest::Approx(0.0179).epsilon(0.02));
    CHECK(ci.hi == doctest::Approx(0.4042).epsilon(0.02));
    CHECK(ci.contains(0.1));
  }

  TEST_CASE("wilson interval stays inside [0,1] at the edges") {
    CHECK(wilson_ci(0, 50).lo == 0.0);
    CHECK(wilson_ci(50, 50).hi == 1.0);
    CHECK(wilson_ci(0, 0).width() == 1.0);
  }

  TEST_CASE("ks statistic on a hand-computed three-point sample") {
    const double d = ks_statistic({0.25, 0.5, 0.75},
                                  [](double t) { return t; });
    CHECK(d == doctest::Approx(0.25).epsilon(1e-12));
  }

  TEST_CASE("ks p-value near the classic 5 percent critical point") {
    const std::size_t n = 1000;
    const double sn = std::sqrt(static_cast<double>(n));
    const double d = 1.358 / (sn + 0.12 + 0.11 / sn);
    CHECK(ks_pvalue(d, n) == doctest::Approx(0.05).epsilon(0.05));
    CHECK(ks_pvalue(1e-6, n) == doctest::Approx(1.0));
    CHECK(ks_pvalue(0.5, n) < 1e-10);
  }

  TEST_CASE("gamma_q identities") {
    for (double x : {0.1, 0.5, 1.0, 2.5, 7.0}) {
      CHECK(gamma_q(1.0, x) == doctest::Approx(std::exp(-x)).epsilon(1e-12));
      CHECK(gamma_q(0.5, x) ==
            doctest::Approx(std::erfc(std::sqrt(x))).epsilon(1e-12));
    }
  }

  TEST_CASE("chi-square survival values") {
    CHECK(chi2_sf(3.841, 1) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(chi2_sf(5.991, 2) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(chi2_sf(0.0, 3) == doctest::Approx(1.0));
  }

  TEST_CASE("chi-square homogeneity flags unequal rows only") {
    CHECK(chi2_homogeneity_pvalue({{50, 50}, {50, 50}}) ==
          doctest::Approx(1.0).epsilon(1e-9));
    CHECK(chi2_homogeneity_pvalue({{90, 10}, {10, 90}}) < 1e-10);
  }

  TEST_CASE("linear fit recovers an exact line") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y;
    for (double xi : x) y.push_back(3.5 - 2.0 * xi);
    const LinearFit f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(f.r2 == doctest::Approx(1.0));
  }

  TEST_CASE("accumulator merge equals serial accumulation") {
    RngStream r = RngStream::from_seed(7).child(0);
    std::vector<double> xs(10000);
    for (auto& x : xs) x = r.next_normal() * 3.0 + 1.0;

    Accumulator serial;
    for (double x : xs) serial.add(x);

    for (std::size_t cut : {1ul, 17ul, 5000ul, 9999ul}) {
      Accumulator a, b;
      for (std::size_t i = 0; i < cut; ++i) a.add(xs[i]);
      for (std::size_t i = cut; i < xs.size(); ++i) b.add(xs[i]);
      a.merge(b);
      CHECK(a.n == serial.n);
      CHECK(a.mean == doctest::Approx(serial.mean).epsilon(1e-12));
      CHECK(a.variance() == doctest::Approx(serial.variance()).epsilon(1e-10));
    }
  }

  TEST_CASE("rayleigh cdf") {
    CHECK(rayleigh_cdf(0.0) == 0.0);
    CHECK(rayleigh_cdf(1.0) == doctest::Approx(1.0 - std::exp(-0.5)));
    CHECK(rayleigh_cdf(10.0) == doctest::Approx(1.0));
  }
}
