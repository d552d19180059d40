// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "matwalk/ergodic.hpp"
#include "matwalk/stats.hpp"

using namespace matwalk;

TEST_SUITE("ergodic") {
  TEST_CASE("scalar laws estimate their mean log gain") {
    const MatrixLaw law = MatrixLaw::gl1(ScalarLaw::normal(0.25, 1.0), 1.0);
    const ValueSE lam = lyapunov_estimate(law, 4096, 128, 128, 7, 4);
    CHECK(std::fabs(lam.value - 0.25) < 3.0 * lam.se);
  }

  TEST_CASE("rotation-only laws have exponent zero to machine precision") {
    const ValueSE lam =
        lyapunov_estimate(preset_by_name("ROT1").law, 1024, 32, 32, 7, 1);
    CHECK(std::fabs(lam.value) <= 1e-15);
    CHECK(lam.se <= 1e-15);
  }

  TEST_CASE("a single diagonal matrix converges to its top exponent") {
    // deterministic dynamics: the direction falls into the expanding axis
    const ValueSE lam =
        lyapunov_estimate(preset_by_name("DIAG1").law, 2048, 4, 256, 7, 1);
    CHECK(lam.value == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  }

  TEST_CASE("rotation-invariant laws equidistribute the angle") {
    const auto res = stationary_measure(preset_by_name("DIAGROT2").law, 512,
                                        100000, 99);
    std::vector<double> angles;
    for (const auto& v : res.measure.points())
      angles.push_back(std::atan2(v(1), v(0)) < 0
                           ? std::atan2(v(1), v(0)) + std::numbers::pi
                           : std::atan2(v(1), v(0)));
    const double d = stats::ks_statistic(angles, [](double t) {
      return t / std::numbers::pi;
    });
    CHECK(d <= 0.02);
    for (const auto& r : res.invariance)
      CHECK(r.residual <= 3.0 * r.se + 1e-9);
  }

  TEST_CASE("a single diagonal matrix concentrates mass on the fixed axis") {
    const auto res =
        stationary_measure(preset_by_name("DIAG1").law, 256, 5000, 99);
    const Eigen::VectorXd e1 = ProjPoint::axis(2, 0).rep();
    stats::Accumulator dist;
    for (const auto& v : res.measure.points())
      dist.add(angular_dist(v, e1));
    CHECK(dist.mean < 1e-9);
  }

  TEST_CASE("stationary occupation sample is self-consistent for FIN2") {
    const MatrixLaw law = preset_by_name("FIN2").law.recentered(0.0720);
    const auto res = stationary_measure(law, 1024, 65536, 13);
    for (const auto& r : res.invariance) {
      CAPTURE(r.name);
      CHECK(r.residual <= 3.0 * r.se + 1e-9);
    }
  }

  TEST_CASE("equidistribution: constants have zero discrepancy") {
    const MatrixLaw law = preset_by_name("FIN2").law;
    std::vector<ProjPoint> starts{ProjPoint::axis(2, 0), ProjPoint::axis(2, 1)};
    const auto rep = equidistribution_check(
        law, [](const Eigen::VectorXd&) { return 1.0; }, 1.0, starts,
        {4, 16, 64}, 64, 3, 1);
    for (const auto& p : rep.points) CHECK(p.sup_disc == 0.0);
    CHECK(rep.decreasing);
  }

  TEST_CASE("narrow random rotations mix at the characteristic-function rate") {
    // theta_n = theta_0 + sum phi_i with phi ~ U(1-w, 1+w), so exactly
    //   E cos(2 theta_n) = sinc(2w)^n cos(2 theta_0 + 2n)
    const double w = 0.25;
    const MatrixLaw law = MatrixLaw::rotation_diagonal(
        ScalarLaw::uniform(1.0 - w, 1.0 + w), ScalarLaw::constant(0.0), 1.0);
    const double rate = std::fabs(std::sin(2.0 * w) / (2.0 * w));
    std::vector<ProjPoint> starts{ProjPoint::axis(2, 0)};
    const auto rep = equidistribution_check(
        law,
        [](const Eigen::VectorXd& v) { return v(0) * v(0) - v(1) * v(1); },
        0.0, starts, {1, 2, 4, 8, 16, 32}, 4000, 5, 2);
    for (const auto& p : rep.points) {
      const double expect = std::pow(rate, static_cast<double>(p.n)) *
                            std::fabs(std::cos(2.0 * static_cast<double>(p.n)));
      CHECK(std::fabs(p.sup_disc - expect) <= 4.0 * p.max_se + 1e-3);
    }
  }

  TEST_CASE("FIN2 discrepancy at n=200 is below its n=10 value") {
    const MatrixLaw law = preset_by_name("FIN2").law;
    const auto stat = stationary_measure(law, 1024, 32768, 5);
    const auto phi = [](const Eigen::VectorXd& v) {
      return v(0) * v(0) - v(1) * v(1);
    };
    const double nu_phi = stat.measure.expect(phi).value;
    std::vector<ProjPoint> starts;
    for (int i = 0; i < 8; ++i) {
      Eigen::VectorXd v(2);
      v << std::cos(std::numbers::pi * i / 8.0),
          std::sin(std::numbers::pi * i / 8.0);
      starts.emplace_back(v);
    }
    const auto rep = equidistribution_check(law, phi, nu_phi, starts,
                                            {10, 50, 200}, 2000, 6, 2);
    CHECK(rep.points.back().sup_disc <
          rep.points.front().sup_disc + 3.0 * rep.points.back().max_se);
  }

  TEST_CASE("contraction: isometric control stays at one") {
    const auto rep = contraction_rate(preset_by_name("ROT1").law, 0.25, 32,
                                      16, 32, 3, 2);
    CHECK(std::fabs(rep.r_hat - 1.0) <= 1e-3);
    CHECK(rep.window_stable);
  }

  TEST_CASE("contraction: diagonal matrix contracts at the derivative rate") {
    // tan(theta') = (b/a) tan(theta): angle ratios shrink by 1/4 per step
    const double eps = 0.25;
    const auto rep = contraction_rate(preset_by_name("DIAG1").law, eps, 64,
                                      32, 8, 3, 2);
    const double expect = std::pow(0.25, eps);
    CHECK(std::fabs(rep.r_hat / expect - 1.0) < 0.10);
  }

  TEST_CASE("contraction: FIN2 contracts below one") {
    const auto rep = contraction_rate(preset_by_name("FIN2").law,
                                      2.0 / 8.0, 64, 32, 128, 3, 4);
    CHECK(rep.r_hat < 0.995);
    CHECK(rep.r_hat > 0.5);
    CHECK(rep.window_stable);
  }

  TEST_CASE("sigma2 growth route on the lattice walk") {
    const ValueSE s2 =
        sigma2_growth(preset_by_name("SRW1").law, 6, 12, 4096, 11, 4);
    CHECK(s2.value == doctest::Approx(1.0).epsilon(0.05));
  }

  TEST_CASE("sigma2 covariance route: lattice increments are uncorrelated") {
    const MatrixLaw law = preset_by_name("SRW1").law;
    const auto stat = stationary_measure(law, 16, 1024, 3);
    const auto cov =
        sigma2_cov_series(law, stat.measure, 40000, 32, 11, 4);
    CHECK(cov.sigma2.value == doctest::Approx(1.0).epsilon(0.05));
    CHECK(cov.lag_cov[0] == doctest::Approx(1.0).epsilon(0.05));
    CHECK(cov.truncation_found);
    for (std::size_t j = 1; j <= 4; ++j)
      CHECK(std::fabs(cov.lag_cov[j]) < 0.05);
  }

  TEST_CASE("the two sigma2 routes agree on a mixing 2-d law") {
    MatrixLaw law = preset_by_name("DIAGROT2").law;
    const ValueSE lam = lyapunov_estimate(law, 4096, 256, 256, 17, 4);
    law = law.recentered(lam.value);
    const auto stat = stationary_measure(law, 1024, 32768, 17);
    const auto rep = sigma2_estimate(law, stat.measure, 6, 12, 4096, 40000,
                                     48, 17, 4);
    CHECK(rep.agree_3se);
    CHECK(rep.growth.value > 0.0);
    CHECK(rep.cov.sigma2.value > 0.0);
  }

  TEST_CASE("lifted expectation of the constant is exactly one") {
    const MatrixLaw law = preset_by_name("FIN2").law;
    const auto stat = stationary_measure(law, 128, 1024, 7);
    const ValueSE v = nu_tilde_expect(
        law, [](const GroupElement&, const ProjPoint&) { return 1.0; },
        stat.measure, 5000, 7);
    CHECK(v.value == 1.0);
    CHECK(v.se == 0.0);
  }

  TEST_CASE("lifted expectation of the cocycle vanishes after recentering") {
    MatrixLaw law = preset_by_name("FIN2").law;
    const ValueSE lam = lyapunov_estimate(law, 8192, 256, 512, 23, 4);
    law = law.recentered(lam.value);
    const auto stat = stationary_measure(law, 2048, 65536, 23);
    const ValueSE v = nu_tilde_expect(
        law,
        [](const GroupElement& g, const ProjPoint& u) { return cocycle(g, u); },
        stat.measure, 65536, 23);
    CHECK(std::fabs(v.value) <= 3.0 * v.se);
  }

  TEST_CASE("lifted invariance residual is noise-level") {
    MatrixLaw law = preset_by_name("FIN2").law;
    const ValueSE lam = lyapunov_estimate(law, 4096, 128, 256, 29, 4);
    law = law.recentered(lam.value);
    const auto stat = stationary_measure(law, 2048, 65536, 29);
    const ValueSE r = nu_tilde_invariance_residual(
        law,
        [](const GroupElement& g, const ProjPoint& u) { return cocycle(g, u); },
        stat.measure, 65536, 29);
    CHECK(r.value <= 3.0 * r.se + 1e-3);
  }

  TEST_CASE("recentering is a fixed point of the exponent estimate") {
    MatrixLaw law = preset_by_name("DIAGROT2").law;
    const ValueSE lam1 = lyapunov_estimate(law, 8192, 256, 256, 31, 4);
    law = law.recentered(lam1.value);
    const ValueSE lam2 = lyapunov_estimate(law, 8192, 256, 256, 37, 4);
    CHECK(std::fabs(lam2.value) <= 3.0 * (lam1.se + lam2.se));
  }
}
