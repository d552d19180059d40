// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "matwalk/conditioned.hpp"
#include "matwalk/ergodic.hpp"
#include "srw_oracle.hpp"

using namespace matwalk;

namespace {

ChainStart trivial_start(int d) {
  return {GroupElement::identity(d), ProjPoint::axis(d, 0)};
}

}  // namespace

TEST_SUITE("conditioned") {
  TEST_CASE("oracle sanity: hand-enumerated small cases") {
    // tau_0 > 2 exactly when the first two steps are (+1, +1)
    CHECK(srw_oracle::survival(0.0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(srw_oracle::survival(0.0, 2) == doctest::Approx(0.25).epsilon(1e-15));
    // from y = 1 the alive mass follows the ballot numbers
    CHECK(srw_oracle::survival(1.0, 2) == doctest::Approx(0.5).epsilon(1e-15));
    // martingale: E[y + S_n ; alive] = y for integer y >= 1
    for (std::size_t n : {1ul, 2ul, 17ul, 128ul})
      CHECK(srw_oracle::evolve(5.0, n).conditional_sum() ==
            doctest::Approx(5.0).epsilon(1e-12));
  }

  TEST_CASE("zero-increment laws never exit") {
    const MatrixLaw law = MatrixLaw::finite_support(
        {{Eigen::MatrixXd::Identity(2, 2), 1.0}}, 1.0);
    RngStream rng = RngStream::from_seed(1).child(0);
    const ExitSample s = exit_time_sample(law, trivial_start(2), 2.0, 500, rng);
    CHECK(s.censored);
    CHECK(s.tau == 500);
    CHECK(s.endpoint == 2.0);
  }

  TEST_CASE("bounded increments below the barrier exit immediately") {
    const MatrixLaw law = preset_by_name("SRW1").law;
    RngStream rng = RngStream::from_seed(2).child(0);
    for (int i = 0; i < 200; ++i) {
      const ExitSample s = exit_time_sample(law, trivial_start(1), -1.0, 50, rng);
      CHECK(!s.censored);
      CHECK(s.tau == 1);
      CHECK(s.endpoint <= 0.0);
    }
  }

  TEST_CASE("lattice survival matches the enumeration oracle") {
    const MatrixLaw law = preset_by_name("SRW1").law;
    for (double y : {0.0, 3.0}) {
      const auto es = survival_prob(law, trivial_start(1), y, {2, 8, 64},
                                    100000, 11, 4);
      for (const auto& pt : es.points) {
        const double exact = srw_oracle::survival(y, pt.n);
        CAPTURE(y);
        CAPTURE(pt.n);
        CHECK(pt.ci.contains(exact));
      }
    }
  }

  TEST_CASE("survival decays like the square root at desk scale") {
    const MatrixLaw law = preset_by_name("SRW1").law;
    const auto es = survival_prob(law, trivial_start(1), 2.0,
                                  {64, 128, 256, 512, 1024}, 40000, 13, 4);
    REQUIRE(es.slope_valid);
    CHECK(es.loglog_slope == doctest::Approx(-0.5).epsilon(0.2));
  }

  TEST_CASE("survival is monotone in n and, with coupled seeds, in y") {
    const MatrixLaw law = preset_by_name("SRW1").law;
    const auto lo = survival_prob(law, trivial_start(1), 2.0,
                                  {4, 16, 64, 256}, 20000, 17, 4);
    const auto hi = survival_prob(law, trivial_start(1), 4.0,
                                  {4, 16, 64, 256}, 20000, 17, 4);
    for (std::size_t m = 0; m < lo.points.size(); ++m) {
      if (m > 0) CHECK(lo.points[m].p_hat <= lo.points[m - 1].p_hat);
      CHECK(lo.points[m].survivors <= hi.points[m].survivors);
    }
  }

  TEST_CASE("harmonic estimate reproduces the exact killed-walk values") {
    const MatrixLaw law = preset_by_name("SRW1").law;
    for (double y : {1.0, 5.0}) {
      const auto he = harmonic_estimate(law, trivial_start(1), y,
                                        {16, 64, 256, 1024}, 100000, 19, 1.0, 4);
      CAPTURE(y);
      CHECK(std::fabs(he.v_hat - y) <= 3.0 * he.se);
      CHECK(he.plateau_ok);
      CHECK(he.sandwich_ok);
      // one-step harmonicity: consecutive estimates agree within noise
      for (std::size_t m = 1; m < he.points.size(); ++m) {
        const double joint = std::sqrt(he.points[m].se * he.points[m].se +
                                       he.points[m - 1].se * he.points[m - 1].se);
        CHECK(std::fabs(he.points[m].v_n - he.points[m - 1].v_n) <=
              3.0 * joint + 1e-12);
      }
    }
  }

  TEST_CASE("a hopeless start has zero harmonic value and zero survival") {
    const MatrixLaw law = preset_by_name("SRW1").law;
    const auto he = harmonic_estimate(law, trivial_start(1), -5.0,
                                      {1, 2, 4, 8}, 5000, 23, 1.0, 2);
    CHECK(he.v_hat == 0.0);
    CHECK(he.se == 0.0);
    const auto es = survival_prob(law, trivial_start(1), -5.0, {1, 2, 4, 8},
                                  5000, 23, 2);
    for (const auto& pt : es.points) CHECK(pt.survivors == 0);
  }

  TEST_CASE("square-root asymptotics against the enumeration oracle") {
    const MatrixLaw law = preset_by_name("SRW1").law;
    const double y = 3.0;
    const std::size_t n = 1024;
    const auto he = harmonic_estimate(law, trivial_start(1), y,
                                      {64, 256, 1024}, 60000, 29, 1.0, 4);
    const auto ar = asymptotics_check(law, trivial_start(1), y,
                                      {64, 256, 1024}, 60000, he.v_hat, 1.0,
                                      31, 4);
    REQUIRE(ar.enough_survivors);
    CHECK(ar.n_survivors >= 1000);
    const double exact_ratio =
        srw_oracle::survival(y, n) *
        std::sqrt(2.0 * std::numbers::pi * static_cast<double>(n)) / (2.0 * y);
    CHECK(ar.ratio.back() == doctest::Approx(exact_ratio).epsilon(0.05));
    CHECK(ar.ks_distance <= 0.08);
  }

  TEST_CASE("drifting walks do not obey the square-root law") {
    const MatrixLaw law = MatrixLaw::gl1(ScalarLaw::normal(0.5, 1.0), 1.0);
    const auto es = survival_prob(law, trivial_start(1), 2.0,
                                  {64, 128, 256, 512, 1024}, 20000, 37, 4);
    REQUIRE(es.slope_valid);
    CHECK(es.loglog_slope > -0.1);
    CHECK(es.points.back().p_hat > 0.3);
  }

  TEST_CASE("reachability probe with certain hits") {
    const MatrixLaw law = preset_by_name("SRW1").law;
    const auto pr = support_probe(law, trivial_start(1), 5.0, 1.0, 8, 2000,
                                  41, 2);
    CHECK(pr.verdict == ProbeVerdict::Member);
    CHECK(pr.first_n0 == 1);  // 5 + S_1 >= 4 > 1 always

    const auto none = support_probe(law, trivial_start(1), -2.0, 1.0, 16,
                                    2000, 41, 2);
    CHECK(none.verdict == ProbeVerdict::NoEvidence);
    CHECK(none.hits == 0);
  }

  TEST_CASE("probe verdicts agree with harmonic positivity on a 2-d law") {
    MatrixLaw law = preset_by_name("DIAGROT2").law;
    const ValueSE lam = lyapunov_estimate(law, 4096, 128, 256, 43, 4);
    law = law.recentered(lam.value);
    const ValueSE s2 = sigma2_growth(law, 5, 10, 2048, 43, 4);
    const double sw = std::sqrt(s2.value);

    const double y = 2.0 * sw;
    const auto pr = support_probe(law, trivial_start(2), y, sw, 32, 4096, 47, 4);
    CHECK(pr.verdict == ProbeVerdict::Member);
    const auto he = harmonic_estimate(law, trivial_start(2), y,
                                      {16, 64, 256, 1024}, 30000, 47, 1.5, 4);
    CHECK(he.v_hat > 3.0 * he.se);

    // reachability is monotone in the threshold
    const auto pr_hi = support_probe(law, trivial_start(2), y, 2.0 * sw, 32,
                                     4096, 53, 4);
    if (pr_hi.verdict == ProbeVerdict::Member)
      CHECK(pr.verdict == ProbeVerdict::Member);
  }

  TEST_CASE("immediate extinction reads as exponential decay") {
    const MatrixLaw law = preset_by_name("SRW1").law;
    const auto rep = exp_decay_check(law, trivial_start(1), -1.0,
                                     {1, 2, 4, 8, 16}, 4000, 59, 2);
    CHECK(rep.all_zero_tail);
    CHECK(rep.consistent);
  }

  TEST_CASE("subcritical drift decays exponentially with a clean slope") {
    // p_up = 1/4: rate log(2 sqrt(p(1-p))) = log(sqrt(3)/2)
    const MatrixLaw law =
        MatrixLaw::gl1(ScalarLaw::two_point(1.0, -1.0, 0.25), 1.0);
    const std::vector<std::size_t> grid{2, 4, 6, 8, 10, 12, 14};
    const auto rep = exp_decay_check(law, trivial_start(1), 0.5, grid, 400000,
                                     61, 4);
    REQUIRE(rep.slope_valid);
    CHECK(rep.consistent);
    CHECK(rep.r2 > 0.9);
    for (const auto& pt : rep.points) {
      const double exact = srw_oracle::survival(0.5, pt.n, 0.25);
      CAPTURE(pt.n);
      CHECK(pt.ci.contains(exact));
    }
    CHECK(rep.slope ==
          doctest::Approx(std::log(std::sqrt(3.0) / 2.0)).epsilon(0.15));
  }
}
