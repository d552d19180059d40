// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "matwalk/holder.hpp"
#include "matwalk/stats.hpp"

using namespace matwalk;

namespace {

// trapezoid oracle for E f(xi), xi standard normal
double normal_quad(const std::function<double(double)>& f, double hi = 12.0) {
  const int n = 60000;
  const double h = 2.0 * hi / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = -hi + i * h;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    sum += w * f(x) * std::exp(-0.5 * x * x);
  }
  return sum * h / std::sqrt(2.0 * std::numbers::pi);
}

Eigen::MatrixXd diag2(double a, double b) {
  Eigen::MatrixXd d(2, 2);
  d << a, 0, 0, b;
  return d;
}

}  // namespace

TEST_SUITE("holder") {
  TEST_CASE("exponent ladder for delta0 = 1") {
    const HolderParams p = derive_params(1.0);
    CHECK(p.eps == 0.125);
    CHECK(p.theta == 0.375);
    CHECK(p.alpha == 0.625);
    CHECK(p.beta == 0.875);
    CHECK(!p.capped);
  }

  TEST_CASE("delta0 is capped at 8/3") {
    const HolderParams p = derive_params(4.0);
    CHECK(p.delta0 == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
    CHECK(p.eps == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(p.capped);
  }

  TEST_CASE("a contraction exponent estimate caps the ladder further") {
    const HolderParams p = derive_params(2.0, 0.125);
    CHECK(p.eps == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(p.delta0 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.capped);
  }

  TEST_CASE("nonpositive delta0 is rejected") {
    CHECK_THROWS_AS(derive_params(0.0), std::invalid_argument);
    CHECK_THROWS_AS(derive_params(-1.0), std::invalid_argument);
  }

  TEST_CASE("ladder identities hold to machine precision") {
    for (double d0 : {0.3, 1.0, 1.7, 2.0, 8.0 / 3.0}) {
      const HolderParams p = derive_params(d0);
      const double tol = 1e-15;
      CHECK(std::fabs(p.theta - 3.0 * p.eps) <= tol);
      CHECK(std::fabs(p.alpha - (p.theta + 2.0 * p.eps)) <= tol);
      CHECK(std::fabs(p.beta - (p.eps + 2.0 * p.theta)) <= tol);
      CHECK(std::fabs(p.beta - 7.0 * p.eps) <= tol);
    }
  }

  TEST_CASE("conditioning weight values") {
    const HolderParams p = derive_params(1.0);
    CHECK(weight(GroupElement::identity(2), p) ==
          doctest::Approx(std::pow(2.0, p.theta)).epsilon(1e-14));
    CHECK(weight(GroupElement(diag2(2.0, 0.5)), p) ==
          doctest::Approx(std::pow(4.0, p.theta)).epsilon(1e-14));

    RngStream rng = RngStream::from_seed(10).child(0);
    const MatrixLaw law = preset_by_name("DIAGROT2").law;
    for (int i = 0; i < 2000; ++i)
      CHECK(weight(law.sample(rng), p) >= std::pow(2.0, p.theta) - 1e-12);
  }

  TEST_CASE("truncated weight: ramp and saturation") {
    const HolderParams p = derive_params(1.0);
    const GroupElement g(diag2(3.0, 1.0 / 3.0));
    const double w = weight(g, p);

    CHECK(weight_trunc(g, 1.0, p) == w);           // cutoff saturated
    CHECK(weight_trunc(g, w + 1.0, p) == 0.0);     // at the lower knee
    CHECK(weight_trunc(g, w + 0.5, p) ==
          doctest::Approx(0.5 * w).epsilon(1e-12));  // mid-ramp
    CHECK(weight_trunc(g, 1.2, p) == w);           // cutoff below the weight
    CHECK_THROWS_AS(weight_trunc(g, 0.5, p), std::invalid_argument);
  }

  TEST_CASE("truncated weight sandwich and monotonicity in l") {
    const HolderParams p = derive_params(2.0);
    RngStream rng = RngStream::from_seed(12).child(0);
    const MatrixLaw law = preset_by_name("DIAGROT2").law;
    for (int i = 0; i < 2000; ++i) {
      const GroupElement g = law.sample(rng);
      const double w = weight(g, p);
      double prev = w;
      for (double l : {1.0, 2.0, 4.0, 8.0}) {
        const double wl = weight_trunc(g, l, p);
        CHECK(wl <= prev + 1e-12);  // nonincreasing in l
        CHECK(wl <= w + 1e-12);
        CHECK((w > l ? w : 0.0) <= wl + 1e-12);        // lower sandwich
        CHECK(wl <= (w > l - 1.0 ? w : 0.0) + 1e-12);  // upper sandwich
        prev = wl;
      }
    }
  }

  TEST_CASE("sampled seminorms of the constant are (1, 0, 0)") {
    const MatrixLaw law = preset_by_name("FIN2").law;
    const HolderParams p = derive_params(law.delta0());
    const SamplePlan plan = make_sample_plan(law, 256, 512, 5);
    const SeminormReport rep = seminorms(tf_one(), p, plan);
    CHECK(rep.abs_theta == 1.0);
    CHECK(rep.k_eps_alpha == 0.0);
    CHECK(rep.k_eps_beta_prime == 0.0);
    CHECK(rep.norm_b == 1.0);
  }

  TEST_CASE("sampled weight norm stays below its closed-form bound") {
    for (const char* preset : {"FIN2", "DIAGROT2", "LOGN1"}) {
      const MatrixLaw law = preset_by_name(preset).law;
      const HolderParams p = derive_params(law.delta0());
      const SamplePlan plan = make_sample_plan(law, 512, 1024, 5);
      const SeminormReport rep = seminorms(tf_weight(p), p, plan);
      CHECK(rep.k_eps_alpha == 0.0);  // weight ignores the direction
      CHECK(rep.norm_b <= std::pow(2.0, p.theta + 2.0) * (1.0 + 1e-12));
      for (double l : {2.0, 4.0, 8.0, 16.0}) {
        const SeminormReport rl = seminorms(tf_weight_trunc(p, l), p, plan);
        CHECK(rl.norm_b <= std::pow(2.0, 2.0 * p.theta + 3.0) * (1.0 + 1e-12));
      }
    }
  }

  TEST_CASE("sampled seminorms grow with the sample budget") {
    const MatrixLaw law = preset_by_name("FIN2").law;
    const HolderParams p = derive_params(law.delta0());
    const SamplePlan small = make_sample_plan(law, 64, 64, 5);
    SamplePlan big = small;
    const SamplePlan extra = make_sample_plan(law, 256, 256, 6);
    big.points.insert(big.points.end(), extra.points.begin(), extra.points.end());
    big.proj_pairs.insert(big.proj_pairs.end(), extra.proj_pairs.begin(),
                          extra.proj_pairs.end());
    big.mat_pairs.insert(big.mat_pairs.end(), extra.mat_pairs.begin(),
                         extra.mat_pairs.end());
    const TestFunction w = tf_weight(p);
    const SeminormReport s = seminorms(w, p, small), b = seminorms(w, p, big);
    CHECK(b.abs_theta >= s.abs_theta);
    CHECK(b.k_eps_beta_prime >= s.k_eps_beta_prime);
    CHECK(b.norm_b >= s.norm_b);
  }

  TEST_CASE("phase twist: t = 0 reduces to the base seminorms") {
    const MatrixLaw law = preset_by_name("FIN2").law;
    const HolderParams p = derive_params(law.delta0());
    const SamplePlan plan = make_sample_plan(law, 128, 256, 5);
    for (const TestFunction& h : {tf_one(), tf_weight(p)}) {
      const auto rep = check_phase_perturbation(h, 0.0, p, plan);
      CHECK(rep.pass());
      CHECK(rep.worst_slack >= -1e-12);
    }
  }

  TEST_CASE("phase twist keeps the weighted sup seminorm") {
    const MatrixLaw law = preset_by_name("DIAGROT2").law;
    const HolderParams p = derive_params(law.delta0());
    const SamplePlan plan = make_sample_plan(law, 256, 512, 7);
    for (double t : {0.1, 0.5, 1.0}) {
      const auto rep = check_phase_perturbation(tf_weight(p), t, p, plan);
      CHECK(rep.theta_preserved);
      CHECK(rep.n_failures == 0);
    }
  }

  TEST_CASE("phase twist bounds hold for the truncated weight on many pairs") {
    const MatrixLaw law = preset_by_name("FIN2").law;
    const HolderParams p = derive_params(1.0);
    const SamplePlan plan = make_sample_plan(law, 512, 10000, 11);
    const auto rep = check_phase_perturbation(tf_weight_trunc(p, 4.0), 0.5, p, plan);
    CHECK(rep.n_checked >= 10000);
    CHECK(rep.n_failures == 0);
  }

  TEST_CASE("cocycle power is enveloped by the weight") {
    const HolderParams p = derive_params(1.0);
    const double bound = rho_power_weight_bound(1.0, p);
    CHECK(bound == doctest::Approx(std::pow(2.0 / (std::numbers::e * p.theta), 2.0))
                       .epsilon(1e-12));
    RngStream rng = RngStream::from_seed(14).child(0);
    const MatrixLaw law = preset_by_name("LOGN1").law;
    for (int i = 0; i < 10000; ++i) {
      const GroupElement g = law.sample(rng);
      const double r = std::fabs(cocycle(g, ProjPoint::axis(1, 0)));
      CHECK(r * r <= bound * weight(g, p) * (1.0 + 1e-12));
    }
  }

  TEST_CASE("lifted truncated weight matches the scalar quadrature oracle") {
    const MatrixLaw law = preset_by_name("LOGN1").law;  // delta0 = 8/3, theta = 1
    const HolderParams p = derive_params(law.delta0());
    CHECK(p.theta == doctest::Approx(1.0).epsilon(1e-15));

    // oracle: E[phi_l(2 cosh xi) 2 cosh xi] by quadrature
    auto oracle = [&](double l) {
      return normal_quad([&](double x) {
        const double w = 2.0 * std::cosh(x);
        if (w <= l - 1.0) return 0.0;
        return w >= l ? w : (w - (l - 1.0)) * w;
      });
    };
    const double v2 = oracle(2.0), v4 = oracle(4.0), v8 = oracle(8.0),
                 v16 = oracle(16.0);
    CHECK(v2 == doctest::Approx(2.0 * std::exp(0.5)).epsilon(1e-6));

    std::vector<double> lx, ly;
    for (auto [l, v] : {std::pair{2.0, v2}, {4.0, v4}, {8.0, v8}, {16.0, v16}}) {
      lx.push_back(std::log(l));
      ly.push_back(std::log(v));
    }
    CHECK(stats::fit_line(lx, ly).slope <= -1.3);

    const auto stat = stationary_measure(law, 16, 1024, 3);
    const auto rep = check_trunc_weight_decay(law, p, {2.0, 4.0, 8.0, 16.0},
                                              stat.measure, 400000, 15);
    REQUIRE(rep.points.size() == 4);
    CHECK(std::fabs(rep.points[0].value - v2) <= 4.0 * rep.points[0].se);
    CHECK(std::fabs(rep.points[1].value - v4) <= 4.0 * rep.points[1].se);
    CHECK(std::fabs(rep.points[2].value - v8) <= 4.0 * rep.points[2].se);
    CHECK(std::fabs(rep.points[3].value - v16) <= 4.0 * rep.points[3].se);
    CHECK(rep.slope_valid);
    CHECK(rep.slope <= -1.3);
    CHECK(rep.pass);
  }

  TEST_CASE("bounded-weight laws censor the tail of the l-grid") {
    const MatrixLaw law = preset_by_name("SRW1").law;  // weight ~ 1.53
    const HolderParams p = derive_params(law.delta0());
    const auto stat = stationary_measure(law, 16, 512, 3);
    const auto rep = check_trunc_weight_decay(law, p, {2.0, 4.0, 8.0, 16.0},
                                              stat.measure, 20000, 15);
    CHECK(rep.points.back().censored);
    CHECK(rep.points.back().value == 0.0);
    CHECK(rep.pass);
  }

  TEST_CASE("iterates of the plain operator fix the constant") {
    const MatrixLaw law = preset_by_name("FIN2").law;
    const TransferIterate it(law, 64, 16, 21);
    const auto vals = it.eval(tf_one(), 0.0, GroupElement::identity(2),
                              ProjPoint::axis(2, 0), {1, 2, 4, 8, 16});
    for (const auto& v : vals) {
      CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(v.imag() == 0.0);
    }
  }

  TEST_CASE("iterate seminorm control on a contracting law") {
    MatrixLaw law = preset_by_name("FIN2").law;
    const ValueSE lam = lyapunov_estimate(law, 4096, 128, 256, 23, 4);
    law = law.recentered(lam.value);
    const HolderParams p = derive_params(law.delta0());
    const auto cr = contraction_rate(law, p.eps, 48, 16, 64, 23, 4);
    const SamplePlan plan = make_sample_plan(law, 64, 64, 23, 16.0);
    for (double t : {0.0, 0.5}) {
      const auto rep = check_transfer_iterate_norms(
          tf_projective_mode(2), t, law, {1, 2, 4, 8, 16, 32}, p, cr.r_hat,
          plan, 128, 23);
      CAPTURE(t);
      CHECK((rep.envelope_ok || rep.inconclusive));
      CHECK((rep.df_ok || rep.inconclusive));
      // the direction-Hoelder component must decay toward the noise floor
      const double k1 = rep.points.front().k_eps_alpha;
      const double klast = rep.points.back().k_eps_alpha;
      CHECK(klast < 0.5 * k1 + rep.noise_floor + 1e-9);
    }
  }
}
