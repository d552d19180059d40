// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "matwalk/geometry.hpp"
#include "matwalk/law.hpp"

using namespace matwalk;

namespace {

Eigen::MatrixXd rot2(double th) {
  Eigen::MatrixXd r(2, 2);
  r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  return r;
}

Eigen::MatrixXd diag2(double a, double b) {
  Eigen::MatrixXd d(2, 2);
  d << a, 0, 0, b;
  return d;
}

ProjPoint random_dir(int d, RngStream& rng) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.next_normal();
  return ProjPoint(v);
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("conditioning number from singular values") {
    CHECK(n_of(GroupElement(Eigen::MatrixXd::Identity(3, 3))) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(n_of(GroupElement(diag2(2.0, 0.5))) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(n_of(GroupElement(rot2(0.83))) == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("near-singular matrices are rejected") {
    CHECK_THROWS_AS(GroupElement(diag2(1.0, 1e-13)), SingularMatrixError);
    CHECK_THROWS_AS(GroupElement(Eigen::MatrixXd::Zero(2, 2)),
                    SingularMatrixError);
  }

  TEST_CASE("basic conditioning inequalities on random draws") {
    RngStream rng = RngStream::from_seed(11).child(0);
    const MatrixLaw law = preset_by_name("DIAGROT2").law;
    for (int i = 0; i < 2000; ++i) {
      const GroupElement g = law.sample(rng);
      CHECK(g.n_value() >= 1.0 - 1e-12);
      CHECK(g.op_norm() * g.inv_norm() >= 1.0 - 1e-12);
      CHECK(g.inverse().n_value() ==
            doctest::Approx(g.n_value()).epsilon(1e-9));
    }
  }

  TEST_CASE("angular distance on axis pairs") {
    const ProjPoint e1 = ProjPoint::axis(2, 0), e2 = ProjPoint::axis(2, 1);
    CHECK(angular_dist(e1, e1) == 0.0);
    CHECK(angular_dist(e1, e2) == doctest::Approx(1.0).epsilon(1e-15));
    Eigen::VectorXd diagv(2);
    diagv << 1.0, 1.0;
    CHECK(angular_dist(e1, ProjPoint(diagv)) ==
          doctest::Approx(0.70710678118654752).epsilon(1e-12));
  }

  TEST_CASE("angular distance is representative-independent and symmetric") {
    RngStream rng = RngStream::from_seed(21).child(0);
    for (int d : {2, 3, 5}) {
      for (int i = 0; i < 500; ++i) {
        Eigen::VectorXd u(d), v(d);
        for (int k = 0; k < d; ++k) {
          u(k) = rng.next_normal();
          v(k) = rng.next_normal();
        }
        const double duv = angular_dist(u, v);
        CHECK(duv == doctest::Approx(angular_dist(v, u)).epsilon(1e-12));
        CHECK(angular_dist(Eigen::VectorXd(-2.5 * u), v) ==
              doctest::Approx(duv).epsilon(1e-9));
        CHECK(duv >= 0.0);
        CHECK(duv <= 1.0 + 1e-12);
      }
    }
  }

  TEST_CASE("triangle inequality on random direction triples") {
    RngStream rng = RngStream::from_seed(31).child(0);
    for (int i = 0; i < 5000; ++i) {
      const ProjPoint a = random_dir(3, rng), b = random_dir(3, rng),
                      c = random_dir(3, rng);
      CHECK(angular_dist(a, c) <=
            angular_dist(a, b) + angular_dist(b, c) + 1e-12);
    }
  }

  TEST_CASE("projective action: scaling example and identity") {
    const GroupElement id = GroupElement::identity(2);
    RngStream rng = RngStream::from_seed(3).child(0);
    const ProjPoint v = random_dir(2, rng);
    CHECK(angular_dist(act(id, v), v) == 0.0);

    Eigen::VectorXd w(2);
    w << 1.0, 1.0;
    const ProjPoint img = act(GroupElement(diag2(2.0, 0.5)), ProjPoint(w));
    Eigen::VectorXd expect(2);
    expect << 4.0, 1.0;
    CHECK(angular_dist(img, ProjPoint(expect)) < 1e-14);
  }

  TEST_CASE("group action law under composition") {
    RngStream rng = RngStream::from_seed(41).child(0);
    const MatrixLaw law = preset_by_name("DIAGROT2").law;
    for (int i = 0; i < 1000; ++i) {
      const GroupElement g1 = law.sample(rng), g2 = law.sample(rng);
      const ProjPoint v = random_dir(2, rng);
      const GroupElement prod{Eigen::MatrixXd(g2.matrix() * g1.matrix())};
      CHECK(angular_dist(act(g2, act(g1, v)), act(prod, v)) < 1e-11);
    }
  }

  TEST_CASE("cocycle values and bounds") {
    const ProjPoint e1 = ProjPoint::axis(2, 0);
    CHECK(cocycle(GroupElement::identity(2), e1) == 0.0);
    CHECK(cocycle(GroupElement(diag2(2.0, 0.5)), e1) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));

    RngStream rng = RngStream::from_seed(51).child(0);
    const MatrixLaw law = preset_by_name("FIN2").law;
    for (int i = 0; i < 2000; ++i) {
      const GroupElement g = law.sample(rng);
      const ProjPoint v = random_dir(2, rng);
      const double r = cocycle(g, v);
      CHECK(r <= std::log(g.op_norm()) + 1e-12);
      CHECK(r >= -std::log(g.inv_norm()) - 1e-12);
    }
  }

  TEST_CASE("cocycle composition identity on random triples") {
    RngStream rng = RngStream::from_seed(61).child(0);
    const MatrixLaw law = preset_by_name("DIAGROT2").law;
    for (int i = 0; i < 2000; ++i) {
      const GroupElement g1 = law.sample(rng), g2 = law.sample(rng);
      const ProjPoint v = random_dir(2, rng);
      const GroupElement prod{Eigen::MatrixXd(g2.matrix() * g1.matrix())};
      const double lhs = cocycle(prod, v);
      const double rhs = cocycle(g2, act(g1, v)) + cocycle(g1, v);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
  }

  TEST_CASE("scalar equivariance of the cocycle") {
    RngStream rng = RngStream::from_seed(71).child(0);
    const MatrixLaw law = preset_by_name("FIN2").law;
    for (int i = 0; i < 500; ++i) {
      const GroupElement g = law.sample(rng);
      const ProjPoint v = random_dir(2, rng);
      for (double c : {2.0, -0.5, 0.1}) {
        CHECK(cocycle(g.scaled_by(c), v) ==
              doctest::Approx(std::log(std::fabs(c)) + cocycle(g, v))
                  .epsilon(1e-12));
      }
    }
  }

  TEST_CASE("pointwise Lipschitz bounds: special cases") {
    const ProjPoint e1 = ProjPoint::axis(2, 0), e2 = ProjPoint::axis(2, 1);
    const GroupElement id = GroupElement::identity(2);
    CHECK(check_pointwise_lipschitz(id, id, e1, e2).all());

    const GroupElement g(diag2(2.0, 0.5));
    const auto rep = check_pointwise_lipschitz(g, id, e1, e2);
    CHECK(rep.all());
    //  |rho(g,e1) - rho(g,e2)| = log 4 <= sqrt(2) * 4 * 1
    CHECK(std::fabs(cocycle(g, e1) - cocycle(g, e2)) ==
          doctest::Approx(std::log(4.0)));
  }

  TEST_CASE("pointwise Lipschitz bounds hold on a randomized sweep") {
    RngStream rng = RngStream::from_seed(81).child(0);
    for (const char* preset : {"FIN2", "DIAGROT2"}) {
      const MatrixLaw law = preset_by_name(preset).law;
      for (int i = 0; i < 10000; ++i) {
        const GroupElement g = law.sample(rng), g2 = law.sample(rng);
        const ProjPoint u = random_dir(2, rng);
        // mix far and nearly coincident pairs
        ProjPoint v = random_dir(2, rng);
        if (i % 3 == 0) {
          Eigen::VectorXd w(2);
          w << -u.rep()(1), u.rep()(0);
          v = ProjPoint(u.rep() + 1e-3 * w);
        }
        const auto rep = check_pointwise_lipschitz(g, g2, u, v);
        CHECK(rep.all());
      }
    }
  }

  TEST_CASE("canonical representative sign rule") {
    Eigen::VectorXd v(3);
    v << -0.3, 0.4, -0.5;
    const ProjPoint p(v), q(Eigen::VectorXd(-v));
    CHECK((p.rep() - q.rep()).norm() == 0.0);
    CHECK(p.rep()(0) > 0.0);
    CHECK(p.rep().norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}
