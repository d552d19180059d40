// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include "matwalk/rng.hpp"
#include "matwalk/stats.hpp"

using namespace matwalk;

TEST_SUITE("rng") {
  TEST_CASE("identical seed and path give identical sequences") {
    RngStream a = RngStream::from_seed(123).child(7, 9);
    RngStream b = RngStream::from_seed(123).child(7, 9);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  }

  TEST_CASE("distinct child ids decorrelate streams") {
    RngStream a = RngStream::from_seed(123).child(1);
    RngStream b = RngStream::from_seed(123).child(2);
    int agree = 0;
    for (int i = 0; i < 1000; ++i)
      if ((a.next_u64() & 1) == (b.next_u64() & 1)) ++agree;
    CHECK(agree > 400);
    CHECK(agree < 600);
  }

  TEST_CASE("uniform doubles look uniform") {
    RngStream r = RngStream::from_seed(2024).child(0);
    std::vector<double> xs(100000);
    stats::Accumulator acc;
    for (auto& x : xs) {
      x = r.next_double();
      CHECK(x >= 0.0);
      CHECK(x < 1.0);
      acc.add(x);
    }
    CHECK(std::fabs(acc.mean - 0.5) < 0.005);
    const double d = stats::ks_statistic(
        xs, [](double t) { return t < 0 ? 0.0 : t > 1 ? 1.0 : t; });
    CHECK(d < 0.01);
  }

  TEST_CASE("normal draws have unit variance") {
    RngStream r = RngStream::from_seed(99).child(0);
    stats::Accumulator acc;
    for (int i = 0; i < 200000; ++i) acc.add(r.next_normal());
    CHECK(std::fabs(acc.mean) < 0.01);
    CHECK(std::fabs(acc.variance() - 1.0) < 0.02);
  }

  TEST_CASE("streams carry their own state through copies") {
    RngStream a = RngStream::from_seed(5).child(3);
    (void)a.next_u64();
    RngStream b = a;
    CHECK(a.next_u64() == b.next_u64());
  }
}
