// SPDX-License-Identifier: Apache-2.0
//
// Exact enumeration oracle for the +-1 lattice walk with kill at levels
// <= 0: survival probabilities and conditional first-moment sums by dynamic
// programming over the alive-level distribution. Test-only; independent of
// the simulation path under test.
#pragma once

#include <cstddef>
#include <vector>

namespace srw_oracle {

struct AliveDistribution {
  // mass[i] is the probability of being alive at level y + (i - n) after n
  // steps; kept dense over the reachable window
  std::vector<double> mass;
  std::size_t n = 0;
  double y = 0.0;

  [[nodiscard]] double survival() const {
    double s = 0.0;
    for (double m : mass) s += m;
    return s;
  }
  [[nodiscard]] double conditional_sum() const {  // E[y + S_n ; alive]
    double s = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i)
      s += mass[i] * (y + static_cast<double>(i) - static_cast<double>(n));
    return s;
  }
};

// p_up = probability of a +1 step; kill when y + S <= 0 (checked after
// every step).
inline AliveDistribution evolve(double y, std::size_t n, double p_up = 0.5) {
  AliveDistribution d;
  d.n = n;
  d.y = y;
  d.mass.assign(2 * n + 1, 0.0);
  std::vector<double> cur(2 * n + 1, 0.0), next(2 * n + 1, 0.0);
  cur[n] = 1.0;  // S = 0 at offset n
  for (std::size_t step = 1; step <= n; ++step) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (cur[i] == 0.0) continue;
      if (i > 0) next[i - 1] += (1.0 - p_up) * cur[i];
      if (i + 1 < next.size()) next[i + 1] += p_up * cur[i];
    }
    for (std::size_t i = 0; i < next.size(); ++i) {
      const double level = y + static_cast<double>(i) - static_cast<double>(n);
      if (level <= 0.0) next[i] = 0.0;
    }
    cur.swap(next);
  }
  d.mass = cur;
  return d;
}

inline double survival(double y, std::size_t n, double p_up = 0.5) {
  return evolve(y, n, p_up).survival();
}

}  // namespace srw_oracle
