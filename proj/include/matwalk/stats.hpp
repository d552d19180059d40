// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace matwalk::stats {

// Welford accumulator with Chan's merge; merging partials in a fixed block
// order keeps multi-threaded reductions bit-identical to serial ones.
struct Accumulator {
  std::size_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }

  void merge(const Accumulator& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
    const double d = o.mean - mean;
    const double nt = na + nb;
    mean += d * nb / nt;
    m2 += o.m2 + d * d * na * nb / nt;
    n += o.n;
  }

  [[nodiscard]] double variance() const {
    return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  }
  [[nodiscard]] double sd() const;
  [[nodiscard]] double se() const;  // sd / sqrt(n)
};

struct Interval {
  double lo = 0.0, hi = 0.0;
  [[nodiscard]] bool contains(double x) const { return lo <= x && x <= hi; }
  [[nodiscard]] double width() const { return hi - lo; }
};

// Wilson score interval for a binomial proportion.
Interval wilson_ci(std::size_t successes, std::size_t trials, double z = 1.96);

double norm_cdf(double x);
double rayleigh_cdf(double t);  // 1 - exp(-t^2/2), t >= 0

// One-sample Kolmogorov-Smirnov distance against a CDF. Samples are copied
// and sorted internally.
double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf);
// Asymptotic KS tail probability (two-sided).
double ks_pvalue(double d, std::size_t n);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_se = 0.0;
  std::size_t n = 0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Regularized incomplete gamma Q(a,x) = Gamma(a,x)/Gamma(a).
double gamma_q(double a, double x);
// Chi-square survival function with k degrees of freedom.
double chi2_sf(double x2, int k);
// Pearson chi-square homogeneity test across rows of a count table;
// returns the p-value.
double chi2_homogeneity_pvalue(const std::vector<std::vector<std::size_t>>& table);

}  // namespace matwalk::stats
