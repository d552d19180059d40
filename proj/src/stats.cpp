// SPDX-License-Identifier: Apache-2.0
#include "matwalk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace matwalk::stats {

double Accumulator::sd() const { return std::sqrt(variance()); }

double Accumulator::se() const {
  return n > 0 ? sd() / std::sqrt(static_cast<double>(n)) : 0.0;
}

Interval wilson_ci(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double rayleigh_cdf(double t) {
  return t <= 0.0 ? 0.0 : 1.0 - std::exp(-0.5 * t * t);
}

double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    const double lo = f - static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n - f;
    d = std::max(d, std::max(lo, hi));
  }
  return d;
}

double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  // the alternating series only converges usefully for lambda away from 0
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need >= 2 points");
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LinearFit f;
  f.n = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r2 = syy > 0 ? 1.0 - ss_res / syy : 1.0;
  if (x.size() > 2 && ss_res > 0)
    f.slope_se = std::sqrt(ss_res / (n - 2.0) / sxx);
  return f;
}

namespace {

// log Gamma via Lanczos
double lgamma_l(double x) { return std::lgamma(x); }

// lower regularized incomplete gamma by series, valid for x < a + 1
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - lgamma_l(a));
}

// upper regularized incomplete gamma by continued fraction, x >= a + 1
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - lgamma_l(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: bad args");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_sf(double x2, int k) {
  if (k <= 0) throw std::invalid_argument("chi2_sf: dof must be positive");
  return gamma_q(0.5 * k, 0.5 * x2);
}

double chi2_homogeneity_pvalue(
    const std::vector<std::vector<std::size_t>>& table) {
  const std::size_t rows = table.size();
  if (rows < 2) throw std::invalid_argument("chi2: need >= 2 rows");
  const std::size_t cols = table.front().size();
  std::vector<double> row_tot(rows, 0.0), col_tot(cols, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (table[r].size() != cols) throw std::invalid_argument("chi2: ragged table");
    for (std::size_t c = 0; c < cols; ++c) {
      row_tot[r] += static_cast<double>(table[r][c]);
      col_tot[c] += static_cast<double>(table[r][c]);
      total += static_cast<double>(table[r][c]);
    }
  }
  if (total == 0.0) return 1.0;
  double x2 = 0.0;
  int dof = 0;
  for (std::size_t c = 0; c < cols; ++c) {
    if (col_tot[c] == 0.0) continue;
    ++dof;
    for (std::size_t r = 0; r < rows; ++r) {
      const double expect = row_tot[r] * col_tot[c] / total;
      if (expect <= 0.0) continue;
      const double d = static_cast<double>(table[r][c]) - expect;
      x2 += d * d / expect;
    }
  }
  dof = (dof - 1) * (static_cast<int>(rows) - 1);
  if (dof <= 0) return 1.0;
  return chi2_sf(x2, dof);
}

}  // namespace matwalk::stats
