// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo estimators for the ergodic quantities of the walk: the top
// Lyapunov exponent, the stationary measure on projective space and its
// lift, the pairwise contraction rate, equidistribution discrepancies and
// the asymptotic variance of the walk (two independent routes).
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "matwalk/chain.hpp"

namespace matwalk {

struct ValueSE {
  double value = 0.0;
  double se = 0.0;
};

// (1/n) S_n averaged over replicas after a burn-in window.
ValueSE lyapunov_estimate(const MatrixLaw& law, std::size_t n_steps,
                          std::size_t n_paths, std::size_t burn_in,
                          std::uint64_t seed, int threads = 1);

// Occupation sample of the direction chain. Uniform weights.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  explicit EmpiricalMeasure(std::vector<Eigen::VectorXd> pts, std::size_t burn_in)
      : pts_(std::move(pts)), burn_in_(burn_in) {}

  [[nodiscard]] std::size_t size() const { return pts_.size(); }
  [[nodiscard]] std::size_t burn_in() const { return burn_in_; }
  [[nodiscard]] const std::vector<Eigen::VectorXd>& points() const { return pts_; }
  [[nodiscard]] const Eigen::VectorXd& draw(RngStream& rng) const {
    return pts_[rng.next_index(pts_.size())];
  }
  [[nodiscard]] ValueSE expect(
      const std::function<double(const Eigen::VectorXd&)>& phi) const;

 private:
  std::vector<Eigen::VectorXd> pts_;
  std::size_t burn_in_ = 0;
};

struct InvarianceResidual {
  std::string name;
  double residual = 0.0;  // | E phi(g.v) - E phi(v) |
  double se = 0.0;
  [[nodiscard]] bool within(double z) const { return residual <= z * se; }
};

struct StationaryResult {
  EmpiricalMeasure measure;
  std::vector<InvarianceResidual> invariance;
};

// Projective test functions (quadratic monomials of the unit representative;
// they are sign-invariant and separate directions for small d).
std::vector<std::pair<std::string, std::function<double(const Eigen::VectorXd&)>>>
projective_battery(int d);

StationaryResult stationary_measure(const MatrixLaw& law, std::size_t burn_in,
                                    std::size_t n_samples, std::uint64_t seed);

struct EquidistPoint {
  std::size_t n = 0;
  double sup_disc = 0.0;  // max over starts of |MC mean - nu(phi)|
  double max_se = 0.0;
};
struct EquidistReport {
  std::vector<EquidistPoint> points;
  double nu_phi = 0.0;
  bool decreasing = false;  // last point below first within 3 joint se
};
EquidistReport equidistribution_check(
    const MatrixLaw& law,
    const std::function<double(const Eigen::VectorXd&)>& phi, double nu_phi,
    const std::vector<ProjPoint>& starts, const std::vector<std::size_t>& n_grid,
    std::size_t n_reps, std::uint64_t seed, int threads = 1);

struct ContractionPoint {
  std::size_t n = 0;
  double mean_ratio = 0.0;  // max over pairs of E[(d_n/d_0)^eps]
  double per_n_root = 0.0;  // mean_ratio^(1/n)
};
struct ContractionReport {
  double eps = 0.0;
  std::vector<ContractionPoint> points;
  double r_hat = 1.0;       // geometric window extrapolation
  double r_hat_prev = 1.0;  // previous window, for stability
  bool window_stable = false;
  std::size_t n_pairs = 0;
};
ContractionReport contraction_rate(const MatrixLaw& law, double eps,
                                   std::size_t n_max, std::size_t n_pairs,
                                   std::size_t n_reps, std::uint64_t seed,
                                   int threads = 1);

// Asymptotic variance via the growth of Var(S_n): least-squares intercept of
// Var(S_n)/n against 1/n over a dyadic n-grid.
ValueSE sigma2_growth(const MatrixLaw& law, unsigned n_lo_exp,
                      unsigned n_hi_exp, std::size_t n_paths,
                      std::uint64_t seed, int threads = 1);

struct CovSeriesResult {
  ValueSE sigma2;
  std::vector<double> lag_cov;    // c_0 .. c_maxlag
  std::vector<double> lag_se;
  std::size_t truncation_lag = 0;  // first lag whose 95% CI covers 0
  std::size_t window = 0;          // lags summed (doubled safety window)
  bool truncation_found = false;
};
// Starts X_1 from the lifted measure (direction from nu_hat, matrix fresh)
// and sums lagged covariances of the increments.
CovSeriesResult sigma2_cov_series(const MatrixLaw& law,
                                  const EmpiricalMeasure& nu_hat,
                                  std::size_t n_paths, std::size_t max_lag,
                                  std::uint64_t seed, int threads = 1);

struct Sigma2Report {
  ValueSE growth;
  CovSeriesResult cov;
  bool agree_3se = false;  // |growth - cov| <= 3 sqrt(se_g^2 + se_c^2)
};
Sigma2Report sigma2_estimate(const MatrixLaw& law, const EmpiricalMeasure& nu_hat,
                             unsigned n_lo_exp, unsigned n_hi_exp,
                             std::size_t n_paths_growth,
                             std::size_t n_paths_cov, std::size_t max_lag,
                             std::uint64_t seed, int threads = 1);

// Expectation under the lifted measure: h(g, v) with g ~ law, v ~ nu_hat.
ValueSE nu_tilde_expect(
    const MatrixLaw& law,
    const std::function<double(const GroupElement&, const ProjPoint&)>& h,
    const EmpiricalMeasure& nu_hat, std::size_t n_samples, std::uint64_t seed);

// Residual | E h(g1, g.v) - E h(g1, v) | with one inner draw per sample;
// zero in expectation when nu_hat is exactly stationary.
ValueSE nu_tilde_invariance_residual(
    const MatrixLaw& law,
    const std::function<double(const GroupElement&, const ProjPoint&)>& h,
    const EmpiricalMeasure& nu_hat, std::size_t n_samples, std::uint64_t seed);

}  // namespace matwalk
