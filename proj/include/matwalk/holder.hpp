// SPDX-License-Identifier: Apache-2.0
//
// Weighted Hoelder machinery: the exponent ladder derived from the moment
// exponent delta0, sampled seminorms over explicit sample plans, the
// truncated conditioning-weight functions, and pointwise verification of
// the seminorm stability bounds for the phase-twisted function e^{it rho} h
// and for iterates of the twisted transfer operator.
//
// True suprema are not computable; every seminorm here is a sampled lower
// bound and every inequality is asserted pointwise per sample, which is the
// form in which the bounds hold.
#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "matwalk/ergodic.hpp"
#include "matwalk/law.hpp"

namespace matwalk {

// Exponent ladder: eps = delta0/8, theta = 3 eps, alpha = 5 eps,
// beta = 7 eps, with delta0 capped at 8/3 (and optionally so that
// eps <= eps0 when a contraction exponent estimate is available).
struct HolderParams {
  double delta0 = 0.0;
  double eps = 0.0;
  double theta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  bool capped = false;  // delta0 was reduced by either cap
};

HolderParams derive_params(double delta0, std::optional<double> eps0 = {});

// Conditioning weight (|g| + |g^-1|)^theta; independent of the direction.
double weight(const GroupElement& g, const HolderParams& p);

// Ramp cutoff: 0 for w <= l-1, (w-(l-1)) w on [l-1, l], w for w >= l.
double weight_trunc(const GroupElement& g, double l, const HolderParams& p);

// Analytic envelope constant: |rho(x)|^{1+gamma} <= c * weight(x) with
// c = ((1+gamma)/(e*theta))^{1+gamma}.
double rho_power_weight_bound(double gamma, const HolderParams& p);

struct TestFunction {
  std::string name;
  std::function<std::complex<double>(const GroupElement&, const ProjPoint&)> f;
};
TestFunction tf_one();
TestFunction tf_weight(const HolderParams& p);
TestFunction tf_weight_trunc(const HolderParams& p, double l);
// pure projective oscillation, independent of the matrix component
TestFunction tf_projective_mode(int d);

// Sample plan: points for the weighted sup seminorm, direction pairs for
// the projective Hoelder seminorm and matrix pairs for the matrix-direction
// Hoelder seminorm. Pair members are also inserted as points so that
// sampled sups dominate every per-pair ratio.
struct SamplePlan {
  std::vector<std::pair<GroupElement, ProjPoint>> points;
  std::vector<std::tuple<GroupElement, ProjPoint, ProjPoint>> proj_pairs;
  std::vector<std::tuple<GroupElement, GroupElement, ProjPoint>> mat_pairs;
};
SamplePlan make_sample_plan(const MatrixLaw& law, std::size_t n_points,
                            std::size_t n_pairs, std::uint64_t seed,
                            double ladder_top = 32.0);

struct Witness {
  double ratio = 0.0;
  double n_g = 0.0;
  double n_g2 = 0.0;
  double dist = 0.0;  // angular or operator distance of the pair
};

struct SeminormReport {
  double abs_theta = 0.0;
  double k_eps_alpha = 0.0;
  double k_eps_beta_prime = 0.0;
  double norm_b = 0.0;  // sum of the three
  Witness w_theta, w_alpha, w_beta;
  std::size_t n_points = 0, n_proj_pairs = 0, n_mat_pairs = 0;
};
SeminormReport seminorms(const TestFunction& h, const HolderParams& p,
                         const SamplePlan& plan);

// Per-pair check that the seminorms of e^{it rho} h stay within
//   k_alpha:  2 |t|^eps |h|_theta + k_alpha(h)
//   k_beta':  2 |t|^eps |h|_theta + k_beta'(h)
// with the sampled sups on the right, margin 1e-9.
struct PhasePerturbReport {
  std::size_t n_checked = 0;
  std::size_t n_failures = 0;
  double worst_slack = 0.0;  // min(RHS - LHS); negative means violation
  bool theta_preserved = false;
  [[nodiscard]] bool pass() const { return n_failures == 0 && theta_preserved; }
};
PhasePerturbReport check_phase_perturbation(const TestFunction& h, double t,
                                            const HolderParams& p,
                                            const SamplePlan& plan);

// Decay of the lifted expectation of the truncated weight along an l-grid.
struct TruncDecayPoint {
  double l = 0.0;
  double value = 0.0;
  double se = 0.0;
  bool censored = false;  // estimate indistinguishable from zero
};
struct TruncDecayReport {
  std::vector<TruncDecayPoint> points;
  double slope = 0.0;
  bool slope_valid = false;
  double threshold = -1.3;
  bool pass = false;
};
TruncDecayReport check_trunc_weight_decay(const MatrixLaw& law,
                                          const HolderParams& p,
                                          const std::vector<double>& l_grid,
                                          const EmpiricalMeasure& nu_hat,
                                          std::size_t n_samples,
                                          std::uint64_t seed,
                                          double threshold = -1.3);

// Monte Carlo evaluation of the n-th twisted-operator iterate
//   (P_t^n h)(x) = E_x[e^{it S_n} h(X_n)]
// with matrix draws frozen across evaluation points, so that coupled pairs
// see the same product and the sampled seminorms of the iterate are
// well-defined functions.
class TransferIterate {
 public:
  TransferIterate(const MatrixLaw& law, std::size_t n_reps, std::size_t n_max,
                  std::uint64_t seed);

  // values of P_t^n h at x for every n in n_grid (ascending)
  [[nodiscard]] std::vector<std::complex<double>> eval(
      const TestFunction& h, double t, const GroupElement& g,
      const ProjPoint& u, const std::vector<std::size_t>& n_grid) const;

  // evaluation restricted to a replica range (for noise estimation)
  [[nodiscard]] std::vector<std::complex<double>> eval_range(
      const TestFunction& h, double t, const GroupElement& g,
      const ProjPoint& u, const std::vector<std::size_t>& n_grid,
      std::size_t rep_lo, std::size_t rep_hi) const;

  [[nodiscard]] std::size_t n_reps() const { return draws_.size(); }

 private:
  std::vector<std::vector<GroupElement>> draws_;
};

struct IterateNormPoint {
  std::size_t n = 0;
  double abs_theta = 0.0;
  double k_eps_alpha = 0.0;
  double k_eps_beta_prime = 0.0;
  double norm_b = 0.0;
};
struct IterateNormReport {
  std::vector<IterateNormPoint> points;
  double c_eps = 0.0;          // calibrated at n=1, safety factor 2, frozen
  double envelope_rate = 0.0;  // max(r_hat, 0.99)
  double noise_floor = 0.0;
  bool envelope_ok = false;    // k_alpha under the geometric envelope
  bool inconclusive = false;   // MC noise dominates the k component
  std::size_t df_k0 = 0;       // Doeblin-Fortet horizon
  double df_r = 0.0;
  double df_c = 0.0;
  bool df_ok = false;
};
IterateNormReport check_transfer_iterate_norms(
    const TestFunction& h, double t, const MatrixLaw& law,
    const std::vector<std::size_t>& n_grid, const HolderParams& p,
    double r_eps_hat, const SamplePlan& plan, std::size_t n_reps,
    std::uint64_t seed);

}  // namespace matwalk
