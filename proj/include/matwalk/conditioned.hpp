// SPDX-License-Identifier: Apache-2.0
//
// Exit time tau_y = min{n >= 1 : y + S_n <= 0} of the walk started from an
// offset y, Monte Carlo survival curves with Wilson intervals, the harmonic
// plateau estimator E_x[y + S_n ; tau_y > n], square-root survival
// asymptotics with the Rayleigh conditional limit, and positivity probes of
// the reachability set {exists n0 : P(y + S_{n0} > gamma, tau_y > n0) > 0}.
#pragma once

#include <cstdint>
#include <vector>

#include "matwalk/chain.hpp"
#include "matwalk/stats.hpp"

namespace matwalk {

struct ExitSample {
  std::int64_t tau = 0;     // exit step, or n_max when censored
  bool censored = false;    // still alive at n_max
  double endpoint = 0.0;    // y + S at min(tau, n_max)
};
ExitSample exit_time_sample(const MatrixLaw& law, const ChainStart& x0,
                            double y, std::size_t n_max, RngStream& rng);

struct SurvivalPoint {
  std::size_t n = 0;
  std::size_t survivors = 0;
  std::size_t paths = 0;
  double p_hat = 0.0;
  stats::Interval ci;  // Wilson 95%
};
struct ExitStats {
  std::vector<SurvivalPoint> points;
  double loglog_slope = 0.0;  // log p vs log n over positive-survival marks
  bool slope_valid = false;
  std::uint64_t seed = 0;
};
ExitStats survival_prob(const MatrixLaw& law, const ChainStart& x0, double y,
                        const std::vector<std::size_t>& n_grid,
                        std::size_t n_paths, std::uint64_t seed,
                        int threads = 1);

struct HarmonicPoint {
  std::size_t n = 0;
  double v_n = 0.0;  // E[y + S_n ; tau_y > n]
  double se = 0.0;
};
struct HarmonicEstimate {
  std::vector<HarmonicPoint> points;
  double v_hat = 0.0;  // value at the largest mark
  double se = 0.0;
  bool plateau_ok = false;  // |V_{2n} - V_n| <= 2 joint se at the tail
  bool sandwich_ok = false; // (1-d)max(y,0)-c <= V <= (1+d)max(y,0)+c, d=1/2
};
HarmonicEstimate harmonic_estimate(const MatrixLaw& law, const ChainStart& x0,
                                   double y,
                                   const std::vector<std::size_t>& n_grid,
                                   std::size_t n_paths, std::uint64_t seed,
                                   double c_delta_half, int threads = 1);

struct AsymptoticsReport {
  std::vector<std::size_t> n_grid;
  std::vector<double> ratio;   // p_hat sqrt(2 pi n) sigma / (2 V)
  double ks_distance = 0.0;    // endpoints/(sigma sqrt(n)) vs Rayleigh
  std::size_t n_survivors = 0; // at the KS mark
  std::size_t n_paths_used = 0;
  bool enough_survivors = false;  // >= 1000 after widening
};
// Budget n_paths is doubled (up to 4 times) until the final mark holds at
// least 1000 survivors.
AsymptoticsReport asymptotics_check(const MatrixLaw& law, const ChainStart& x0,
                                    double y,
                                    const std::vector<std::size_t>& n_grid,
                                    std::size_t n_paths, double v_hat,
                                    double sigma_hat, std::uint64_t seed,
                                    int threads = 1);

enum class ProbeVerdict { Member, NoEvidence };
struct SupportProbe {
  ProbeVerdict verdict = ProbeVerdict::NoEvidence;
  std::size_t first_n0 = 0;  // earliest step with a positive-probability hit
  std::size_t hits = 0;
};
SupportProbe support_probe(const MatrixLaw& law, const ChainStart& x0, double y,
                           double gamma, std::size_t n0_budget,
                           std::size_t n_paths, std::uint64_t seed,
                           int threads = 1);

struct DecayReport {
  std::vector<SurvivalPoint> points;
  double slope = 0.0;  // of log p vs n
  double r2 = 0.0;
  bool slope_valid = false;
  bool all_zero_tail = false;  // no survivors beyond a few steps
  bool consistent = false;     // exponential decay or immediate extinction
};
DecayReport exp_decay_check(const MatrixLaw& law, const ChainStart& x0,
                            double y, const std::vector<std::size_t>& n_grid,
                            std::size_t n_paths, std::uint64_t seed,
                            int threads = 1);

}  // namespace matwalk
