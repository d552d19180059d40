// SPDX-License-Identifier: Apache-2.0
#include "matwalk/conditioned.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "matwalk/parallel.hpp"

namespace matwalk {

namespace {

// One sweep over n_paths killed walks, collecting survivor counts and
// conditional sums at the grid marks and (optionally) endpoints at the
// final mark. Deterministic block merge.
struct KilledWalkStats {
  std::vector<std::size_t> marks;
  std::vector<std::size_t> survivors;
  std::vector<double> sum_v;    // sum over alive paths of (y + S_n)
  std::vector<double> sum_v2;   // sum of squares, same restriction
  std::vector<double> endpoints;  // y + S_n of survivors at the last mark
  std::size_t n_paths = 0;
};

KilledWalkStats run_killed_walks(const MatrixLaw& law, const ChainStart& x0,
                                 double y,
                                 const std::vector<std::size_t>& n_grid,
                                 std::size_t n_paths, std::uint64_t seed,
                                 int threads, bool want_endpoints,
                                 std::uint64_t stream_salt = 0) {
  if (n_grid.empty() || n_paths == 0)
    throw std::invalid_argument("killed walks: empty budget");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1])
      throw std::invalid_argument("killed walks: n_grid must increase");

  const std::size_t n_max = n_grid.back();
  const RngStream root = RngStream::from_seed(seed);
  const Eigen::VectorXd dir0 = act(x0.g, x0.u).rep();

  struct Block {
    std::vector<std::size_t> survivors;
    std::vector<double> sum_v, sum_v2;
    std::vector<double> endpoints;
  };
  const std::size_t n_blocks = block_count(n_paths, kDefaultBlock);
  std::vector<Block> blocks(n_blocks);

  law.with_stepper([&](auto proto) {
    for_each_block(
        n_paths, kDefaultBlock, threads,
        [&](std::size_t b, std::size_t lo, std::size_t hi) {
          Block& blk = blocks[b];
          blk.survivors.assign(n_grid.size(), 0);
          blk.sum_v.assign(n_grid.size(), 0.0);
          blk.sum_v2.assign(n_grid.size(), 0.0);
          auto stepper = proto;
          Eigen::VectorXd dir(dir0.size());
          for (std::size_t k = lo; k < hi; ++k) {
            RngStream rng =
                root.child(stream_id::kConditioned, stream_salt, k);
            dir = dir0;
            double level = y;
            std::size_t mark = 0;
            for (std::size_t n = 1; n <= n_max; ++n) {
              level += stepper.step(rng, dir);
              if (level <= 0.0) break;  // exit at this step
              if (mark < n_grid.size() && n == n_grid[mark]) {
                blk.survivors[mark] += 1;
                blk.sum_v[mark] += level;
                blk.sum_v2[mark] += level * level;
                if (want_endpoints && mark + 1 == n_grid.size())
                  blk.endpoints.push_back(level);
                ++mark;
              }
            }
          }
        });
  });

  KilledWalkStats out;
  out.marks = n_grid;
  out.n_paths = n_paths;
  out.survivors.assign(n_grid.size(), 0);
  out.sum_v.assign(n_grid.size(), 0.0);
  out.sum_v2.assign(n_grid.size(), 0.0);
  for (const auto& blk : blocks) {
    for (std::size_t m = 0; m < n_grid.size(); ++m) {
      out.survivors[m] += blk.survivors[m];
      out.sum_v[m] += blk.sum_v[m];
      out.sum_v2[m] += blk.sum_v2[m];
    }
    out.endpoints.insert(out.endpoints.end(), blk.endpoints.begin(),
                         blk.endpoints.end());
  }
  return out;
}

}  // namespace

ExitSample exit_time_sample(const MatrixLaw& law, const ChainStart& x0,
                            double y, std::size_t n_max, RngStream& rng) {
  ExitSample out;
  Eigen::VectorXd dir = act(x0.g, x0.u).rep();
  double level = y;
  out.censored = true;
  out.tau = static_cast<std::int64_t>(n_max);
  law.with_stepper([&](auto stepper) {
    for (std::size_t n = 1; n <= n_max; ++n) {
      level += stepper.step(rng, dir);
      if (level <= 0.0) {
        out.tau = static_cast<std::int64_t>(n);
        out.censored = false;
        break;
      }
    }
  });
  out.endpoint = level;
  return out;
}

ExitStats survival_prob(const MatrixLaw& law, const ChainStart& x0, double y,
                        const std::vector<std::size_t>& n_grid,
                        std::size_t n_paths, std::uint64_t seed, int threads) {
  const auto stats =
      run_killed_walks(law, x0, y, n_grid, n_paths, seed, threads, false);
  ExitStats out;
  out.seed = seed;
  std::vector<double> lx, ly;
  for (std::size_t m = 0; m < n_grid.size(); ++m) {
    SurvivalPoint pt;
    pt.n = n_grid[m];
    pt.survivors = stats.survivors[m];
    pt.paths = n_paths;
    pt.p_hat = static_cast<double>(pt.survivors) / static_cast<double>(n_paths);
    pt.ci = stats::wilson_ci(pt.survivors, n_paths);
    out.points.push_back(pt);
    if (pt.survivors > 0) {
      lx.push_back(std::log(static_cast<double>(pt.n)));
      ly.push_back(std::log(pt.p_hat));
    }
  }
  if (lx.size() >= 2) {
    out.loglog_slope = stats::fit_line(lx, ly).slope;
    out.slope_valid = true;
  }
  return out;
}

HarmonicEstimate harmonic_estimate(const MatrixLaw& law, const ChainStart& x0,
                                   double y,
                                   const std::vector<std::size_t>& n_grid,
                                   std::size_t n_paths, std::uint64_t seed,
                                   double c_delta_half, int threads) {
  const auto stats =
      run_killed_walks(law, x0, y, n_grid, n_paths, seed, threads, false);
  HarmonicEstimate out;
  const double np = static_cast<double>(n_paths);
  for (std::size_t m = 0; m < n_grid.size(); ++m) {
    HarmonicPoint pt;
    pt.n = n_grid[m];
    // dead paths contribute zero
    pt.v_n = stats.sum_v[m] / np;
    const double ex2 = stats.sum_v2[m] / np;
    const double var = std::max(0.0, ex2 - pt.v_n * pt.v_n);
    pt.se = std::sqrt(var / np);
    out.points.push_back(pt);
  }
  const auto& last = out.points.back();
  out.v_hat = last.v_n;
  out.se = last.se;
  if (out.points.size() >= 2) {
    const auto& prev = out.points[out.points.size() - 2];
    const double joint =
        std::sqrt(prev.se * prev.se + last.se * last.se);
    out.plateau_ok = std::fabs(last.v_n - prev.v_n) <= 2.0 * joint + 1e-12;
  }
  const double delta = 0.5;
  const double ymax = std::max(y, 0.0);
  out.sandwich_ok =
      out.v_hat >= (1.0 - delta) * ymax - c_delta_half - 3.0 * out.se &&
      out.v_hat <= (1.0 + delta) * ymax + c_delta_half + 3.0 * out.se;
  return out;
}

AsymptoticsReport asymptotics_check(const MatrixLaw& law, const ChainStart& x0,
                                    double y,
                                    const std::vector<std::size_t>& n_grid,
                                    std::size_t n_paths, double v_hat,
                                    double sigma_hat, std::uint64_t seed,
                                    int threads) {
  if (!(v_hat > 0.0) || !(sigma_hat > 0.0))
    throw std::invalid_argument("asymptotics_check: needs positive V and sigma");
  AsymptoticsReport rep;
  rep.n_grid = n_grid;
  std::size_t budget = n_paths;
  for (int attempt = 0; attempt < 4; ++attempt) {
    const auto stats = run_killed_walks(law, x0, y, n_grid, budget, seed,
                                        threads, true,
                                        static_cast<std::uint64_t>(attempt));
    rep.n_paths_used = budget;
    rep.n_survivors = stats.survivors.back();
    rep.ratio.clear();
    for (std::size_t m = 0; m < n_grid.size(); ++m) {
      const double p = static_cast<double>(stats.survivors[m]) /
                       static_cast<double>(budget);
      const double n = static_cast<double>(n_grid[m]);
      rep.ratio.push_back(p * std::sqrt(2.0 * std::numbers::pi * n) *
                          sigma_hat / (2.0 * v_hat));
    }
    if (rep.n_survivors >= 1000) {
      rep.enough_survivors = true;
      const double n = static_cast<double>(n_grid.back());
      std::vector<double> scaled;
      scaled.reserve(stats.endpoints.size());
      for (double e : stats.endpoints)
        scaled.push_back(e / (sigma_hat * std::sqrt(n)));
      rep.ks_distance = stats::ks_statistic(std::move(scaled), stats::rayleigh_cdf);
      return rep;
    }
    budget *= 2;
  }
  rep.enough_survivors = false;
  return rep;
}

SupportProbe support_probe(const MatrixLaw& law, const ChainStart& x0, double y,
                           double gamma, std::size_t n0_budget,
                           std::size_t n_paths, std::uint64_t seed,
                           int threads) {
  if (n0_budget == 0 || n_paths == 0)
    throw std::invalid_argument("support_probe: empty budget");
  const RngStream root = RngStream::from_seed(seed);
  const Eigen::VectorXd dir0 = act(x0.g, x0.u).rep();

  struct Block {
    std::size_t first_n0 = 0;  // 0 = no hit
    std::size_t hits = 0;
  };
  const std::size_t n_blocks = block_count(n_paths, kDefaultBlock);
  std::vector<Block> blocks(n_blocks);

  law.with_stepper([&](auto proto) {
    for_each_block(n_paths, kDefaultBlock, threads,
                   [&](std::size_t b, std::size_t lo, std::size_t hi) {
                     Block& blk = blocks[b];
                     auto stepper = proto;
                     Eigen::VectorXd dir(dir0.size());
                     for (std::size_t k = lo; k < hi; ++k) {
                       RngStream rng =
                           root.child(stream_id::kConditioned, 1000, k);
                       dir = dir0;
                       double level = y;
                       for (std::size_t n = 1; n <= n0_budget; ++n) {
                         level += stepper.step(rng, dir);
                         if (level <= 0.0) break;
                         if (level > gamma) {
                           ++blk.hits;
                           if (blk.first_n0 == 0 || n < blk.first_n0)
                             blk.first_n0 = n;
                           break;  // one hit per path suffices
                         }
                       }
                     }
                   });
  });

  SupportProbe out;
  for (const auto& blk : blocks) {
    out.hits += blk.hits;
    if (blk.first_n0 > 0 &&
        (out.first_n0 == 0 || blk.first_n0 < out.first_n0))
      out.first_n0 = blk.first_n0;
  }
  out.verdict = out.hits > 0 ? ProbeVerdict::Member : ProbeVerdict::NoEvidence;
  return out;
}

DecayReport exp_decay_check(const MatrixLaw& law, const ChainStart& x0,
                            double y, const std::vector<std::size_t>& n_grid,
                            std::size_t n_paths, std::uint64_t seed,
                            int threads) {
  const auto stats =
      run_killed_walks(law, x0, y, n_grid, n_paths, seed, threads, false);
  DecayReport rep;
  std::vector<double> xs, ys;
  for (std::size_t m = 0; m < n_grid.size(); ++m) {
    SurvivalPoint pt;
    pt.n = n_grid[m];
    pt.survivors = stats.survivors[m];
    pt.paths = n_paths;
    pt.p_hat = static_cast<double>(pt.survivors) / static_cast<double>(n_paths);
    pt.ci = stats::wilson_ci(pt.survivors, n_paths);
    rep.points.push_back(pt);
    if (pt.survivors > 0) {
      xs.push_back(static_cast<double>(pt.n));
      ys.push_back(std::log(pt.p_hat));
    }
  }
  rep.all_zero_tail = xs.empty() || xs.back() < static_cast<double>(n_grid[std::min<std::size_t>(2, n_grid.size() - 1)]);
  if (xs.size() >= 3) {
    const auto fit = stats::fit_line(xs, ys);
    rep.slope = fit.slope;
    rep.r2 = fit.r2;
    rep.slope_valid = true;
  }
  rep.consistent =
      rep.all_zero_tail || (rep.slope_valid && rep.slope < 0.0 && rep.r2 > 0.9);
  return rep;
}

}  // namespace matwalk
