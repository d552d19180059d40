// SPDX-License-Identifier: Apache-2.0
#include "matwalk/ergodic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "matwalk/parallel.hpp"
#include "matwalk/stats.hpp"

namespace matwalk {

namespace {

constexpr std::size_t kGroups = 16;  // replica groups for jackknife-style se

std::size_t group_of(std::size_t replica, std::size_t n_paths) {
  return replica * kGroups / std::max<std::size_t>(n_paths, 1);
}

}  // namespace

ValueSE lyapunov_estimate(const MatrixLaw& law, std::size_t n_steps,
                          std::size_t n_paths, std::size_t burn_in,
                          std::uint64_t seed, int threads) {
  if (n_steps == 0 || n_paths == 0)
    throw std::invalid_argument("lyapunov_estimate: empty budget");
  const RngStream root = RngStream::from_seed(seed);
  const Eigen::VectorXd dir0 = law.default_direction();

  const std::size_t n_blocks = block_count(n_paths, kDefaultBlock);
  std::vector<stats::Accumulator> acc(n_blocks);

  law.with_stepper([&](auto proto) {
    for_each_block(n_paths, kDefaultBlock, threads,
                   [&](std::size_t b, std::size_t lo, std::size_t hi) {
                     auto stepper = proto;
                     Eigen::VectorXd dir(dir0.size());
                     for (std::size_t k = lo; k < hi; ++k) {
                       RngStream rng = root.child(stream_id::kLyapunov, k);
                       dir = dir0;
                       for (std::size_t n = 0; n < burn_in; ++n)
                         stepper.step(rng, dir);
                       double s = 0.0;
                       for (std::size_t n = 0; n < n_steps; ++n)
                         s += stepper.step(rng, dir);
                       acc[b].add(s / static_cast<double>(n_steps));
                     }
                   });
  });

  stats::Accumulator total;
  for (const auto& a : acc) total.merge(a);
  return {total.mean, total.se()};
}

ValueSE EmpiricalMeasure::expect(
    const std::function<double(const Eigen::VectorXd&)>& phi) const {
  stats::Accumulator acc;
  for (const auto& v : pts_) acc.add(phi(v));
  return {acc.mean, acc.se()};
}

std::vector<std::pair<std::string, std::function<double(const Eigen::VectorXd&)>>>
projective_battery(int d) {
  std::vector<std::pair<std::string, std::function<double(const Eigen::VectorXd&)>>>
      battery;
  for (int i = 0; i < d && battery.size() < 10; ++i) {
    for (int j = i; j < d && battery.size() < 10; ++j) {
      battery.emplace_back(
          "q" + std::to_string(i) + std::to_string(j),
          [i, j](const Eigen::VectorXd& v) { return v(i) * v(j); });
    }
  }
  return battery;
}

StationaryResult stationary_measure(const MatrixLaw& law, std::size_t burn_in,
                                    std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0 || n_samples > 2'000'000)
    throw std::invalid_argument("stationary_measure: sample budget out of range");
  const RngStream root = RngStream::from_seed(seed);
  RngStream rng = root.child(stream_id::kStationary, 0);

  std::vector<Eigen::VectorXd> pts;
  pts.reserve(n_samples);
  law.with_stepper([&](auto stepper) {
    Eigen::VectorXd dir = law.default_direction();
    for (std::size_t n = 0; n < burn_in; ++n) stepper.step(rng, dir);
    for (std::size_t n = 0; n < n_samples; ++n) {
      stepper.step(rng, dir);
      pts.push_back(dir);
    }
  });

  StationaryResult out;
  out.measure = EmpiricalMeasure(std::move(pts), burn_in);

  // batch means over consecutive stretches absorb the chain's
  // autocorrelation into the standard error
  RngStream rng2 = root.child(stream_id::kStationary, 1);
  const auto battery = projective_battery(law.dim());
  const std::size_t n = out.measure.size();
  std::vector<std::vector<stats::Accumulator>> batch(
      battery.size(), std::vector<stats::Accumulator>(kGroups));
  Eigen::VectorXd image(law.dim());
  for (std::size_t j = 0; j < n; ++j) {
    const auto& v = out.measure.points()[j];
    const GroupElement g = law.sample(rng2);
    image.noalias() = g.matrix() * v;
    image /= image.norm();
    const std::size_t b = group_of(j, n);
    for (std::size_t f = 0; f < battery.size(); ++f)
      batch[f][b].add(battery[f].second(image) - battery[f].second(v));
  }
  for (std::size_t f = 0; f < battery.size(); ++f) {
    stats::Accumulator over_batches;
    for (const auto& a : batch[f])
      if (a.n > 0) over_batches.add(a.mean);
    out.invariance.push_back({battery[f].first,
                              std::fabs(over_batches.mean),
                              over_batches.se()});
  }
  return out;
}

EquidistReport equidistribution_check(
    const MatrixLaw& law,
    const std::function<double(const Eigen::VectorXd&)>& phi, double nu_phi,
    const std::vector<ProjPoint>& starts, const std::vector<std::size_t>& n_grid,
    std::size_t n_reps, std::uint64_t seed, int threads) {
  if (starts.empty() || n_grid.empty() || n_reps == 0)
    throw std::invalid_argument("equidistribution_check: empty budget");
  const RngStream root = RngStream::from_seed(seed);
  const std::size_t n_max = *std::max_element(n_grid.begin(), n_grid.end());

  // acc[start][mark], merged over replica blocks in fixed order
  const std::size_t n_blocks = block_count(n_reps, kDefaultBlock);
  std::vector<std::vector<std::vector<stats::Accumulator>>> block_acc(
      n_blocks, std::vector<std::vector<stats::Accumulator>>(
                    starts.size(), std::vector<stats::Accumulator>(n_grid.size())));

  law.with_stepper([&](auto proto) {
    for_each_block(
        n_reps, kDefaultBlock, threads,
        [&](std::size_t b, std::size_t lo, std::size_t hi) {
          auto stepper = proto;
          Eigen::VectorXd dir(law.dim());
          for (std::size_t r = lo; r < hi; ++r) {
            for (std::size_t i = 0; i < starts.size(); ++i) {
              RngStream rng =
                  root.child(stream_id::kEquidistribution, i, r);
              dir = starts[i].rep();
              std::size_t mark = 0;
              for (std::size_t n = 1; n <= n_max && mark < n_grid.size(); ++n) {
                stepper.step(rng, dir);
                if (n == n_grid[mark]) block_acc[b][i][mark++].add(phi(dir));
              }
            }
          }
        });
  });

  EquidistReport rep;
  rep.nu_phi = nu_phi;
  for (std::size_t m = 0; m < n_grid.size(); ++m) {
    double sup = 0.0, max_se = 0.0;
    for (std::size_t i = 0; i < starts.size(); ++i) {
      stats::Accumulator total;
      for (std::size_t b = 0; b < n_blocks; ++b) total.merge(block_acc[b][i][m]);
      sup = std::max(sup, std::fabs(total.mean - nu_phi));
      max_se = std::max(max_se, total.se());
    }
    rep.points.push_back({n_grid[m], sup, max_se});
  }
  const auto& first = rep.points.front();
  const auto& last = rep.points.back();
  rep.decreasing = last.sup_disc <=
                   first.sup_disc +
                       3.0 * std::sqrt(first.max_se * first.max_se +
                                       last.max_se * last.max_se);
  return rep;
}

ContractionReport contraction_rate(const MatrixLaw& law, double eps,
                                   std::size_t n_max, std::size_t n_pairs,
                                   std::size_t n_reps, std::uint64_t seed,
                                   int threads) {
  if (!(eps > 0.0)) throw std::invalid_argument("contraction_rate: eps <= 0");
  if (n_max < 8 || n_max > 512)
    throw std::invalid_argument("contraction_rate: n_max out of range");
  const int d = law.dim();
  if (d < 2)
    throw std::invalid_argument("contraction_rate: needs projective dim >= 2");
  const RngStream root = RngStream::from_seed(seed);

  // deterministic pair grid at three separation scales
  const double seps[3] = {1e-3, 1e-1, 1.0};
  std::vector<Eigen::VectorXd> us, vs;
  RngStream prng = root.child(stream_id::kContraction, 0);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    Eigen::VectorXd u(d), w(d);
    if (d == 2) {
      const double th =
          std::numbers::pi * static_cast<double>(p) / static_cast<double>(n_pairs);
      u << std::cos(th), std::sin(th);
      w << -std::sin(th), std::cos(th);
    } else {
      for (int i = 0; i < d; ++i) u(i) = prng.next_normal();
      u /= u.norm();
      for (int i = 0; i < d; ++i) w(i) = prng.next_normal();
      w -= u.dot(w) * u;
      w /= w.norm();
    }
    const double sep = seps[p % 3];
    us.push_back(u);
    vs.push_back(std::cos(sep) * u + std::sin(sep) * w);
  }

  // ratio_acc[pair][n-1] across replicas; same matrix sequence drives every
  // pair within one replica
  const std::size_t n_blocks = block_count(n_reps, kDefaultBlock);
  std::vector<std::vector<std::vector<stats::Accumulator>>> block_acc(
      n_blocks, std::vector<std::vector<stats::Accumulator>>(
                    n_pairs, std::vector<stats::Accumulator>(n_max)));

  for_each_block(
      n_reps, kDefaultBlock, threads,
      [&](std::size_t b, std::size_t lo, std::size_t hi) {
        std::vector<Eigen::VectorXd> cu(n_pairs), cv(n_pairs);
        Eigen::VectorXd tmp(d);
        for (std::size_t r = lo; r < hi; ++r) {
          RngStream rng = root.child(stream_id::kContraction, 1, r);
          for (std::size_t p = 0; p < n_pairs; ++p) {
            cu[p] = us[p];
            cv[p] = vs[p];
          }
          std::vector<double> d0(n_pairs);
          for (std::size_t p = 0; p < n_pairs; ++p)
            d0[p] = angular_dist(cu[p], cv[p]);
          for (std::size_t n = 1; n <= n_max; ++n) {
            const GroupElement g = law.sample(rng);
            for (std::size_t p = 0; p < n_pairs; ++p) {
              tmp.noalias() = g.matrix() * cu[p];
              cu[p] = tmp / tmp.norm();
              tmp.noalias() = g.matrix() * cv[p];
              cv[p] = tmp / tmp.norm();
              const double dn = angular_dist(cu[p], cv[p]);
              block_acc[b][p][n - 1].add(std::pow(dn / d0[p], eps));
            }
          }
        }
      });

  ContractionReport rep;
  rep.eps = eps;
  rep.n_pairs = n_pairs;
  // Distances of strongly contracted pairs eventually fall below the
  // resolution of unit-vector subtraction (~1e-16 absolute); points whose
  // sampled mean dips under the floor are unmeasurable and dropped.
  constexpr double kResolutionFloor = 1e-10;
  std::vector<double> big_m;
  for (std::size_t n = 0; n < n_max; ++n) {
    double m = 0.0;
    for (std::size_t p = 0; p < n_pairs; ++p) {
      stats::Accumulator total;
      for (std::size_t b = 0; b < n_blocks; ++b) total.merge(block_acc[b][p][n]);
      m = std::max(m, total.mean);
    }
    if (m < kResolutionFloor) break;
    big_m.push_back(m);
    rep.points.push_back(
        {n + 1, m, std::pow(m, 1.0 / static_cast<double>(n + 1))});
  }
  const std::size_t n_use = big_m.size();
  if (n_use < 8)
    throw std::runtime_error(
        "contraction_rate: distances collapse below fp resolution too fast; "
        "reduce n_max or pair separations");

  const std::size_t w = std::max<std::size_t>(4, n_use / 4);
  auto window_rate = [&](std::size_t hi) {
    const std::size_t lo = hi - w;
    return std::pow(big_m[hi - 1] / big_m[lo - 1], 1.0 / static_cast<double>(w));
  };
  rep.r_hat = window_rate(n_use);
  rep.r_hat_prev = n_use >= 2 * w ? window_rate(n_use - w) : rep.r_hat;
  rep.window_stable = std::fabs(rep.r_hat - rep.r_hat_prev) < 0.05;
  return rep;
}

ValueSE sigma2_growth(const MatrixLaw& law, unsigned n_lo_exp,
                      unsigned n_hi_exp, std::size_t n_paths,
                      std::uint64_t seed, int threads) {
  if (n_lo_exp >= n_hi_exp || n_hi_exp > 20)
    throw std::invalid_argument("sigma2_growth: bad n-grid exponents");
  const std::size_t n_max = std::size_t{1} << n_hi_exp;
  std::vector<std::size_t> marks;
  for (unsigned e = n_lo_exp; e <= n_hi_exp; ++e)
    marks.push_back(std::size_t{1} << e);

  const RngStream root = RngStream::from_seed(seed);
  const Eigen::VectorXd dir0 = law.default_direction();

  struct Block {
    std::vector<stats::Accumulator> pooled;             // per mark
    std::vector<std::vector<stats::Accumulator>> group; // [group][mark]
  };
  const std::size_t n_blocks = block_count(n_paths, kDefaultBlock);
  std::vector<Block> blocks(n_blocks);

  law.with_stepper([&](auto proto) {
    for_each_block(
        n_paths, kDefaultBlock, threads,
        [&](std::size_t b, std::size_t lo, std::size_t hi) {
          Block& blk = blocks[b];
          blk.pooled.resize(marks.size());
          blk.group.assign(kGroups,
                           std::vector<stats::Accumulator>(marks.size()));
          auto stepper = proto;
          Eigen::VectorXd dir(dir0.size());
          for (std::size_t k = lo; k < hi; ++k) {
            RngStream rng = root.child(stream_id::kSigma2Growth, k);
            dir = dir0;
            double s = 0.0;
            std::size_t mark = 0;
            const std::size_t grp = group_of(k, n_paths);
            for (std::size_t n = 1; n <= n_max; ++n) {
              s += stepper.step(rng, dir);
              if (mark < marks.size() && n == marks[mark]) {
                blk.pooled[mark].add(s);
                blk.group[grp][mark].add(s);
                ++mark;
              }
            }
          }
        });
  });

  auto intercept_of = [&](const std::vector<stats::Accumulator>& per_mark) {
    std::vector<double> xs, ys;
    for (std::size_t m = 0; m < marks.size(); ++m) {
      if (per_mark[m].n < 2) continue;
      const double n = static_cast<double>(marks[m]);
      xs.push_back(1.0 / n);
      ys.push_back(per_mark[m].variance() / n);
    }
    return stats::fit_line(xs, ys).intercept;
  };

  std::vector<stats::Accumulator> pooled(marks.size());
  std::vector<std::vector<stats::Accumulator>> groups(
      kGroups, std::vector<stats::Accumulator>(marks.size()));
  for (const auto& blk : blocks) {
    for (std::size_t m = 0; m < marks.size(); ++m) pooled[m].merge(blk.pooled[m]);
    for (std::size_t g = 0; g < kGroups; ++g)
      for (std::size_t m = 0; m < marks.size(); ++m)
        groups[g][m].merge(blk.group[g][m]);
  }

  const double value = intercept_of(pooled);
  stats::Accumulator spread;
  for (std::size_t g = 0; g < kGroups; ++g) {
    if (groups[g].front().n < 2) continue;
    spread.add(intercept_of(groups[g]));
  }
  return {value, spread.se()};
}

CovSeriesResult sigma2_cov_series(const MatrixLaw& law,
                                  const EmpiricalMeasure& nu_hat,
                                  std::size_t n_paths, std::size_t max_lag,
                                  std::uint64_t seed, int threads) {
  if (nu_hat.size() == 0)
    throw std::invalid_argument("sigma2_cov_series: empty stationary sample");
  if (max_lag == 0 || max_lag > 4096)
    throw std::invalid_argument("sigma2_cov_series: max_lag out of range");
  const std::size_t len = max_lag + 1;
  const RngStream root = RngStream::from_seed(seed);

  // per block, per group: moment sums for (rho_1, rho_{1+j})
  struct Sums {
    std::size_t n = 0;
    double s1 = 0.0, s11 = 0.0;
    std::vector<double> sj, s1j;  // per lag j = 1..max_lag
    void init(std::size_t lags) {
      sj.assign(lags, 0.0);
      s1j.assign(lags, 0.0);
    }
    void merge(const Sums& o) {
      n += o.n;
      s1 += o.s1;
      s11 += o.s11;
      for (std::size_t j = 0; j < sj.size(); ++j) {
        sj[j] += o.sj[j];
        s1j[j] += o.s1j[j];
      }
    }
  };
  const std::size_t n_blocks = block_count(n_paths, kDefaultBlock);
  std::vector<std::vector<Sums>> blocks(n_blocks,
                                        std::vector<Sums>(kGroups));

  law.with_stepper([&](auto proto) {
    for_each_block(
        n_paths, kDefaultBlock, threads,
        [&](std::size_t b, std::size_t lo, std::size_t hi) {
          for (auto& s : blocks[b]) s.init(max_lag);
          auto stepper = proto;
          Eigen::VectorXd dir(law.dim());
          std::vector<double> rho(len);
          for (std::size_t k = lo; k < hi; ++k) {
            RngStream rng = root.child(stream_id::kSigma2Cov, k);
            dir = nu_hat.draw(rng);
            for (std::size_t i = 0; i < len; ++i) rho[i] = stepper.step(rng, dir);
            Sums& s = blocks[b][group_of(k, n_paths)];
            ++s.n;
            s.s1 += rho[0];
            s.s11 += rho[0] * rho[0];
            for (std::size_t j = 1; j <= max_lag; ++j) {
              s.sj[j - 1] += rho[j];
              s.s1j[j - 1] += rho[0] * rho[j];
            }
          }
        });
  });

  std::vector<Sums> groups(kGroups);
  for (auto& g : groups) g.init(max_lag);
  for (const auto& blk : blocks)
    for (std::size_t g = 0; g < kGroups; ++g) groups[g].merge(blk[g]);
  Sums all;
  all.init(max_lag);
  for (const auto& g : groups) all.merge(g);

  auto cov_of = [&](const Sums& s, std::size_t lag) {
    const double n = static_cast<double>(s.n);
    if (lag == 0) return s.s11 / n - (s.s1 / n) * (s.s1 / n);
    return s.s1j[lag - 1] / n - (s.s1 / n) * (s.sj[lag - 1] / n);
  };

  CovSeriesResult out;
  out.lag_cov.resize(len);
  out.lag_se.resize(len);
  for (std::size_t lag = 0; lag < len; ++lag) {
    out.lag_cov[lag] = cov_of(all, lag);
    stats::Accumulator spread;
    for (const auto& g : groups)
      if (g.n >= 2) spread.add(cov_of(g, lag));
    out.lag_se[lag] = spread.se();
  }

  // first lag whose 95% CI covers zero, then a doubled safety window
  out.truncation_found = false;
  for (std::size_t j = 1; j <= max_lag; ++j) {
    if (std::fabs(out.lag_cov[j]) <= 1.96 * out.lag_se[j]) {
      out.truncation_lag = j;
      out.truncation_found = true;
      break;
    }
  }
  out.window = out.truncation_found
                   ? std::min(max_lag, 2 * out.truncation_lag)
                   : max_lag;

  auto sigma2_of = [&](const Sums& s) {
    double v = cov_of(s, 0);
    for (std::size_t j = 1; j <= out.window; ++j) v += 2.0 * cov_of(s, j);
    return v;
  };
  out.sigma2.value = sigma2_of(all);
  stats::Accumulator spread;
  for (const auto& g : groups)
    if (g.n >= 2) spread.add(sigma2_of(g));
  out.sigma2.se = spread.se();
  return out;
}

Sigma2Report sigma2_estimate(const MatrixLaw& law, const EmpiricalMeasure& nu_hat,
                             unsigned n_lo_exp, unsigned n_hi_exp,
                             std::size_t n_paths_growth,
                             std::size_t n_paths_cov, std::size_t max_lag,
                             std::uint64_t seed, int threads) {
  Sigma2Report rep;
  rep.growth = sigma2_growth(law, n_lo_exp, n_hi_exp, n_paths_growth, seed, threads);
  rep.cov = sigma2_cov_series(law, nu_hat, n_paths_cov, max_lag, seed, threads);
  const double gap = std::fabs(rep.growth.value - rep.cov.sigma2.value);
  const double joint = std::sqrt(rep.growth.se * rep.growth.se +
                                 rep.cov.sigma2.se * rep.cov.sigma2.se);
  rep.agree_3se = gap <= 3.0 * joint;
  return rep;
}

ValueSE nu_tilde_expect(
    const MatrixLaw& law,
    const std::function<double(const GroupElement&, const ProjPoint&)>& h,
    const EmpiricalMeasure& nu_hat, std::size_t n_samples, std::uint64_t seed) {
  if (nu_hat.size() == 0 || n_samples == 0)
    throw std::invalid_argument("nu_tilde_expect: empty inputs");
  RngStream rng = RngStream::from_seed(seed).child(stream_id::kNuTilde, 0);
  stats::Accumulator acc;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const ProjPoint v{nu_hat.draw(rng)};
    const GroupElement g = law.sample(rng);
    acc.add(h(g, v));
  }
  return {acc.mean, acc.se()};
}

ValueSE nu_tilde_invariance_residual(
    const MatrixLaw& law,
    const std::function<double(const GroupElement&, const ProjPoint&)>& h,
    const EmpiricalMeasure& nu_hat, std::size_t n_samples, std::uint64_t seed) {
  if (nu_hat.size() == 0 || n_samples == 0)
    throw std::invalid_argument("nu_tilde_invariance_residual: empty inputs");
  RngStream rng = RngStream::from_seed(seed).child(stream_id::kNuTilde, 1);
  stats::Accumulator acc;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const ProjPoint v{nu_hat.draw(rng)};
    const GroupElement g = law.sample(rng);   // outer matrix of the lift
    const GroupElement g1 = law.sample(rng);  // inner draw for (Ph)
    acc.add(h(g1, act(g, v)) - h(g1, v));
  }
  return {std::fabs(acc.mean), acc.se()};
}

}  // namespace matwalk
