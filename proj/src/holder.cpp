// SPDX-License-Identifier: Apache-2.0
#include "matwalk/holder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "matwalk/stats.hpp"

namespace matwalk {

HolderParams derive_params(double delta0, std::optional<double> eps0) {
  if (!(delta0 > 0.0)) throw std::invalid_argument("derive_params: delta0 <= 0");
  HolderParams p;
  p.capped = false;
  double d0 = delta0;
  if (d0 > 8.0 / 3.0) {
    d0 = 8.0 / 3.0;
    p.capped = true;
  }
  if (eps0 && d0 / 8.0 > *eps0) {
    d0 = 8.0 * (*eps0);
    p.capped = true;
  }
  p.delta0 = d0;
  p.eps = d0 / 8.0;
  p.theta = 3.0 * p.eps;
  p.alpha = 5.0 * p.eps;
  p.beta = 7.0 * p.eps;
  return p;
}

double weight(const GroupElement& g, const HolderParams& p) {
  return std::pow(g.op_norm() + g.inv_norm(), p.theta);
}

double weight_trunc(const GroupElement& g, double l, const HolderParams& p) {
  if (!(l >= 1.0)) throw std::invalid_argument("weight_trunc: l < 1");
  const double w = weight(g, p);
  if (w <= l - 1.0) return 0.0;
  if (w >= l) return w;
  return (w - (l - 1.0)) * w;
}

double rho_power_weight_bound(double gamma, const HolderParams& p) {
  return std::pow((1.0 + gamma) / (std::numbers::e * p.theta), 1.0 + gamma);
}

TestFunction tf_one() {
  return {"one", [](const GroupElement&, const ProjPoint&) {
            return std::complex<double>{1.0, 0.0};
          }};
}

TestFunction tf_weight(const HolderParams& p) {
  return {"weight", [p](const GroupElement& g, const ProjPoint&) {
            return std::complex<double>{weight(g, p), 0.0};
          }};
}

TestFunction tf_weight_trunc(const HolderParams& p, double l) {
  return {"weight_trunc_" + std::to_string(l),
          [p, l](const GroupElement& g, const ProjPoint&) {
            return std::complex<double>{weight_trunc(g, l, p), 0.0};
          }};
}

TestFunction tf_projective_mode(int d) {
  if (d < 2)
    throw std::invalid_argument("tf_projective_mode: needs dim >= 2");
  return {"projective_mode", [](const GroupElement&, const ProjPoint& u) {
            const auto& v = u.rep();
            // first even Fourier mode in the leading 2-plane
            return std::complex<double>{v(0) * v(0) - v(1) * v(1),
                                        2.0 * v(0) * v(1)};
          }};
}

namespace {

ProjPoint rotate_toward(const Eigen::VectorXd& u, const Eigen::VectorXd& w,
                        double sep) {
  return ProjPoint(std::cos(sep) * u + std::sin(sep) * w);
}

Eigen::VectorXd random_unit(int d, RngStream& rng) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.next_normal();
  const double n = v.norm();
  if (n < 1e-12) {
    v.setZero();
    v(0) = 1.0;
    return v;
  }
  return v / n;
}

Eigen::VectorXd orthogonal_unit(const Eigen::VectorXd& u, RngStream& rng) {
  const int d = static_cast<int>(u.size());
  if (d == 2) {
    Eigen::VectorXd w(2);
    w << -u(1), u(0);
    return w;
  }
  for (int tries = 0; tries < 64; ++tries) {
    Eigen::VectorXd w = random_unit(d, rng);
    w -= u.dot(w) * u;
    const double n = w.norm();
    if (n > 1e-8) return w / n;
  }
  throw std::runtime_error("orthogonal_unit: degenerate draws");
}

}  // namespace

SamplePlan make_sample_plan(const MatrixLaw& law, std::size_t n_points,
                            std::size_t n_pairs, std::uint64_t seed,
                            double ladder_top) {
  const int d = law.dim();
  RngStream rng = RngStream::from_seed(seed).child(stream_id::kSamplePlan, 0);
  SamplePlan plan;

  // matrix pool: identity, a conditioning ladder, rotations (d >= 2) and
  // law draws; the ladder guarantees coverage of N(g) in [1, ladder_top]
  std::vector<GroupElement> pool;
  pool.push_back(GroupElement::identity(d));
  for (double s = 1.5; s <= ladder_top; s *= 2.0) {
    if (d == 1) {
      Eigen::MatrixXd m(1, 1);
      m(0, 0) = s;
      pool.emplace_back(m);
      m(0, 0) = 1.0 / s;
      pool.emplace_back(m);
    } else {
      Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
      m(0, 0) = s;
      m(1, 1) = 1.0 / s;
      pool.emplace_back(m);
    }
  }
  if (d >= 2) {
    for (double a : {0.61, 1.27, 2.54}) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Identity(d, d);
      m(0, 0) = std::cos(a);
      m(0, 1) = -std::sin(a);
      m(1, 0) = std::sin(a);
      m(1, 1) = std::cos(a);
      pool.emplace_back(std::move(m));
    }
  }
  const std::size_t n_law_draws = std::max<std::size_t>(8, n_points / 4);
  for (std::size_t i = 0; i < n_law_draws; ++i) pool.push_back(law.sample(rng));

  auto pool_at = [&](std::size_t i) -> const GroupElement& {
    return pool[i % pool.size()];
  };

  for (std::size_t i = 0; i < n_points; ++i)
    plan.points.emplace_back(pool_at(i), ProjPoint(random_unit(d, rng)));

  const double seps[3] = {1e-3, 1e-1, 1.0};
  if (d >= 2) {
    for (std::size_t i = 0; i < n_pairs; ++i) {
      const GroupElement& g = pool_at(i);
      Eigen::VectorXd u = random_unit(d, rng);
      Eigen::VectorXd w = orthogonal_unit(u, rng);
      ProjPoint pu{u};
      ProjPoint pv = rotate_toward(u, w, seps[i % 3]);
      plan.points.emplace_back(g, pu);
      plan.points.emplace_back(g, pv);
      plan.proj_pairs.emplace_back(g, std::move(pu), std::move(pv));
    }
  }

  for (std::size_t i = 0; i < n_pairs; ++i) {
    const GroupElement& g = pool_at(i);
    ProjPoint u{random_unit(d, rng)};
    if (i % 2 == 0) {
      // nearby perturbation; retry until invertible
      const double delta = seps[i % 3];
      for (int tries = 0; tries < 64; ++tries) {
        Eigen::MatrixXd e(d, d);
        for (int r = 0; r < d; ++r)
          for (int c = 0; c < d; ++c) e(r, c) = rng.next_normal();
        e *= delta / e.norm();
        try {
          GroupElement g2{g.matrix() + e};
          plan.points.emplace_back(g2, u);
          plan.points.emplace_back(g, u);
          plan.mat_pairs.emplace_back(g, std::move(g2), std::move(u));
          break;
        } catch (const SingularMatrixError&) {
        }
      }
    } else {
      const GroupElement& g2 = pool_at(i + 1 + i / pool.size());
      plan.points.emplace_back(g, u);
      plan.points.emplace_back(g2, u);
      plan.mat_pairs.emplace_back(g, g2, std::move(u));
    }
  }
  return plan;
}

SeminormReport seminorms(const TestFunction& h, const HolderParams& p,
                         const SamplePlan& plan) {
  SeminormReport rep;
  rep.n_points = plan.points.size();
  rep.n_proj_pairs = plan.proj_pairs.size();
  rep.n_mat_pairs = plan.mat_pairs.size();

  for (const auto& [g, u] : plan.points) {
    const double ratio = std::abs(h.f(g, u)) / std::pow(g.n_value(), p.theta);
    if (ratio > rep.abs_theta) {
      rep.abs_theta = ratio;
      rep.w_theta = {ratio, g.n_value(), 0.0, 0.0};
    }
  }
  for (const auto& [g, u, v] : plan.proj_pairs) {
    const double dist = angular_dist(u, v);
    if (dist <= 0.0) continue;
    const double ratio = std::abs(h.f(g, u) - h.f(g, v)) /
                         (std::pow(dist, p.eps) * std::pow(g.n_value(), p.alpha));
    if (ratio > rep.k_eps_alpha) {
      rep.k_eps_alpha = ratio;
      rep.w_alpha = {ratio, g.n_value(), 0.0, dist};
    }
  }
  for (const auto& [g, g2, u] : plan.mat_pairs) {
    const double dist = operator_distance(g, g2);
    if (dist <= 0.0) continue;
    const double ratio =
        std::abs(h.f(g, u) - h.f(g2, u)) /
        (std::pow(dist, p.eps) * std::pow(g.n_value(), p.beta) *
         std::pow(g2.n_value(), p.beta));
    if (ratio > rep.k_eps_beta_prime) {
      rep.k_eps_beta_prime = ratio;
      rep.w_beta = {ratio, g.n_value(), g2.n_value(), dist};
    }
  }
  rep.norm_b = rep.abs_theta + rep.k_eps_alpha + rep.k_eps_beta_prime;
  return rep;
}

PhasePerturbReport check_phase_perturbation(const TestFunction& h, double t,
                                            const HolderParams& p,
                                            const SamplePlan& plan) {
  const SeminormReport base = seminorms(h, p, plan);
  PhasePerturbReport rep;
  rep.worst_slack = std::numeric_limits<double>::infinity();

  auto twisted = [&](const GroupElement& g,
                     const ProjPoint& u) -> std::complex<double> {
    const double r = cocycle(g, u);
    return std::polar(1.0, t * r) * h.f(g, u);
  };

  const double t_eps = std::pow(std::fabs(t), p.eps);
  auto check = [&](double lhs, double rhs) {
    const double slack = rhs - lhs;
    rep.worst_slack = std::min(rep.worst_slack, slack);
    ++rep.n_checked;
    if (slack < -(1e-9 + 1e-12 * std::fabs(rhs))) ++rep.n_failures;
  };

  for (const auto& [g, u, v] : plan.proj_pairs) {
    const double dist = angular_dist(u, v);
    if (dist <= 0.0) continue;
    const double lhs = std::abs(twisted(g, u) - twisted(g, v)) /
                       (std::pow(dist, p.eps) * std::pow(g.n_value(), p.alpha));
    check(lhs, 2.0 * t_eps * base.abs_theta + base.k_eps_alpha);
  }
  for (const auto& [g, g2, u] : plan.mat_pairs) {
    const double dist = operator_distance(g, g2);
    if (dist <= 0.0) continue;
    const double lhs = std::abs(twisted(g, u) - twisted(g2, u)) /
                       (std::pow(dist, p.eps) * std::pow(g.n_value(), p.beta) *
                        std::pow(g2.n_value(), p.beta));
    check(lhs, 2.0 * t_eps * base.abs_theta + base.k_eps_beta_prime);
  }

  // |e^{it rho} h|_theta equals |h|_theta sample by sample
  double twisted_theta = 0.0;
  for (const auto& [g, u] : plan.points) {
    twisted_theta = std::max(
        twisted_theta, std::abs(twisted(g, u)) / std::pow(g.n_value(), p.theta));
  }
  rep.theta_preserved =
      std::fabs(twisted_theta - base.abs_theta) <=
      1e-12 * std::max(1.0, base.abs_theta);
  return rep;
}

TruncDecayReport check_trunc_weight_decay(const MatrixLaw& law,
                                          const HolderParams& p,
                                          const std::vector<double>& l_grid,
                                          const EmpiricalMeasure& nu_hat,
                                          std::size_t n_samples,
                                          std::uint64_t seed, double threshold) {
  TruncDecayReport rep;
  rep.threshold = threshold;
  std::vector<double> xs, ys;
  for (double l : l_grid) {
    auto hfun = [&, l](const GroupElement& g, const ProjPoint&) {
      return weight_trunc(g, l, p);
    };
    const ValueSE v = nu_tilde_expect(law, hfun, nu_hat, n_samples,
                                      seed + static_cast<std::uint64_t>(l * 977));
    TruncDecayPoint pt;
    pt.l = l;
    pt.value = v.value;
    pt.se = v.se;
    pt.censored = !(v.value > 3.0 * v.se) || v.value <= 0.0;
    rep.points.push_back(pt);
    if (!pt.censored && l > 0.0) {
      xs.push_back(std::log(l));
      ys.push_back(std::log(v.value));
    }
  }
  if (xs.size() >= 2) {
    rep.slope = stats::fit_line(xs, ys).slope;
    rep.slope_valid = true;
  }
  bool tail_censored = true;
  for (std::size_t i = 1; i < rep.points.size(); ++i)
    tail_censored = tail_censored && rep.points[i].censored;
  rep.pass = (rep.slope_valid && rep.slope <= threshold) || tail_censored;
  return rep;
}

TransferIterate::TransferIterate(const MatrixLaw& law, std::size_t n_reps,
                                 std::size_t n_max, std::uint64_t seed) {
  if (n_reps == 0 || n_max == 0)
    throw std::invalid_argument("TransferIterate: empty budget");
  const RngStream root = RngStream::from_seed(seed);
  draws_.reserve(n_reps);
  for (std::size_t r = 0; r < n_reps; ++r) {
    RngStream rng = root.child(stream_id::kTransferIterate, r);
    std::vector<GroupElement> seq;
    seq.reserve(n_max);
    for (std::size_t k = 0; k < n_max; ++k) seq.push_back(law.sample(rng));
    draws_.push_back(std::move(seq));
  }
}

std::vector<std::complex<double>> TransferIterate::eval_range(
    const TestFunction& h, double t, const GroupElement& g, const ProjPoint& u,
    const std::vector<std::size_t>& n_grid, std::size_t rep_lo,
    std::size_t rep_hi) const {
  std::vector<std::complex<double>> acc(n_grid.size(), {0.0, 0.0});
  const std::size_t n_max = n_grid.back();
  Eigen::VectorXd dir0 = g.matrix() * u.rep();
  dir0 /= dir0.norm();
  Eigen::VectorXd dir(dir0.size()), tmp(dir0.size());
  for (std::size_t r = rep_lo; r < rep_hi; ++r) {
    const auto& seq = draws_[r];
    dir = dir0;
    double s = 0.0;
    std::size_t mark = 0;
    for (std::size_t k = 1; k <= n_max && mark < n_grid.size(); ++k) {
      const GroupElement& gk = seq[k - 1];
      tmp.noalias() = gk.matrix() * dir;
      const double nrm = tmp.norm();
      s += std::log(nrm);
      if (k == n_grid[mark]) {
        acc[mark] += std::polar(1.0, t * s) * h.f(gk, ProjPoint(dir));
        ++mark;
      }
      dir = tmp / nrm;
    }
  }
  const double inv = 1.0 / static_cast<double>(rep_hi - rep_lo);
  for (auto& a : acc) a *= inv;
  return acc;
}

std::vector<std::complex<double>> TransferIterate::eval(
    const TestFunction& h, double t, const GroupElement& g, const ProjPoint& u,
    const std::vector<std::size_t>& n_grid) const {
  return eval_range(h, t, g, u, n_grid, 0, draws_.size());
}

namespace {

// sampled seminorms of x -> P_t^n h(x) for every n in the grid at once
std::vector<IterateNormPoint> iterate_seminorms(
    const TransferIterate& it, const TestFunction& h, double t,
    const HolderParams& p, const SamplePlan& plan,
    const std::vector<std::size_t>& n_grid, std::size_t rep_lo,
    std::size_t rep_hi) {
  std::vector<IterateNormPoint> pts(n_grid.size());
  for (std::size_t m = 0; m < n_grid.size(); ++m) pts[m].n = n_grid[m];

  for (const auto& [g, u] : plan.points) {
    const auto vals = it.eval_range(h, t, g, u, n_grid, rep_lo, rep_hi);
    const double w = std::pow(g.n_value(), p.theta);
    for (std::size_t m = 0; m < n_grid.size(); ++m)
      pts[m].abs_theta = std::max(pts[m].abs_theta, std::abs(vals[m]) / w);
  }
  for (const auto& [g, u, v] : plan.proj_pairs) {
    const double dist = angular_dist(u, v);
    if (dist <= 0.0) continue;
    const auto a = it.eval_range(h, t, g, u, n_grid, rep_lo, rep_hi);
    const auto b = it.eval_range(h, t, g, v, n_grid, rep_lo, rep_hi);
    const double denom =
        std::pow(dist, p.eps) * std::pow(g.n_value(), p.alpha);
    for (std::size_t m = 0; m < n_grid.size(); ++m)
      pts[m].k_eps_alpha =
          std::max(pts[m].k_eps_alpha, std::abs(a[m] - b[m]) / denom);
  }
  for (const auto& [g, g2, u] : plan.mat_pairs) {
    const double dist = operator_distance(g, g2);
    if (dist <= 0.0) continue;
    const auto a = it.eval_range(h, t, g, u, n_grid, rep_lo, rep_hi);
    const auto b = it.eval_range(h, t, g2, u, n_grid, rep_lo, rep_hi);
    const double denom = std::pow(dist, p.eps) *
                         std::pow(g.n_value(), p.beta) *
                         std::pow(g2.n_value(), p.beta);
    for (std::size_t m = 0; m < n_grid.size(); ++m)
      pts[m].k_eps_beta_prime =
          std::max(pts[m].k_eps_beta_prime, std::abs(a[m] - b[m]) / denom);
  }
  for (auto& pt : pts)
    pt.norm_b = pt.abs_theta + pt.k_eps_alpha + pt.k_eps_beta_prime;
  return pts;
}

}  // namespace

IterateNormReport check_transfer_iterate_norms(
    const TestFunction& h, double t, const MatrixLaw& law,
    const std::vector<std::size_t>& n_grid, const HolderParams& p,
    double r_eps_hat, const SamplePlan& plan, std::size_t n_reps,
    std::uint64_t seed) {
  if (n_grid.empty() || n_grid.front() != 1)
    throw std::invalid_argument(
        "check_transfer_iterate_norms: n_grid must start at 1");
  const TransferIterate it(law, n_reps, n_grid.back(), seed);

  IterateNormReport rep;
  rep.points = iterate_seminorms(it, h, t, p, plan, n_grid, 0, n_reps);

  const SeminormReport base = seminorms(h, p, plan);
  const double t_eps = std::pow(std::fabs(t), p.eps);

  // noise floor on the k component: spread between two half-replica sets
  const auto half_a =
      iterate_seminorms(it, h, t, p, plan, n_grid, 0, n_reps / 2);
  const auto half_b =
      iterate_seminorms(it, h, t, p, plan, n_grid, n_reps / 2, n_reps);
  double floor = 0.0;
  for (std::size_t m = 0; m < n_grid.size(); ++m)
    floor = std::max(floor,
                     std::fabs(half_a[m].k_eps_alpha - half_b[m].k_eps_alpha));
  rep.noise_floor = floor;

  // c_eps calibrated at n = 1 against the stated envelope, safety factor 2
  const double denom1 =
      (1.0 + t_eps) * base.abs_theta + base.k_eps_alpha * r_eps_hat;
  rep.c_eps = denom1 > 0.0 ? 2.0 * rep.points.front().norm_b / denom1 : 2.0;

  rep.envelope_rate = std::max(r_eps_hat, 0.99);
  const double k1 = rep.points.front().k_eps_alpha;
  rep.inconclusive = k1 <= 4.0 * floor;
  rep.envelope_ok = true;
  for (const auto& pt : rep.points) {
    if (pt.k_eps_alpha <= std::max(floor * 3.0, 1e-12)) continue;  // in noise
    const double bound =
        2.0 * k1 *
        std::pow(rep.envelope_rate, static_cast<double>(pt.n) - 1.0);
    if (pt.k_eps_alpha > bound + 1e-9) rep.envelope_ok = false;
  }

  // Doeblin-Fortet horizon: c_eps * r^k < 1 from k0 on
  const double r = std::min(rep.envelope_rate, 0.999999);
  rep.df_k0 = static_cast<std::size_t>(
      std::max(1.0, std::ceil(std::log(std::max(rep.c_eps, 1.0)) /
                              -std::log(r)) + 1.0));
  rep.df_c = rep.c_eps * (1.0 + t_eps);
  rep.df_r = rep.c_eps * std::pow(r, static_cast<double>(rep.df_k0));
  rep.df_ok = true;
  const double h_norm_b = base.norm_b;
  for (const auto& pt : rep.points) {
    if (pt.n < rep.df_k0) continue;
    const double rn = rep.c_eps * std::pow(r, static_cast<double>(pt.n));
    if (pt.norm_b >
        rn * h_norm_b + rep.df_c * base.abs_theta + rep.noise_floor + 1e-9)
      rep.df_ok = false;
  }
  return rep;
}

}  // namespace matwalk
