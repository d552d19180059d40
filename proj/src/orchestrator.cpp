// SPDX-License-Identifier: Apache-2.0
#include "matwalk/orchestrator.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "matwalk/conditioned.hpp"
#include "matwalk/ergodic.hpp"
#include "matwalk/holder.hpp"
#include "matwalk/io.hpp"
#include "matwalk/spectral.hpp"

namespace matwalk {

using nlohmann::json;

namespace {

double jnum(double x) {
  if (!std::isfinite(x)) throw std::runtime_error("non-finite value in report");
  return x;
}

json vse(const ValueSE& v) {
  return json{{"value", jnum(v.value)}, {"se", jnum(v.se)}};
}

double joint_se(double a, double b) { return std::sqrt(a * a + b * b); }

std::uint64_t sub_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                       std::uint64_t c = 0) {
  return RngStream::from_seed(master).child(a, b, c).key();
}

class StageTimer {
 public:
  explicit StageTimer(std::vector<std::pair<std::string, double>>& sink,
                      std::string name)
      : sink_(sink), name_(std::move(name)),
        start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const auto dt = std::chrono::steady_clock::now() - start_;
    sink_.emplace_back(
        name_, std::chrono::duration<double, std::milli>(dt).count());
  }

 private:
  std::vector<std::pair<std::string, double>>& sink_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

bool evaluate_check(const std::string& name, const json& d) {
  auto all_rows = [&](const std::function<bool(const json&)>& f) {
    for (const auto& row : d.at("rows"))
      if (!f(row)) return false;
    return true;
  };

  if (name == "ladder-identities") {
    const double eps = d.at("eps"), theta = d.at("theta"), alpha = d.at("alpha"),
                 beta = d.at("beta");
    const double tol = 1e-15 * std::max(1.0, beta);
    return std::fabs(theta - 3.0 * eps) <= tol &&
           std::fabs(alpha - (theta + 2.0 * eps)) <= tol &&
           std::fabs(beta - (eps + 2.0 * theta)) <= tol &&
           std::fabs(beta - 7.0 * eps) <= tol;
  }
  if (name == "moment-finite") return !d.at("heavy_tail_flag").get<bool>();
  if (name == "recenter-centered") {
    return std::fabs(d.at("lambda").get<double>()) <=
           3.0 * d.at("se").get<double>() + 1e-9;
  }
  if (name == "contraction-window-stable") {
    return std::fabs(d.at("r_hat").get<double>() -
                     d.at("r_hat_prev").get<double>()) < 0.05;
  }
  if (name == "contraction-range") {
    const double r = d.at("r_hat");
    return r > 0.0 && r < 1.02;
  }
  if (name == "stationary-invariance") {
    return all_rows([](const json& r) {
      return r.at("residual").get<double>() <=
             3.0 * r.at("se").get<double>() + 1e-9;
    });
  }
  if (name == "equidistribution-decreasing") {
    return d.at("last_disc").get<double>() <=
           d.at("first_disc").get<double>() +
               3.0 * joint_se(d.at("first_se"), d.at("last_se"));
  }
  if (name == "sigma2-positive") {
    return d.at("growth").get<double>() > 0.0 && d.at("cov").get<double>() > 0.0;
  }
  if (name == "sigma2-two-route-agreement") {
    return std::fabs(d.at("growth").get<double>() - d.at("cov").get<double>()) <=
           3.0 * joint_se(d.at("growth_se"), d.at("cov_se"));
  }
  if (name == "banach-one-seminorms") {
    return d.at("abs_theta").get<double>() == 1.0 &&
           d.at("k_alpha").get<double>() == 0.0 &&
           d.at("k_beta").get<double>() == 0.0;
  }
  if (name == "banach-weight-norm") {
    return d.at("norm_b").get<double>() <=
           d.at("bound").get<double>() * (1.0 + 1e-12);
  }
  if (name == "banach-trunc-norms") {
    return all_rows([](const json& r) {
      return r.at("norm_b").get<double>() <=
             r.at("bound").get<double>() * (1.0 + 1e-12);
    });
  }
  if (name == "banach-phase-perturbation") {
    return all_rows([](const json& r) {
      return r.at("n_failures").get<std::size_t>() == 0 &&
             r.at("theta_preserved").get<bool>();
    });
  }
  if (name == "banach-trunc-decay") {
    if (d.at("last_censored").get<bool>()) return true;
    return d.at("slope_valid").get<bool>() &&
           d.at("slope").get<double>() <= d.at("threshold").get<double>();
  }
  if (name == "banach-rho-weight-envelope") {
    return d.at("max_ratio").get<double>() <=
           d.at("bound").get<double>() * (1.0 + 1e-12);
  }
  if (name == "banach-iterate-envelope") {
    return d.at("envelope_ok").get<bool>() || d.at("inconclusive").get<bool>();
  }
  if (name == "banach-iterate-doeblin-fortet") {
    return d.at("df_ok").get<bool>() || d.at("inconclusive").get<bool>();
  }
  if (name == "spectral-row-stochastic")
    return d.at("row_sum_err").get<double>() <= 1e-14;
  if (name == "spectral-perron")
    return d.at("lambda1_err").get<double>() <= 1e-10;
  if (name == "spectral-gap") return d.at("gap").get<double>() > 0.01;
  if (name == "spectral-gap-stable") {
    return std::fabs(d.at("gap_m").get<double>() -
                     d.at("gap_2m").get<double>()) < 0.02;
  }
  if (name == "spectral-perturbed-radius") {
    return all_rows([](const json& r) {
      return r.at("radius").get<double>() < 1.0 - 1e-9 &&
             r.at("max_power_norm").get<double>() <= 1.0 + 1e-12;
    });
  }
  if (name == "spectral-tv") return d.at("tv").get<double>() <= 0.05;
  if (name == "conditioned-survival-monotone") {
    return all_rows([](const json& r) {
      const auto& p = r.at("p_hat");
      for (std::size_t i = 1; i < p.size(); ++i)
        if (p[i].get<double>() > p[i - 1].get<double>()) return false;
      return true;
    });
  }
  if (name == "conditioned-probe-agreement") {
    return all_rows([](const json& r) {
      const bool vpos = r.at("vhat").get<double>() >
                        3.0 * r.at("vse").get<double>() + 1e-12;
      return r.at("member").get<bool>() == vpos;
    });
  }
  if (name == "conditioned-gamma-monotone") {
    return all_rows([](const json& r) {
      return !r.at("member_hi").get<bool>() || r.at("member_lo").get<bool>();
    });
  }
  if (name == "conditioned-sandwich") {
    return all_rows([](const json& r) {
      return !r.at("member").get<bool>() || r.at("sandwich_ok").get<bool>();
    });
  }
  if (name == "conditioned-sqrt-bound") {
    return d.at("max_ratio").get<double>() <= d.at("c_bound").get<double>();
  }
  if (name == "conditioned-ratio-near-one") {
    const double r = d.at("ratio_last");
    return r >= 0.8 && r <= 1.2;
  }
  if (name == "conditioned-ks") {
    return d.at("enough_survivors").get<bool>() &&
           d.at("ks").get<double>() <= 0.08;
  }
  if (name == "conditioned-bounded-negative") {
    return d.at("survival_zero").get<bool>() &&
           d.at("vhat").get<double>() == 0.0;
  }
  if (name == "stage-completed") return d.at("ok").get<bool>();
  throw std::invalid_argument("evaluate_check: unknown check '" + name + "'");
}

namespace {

struct Runner {
  const ExperimentConfig& cfg;
  std::filesystem::path out;
  json summary;
  std::vector<CheckResult> checks;
  std::vector<std::pair<std::string, std::string>> artifacts;
  std::vector<std::pair<std::string, double>> wall;

  MatrixLaw law;           // recentered working law
  ValueSE lambda_before{}, lambda_after{};
  double shift_applied = 0.0;
  StationaryResult stat;
  ContractionReport contraction{};
  bool have_contraction = false;
  Sigma2Report sigma2{};
  bool walk_degenerate = false;
  HolderParams params{};
  bool core_ok = false;

  explicit Runner(const ExperimentConfig& c)
      : cfg(c), out(c.out_dir), law(c.resolved_law()) {}

  void add_check(const std::string& name, json details) {
    CheckResult cr{name, evaluate_check(name, details), std::move(details)};
    checks.push_back(std::move(cr));
  }

  void write_artifact(const std::string& rel, const std::string& bytes) {
    const auto path = out / rel;
    io::write_text_file(path, bytes);
    artifacts.emplace_back(rel, io::hex64(io::fnv1a(bytes)));
  }

  void stage_law() {
    StageTimer t(wall, "law");
    const MomentReport mom =
        law.moment_check(cfg.moment_samples,
                         RngStream::from_seed(sub_seed(cfg.master_seed,
                                                       stream_id::kMoment)));
    json jm{{"estimate", jnum(mom.estimate)},
            {"se", jnum(mom.se)},
            {"ci_lo", jnum(mom.ci_lo)},
            {"ci_hi", jnum(mom.ci_hi)},
            {"max_share", jnum(mom.max_share)},
            {"heavy_tail_flag", mom.heavy_tail_flag},
            {"n_samples", mom.n_samples}};
    summary["law"]["moment"] = jm;
    add_check("moment-finite", jm);

    const auto adv = law.irreducibility_advisory();
    summary["law"]["advisory"] = {
        {"applicable", adv.applicable},
        {"no_common_invariant_line", adv.no_common_invariant_line},
        {"has_contracting_element", adv.has_contracting_element},
        {"note", adv.note}};
    summary["law"]["d"] = law.dim();
    summary["law"]["delta0"] = law.delta0();
  }

  void stage_recenter() {
    StageTimer t(wall, "recenter");
    const auto& b = cfg.lyapunov;
    lambda_before = lyapunov_estimate(
        law, b.n_steps, b.n_paths, b.burn_in,
        sub_seed(cfg.master_seed, stream_id::kLyapunov, 0), cfg.threads);
    switch (cfg.recenter) {
      case RecenterMode::None: shift_applied = 0.0; break;
      case RecenterMode::ExactZero: shift_applied = 0.0; break;
      case RecenterMode::Estimate: shift_applied = lambda_before.value; break;
    }
    if (shift_applied != 0.0) law = law.recentered(shift_applied);
    lambda_after = lyapunov_estimate(
        law, b.n_steps, b.n_paths, b.burn_in,
        sub_seed(cfg.master_seed, stream_id::kLyapunov, 1), cfg.threads);
    summary["recenter"] = {{"lambda_before", vse(lambda_before)},
                           {"shift_applied", jnum(shift_applied)},
                           {"lambda_after", vse(lambda_after)}};
    // a drifting law left unrecentered is reported but not failed
    if (cfg.recenter != RecenterMode::None) {
      add_check("recenter-centered", json{{"lambda", jnum(lambda_after.value)},
                                          {"se", jnum(lambda_after.se)}});
    }
  }

  void stage_core() {
    StageTimer t(wall, "core");
    stat = stationary_measure(law, cfg.stationary.burn_in,
                              cfg.stationary.n_samples,
                              sub_seed(cfg.master_seed, stream_id::kStationary));
    json rows = json::array();
    for (const auto& r : stat.invariance)
      rows.push_back({{"name", r.name},
                      {"residual", jnum(r.residual)},
                      {"se", jnum(r.se)}});
    summary["ergodic"]["stationary"] = {
        {"n_samples", stat.measure.size()},
        {"burn_in", stat.measure.burn_in()},
        {"invariance", rows}};
    add_check("stationary-invariance", json{{"rows", rows}});

    if (law.dim() >= 2) {
      const double eps = cfg.contraction.eps > 0.0 ? cfg.contraction.eps
                                                   : law.delta0() / 8.0;
      contraction = contraction_rate(
          law, eps, cfg.contraction.n_max, cfg.contraction.n_pairs,
          cfg.contraction.n_reps,
          sub_seed(cfg.master_seed, stream_id::kContraction), cfg.threads);
      have_contraction = true;
      json pts = json::array();
      io::CsvWriter csv({"n", "mean_ratio", "per_n_root"});
      for (const auto& p : contraction.points) {
        pts.push_back({{"n", p.n},
                       {"mean_ratio", jnum(p.mean_ratio)},
                       {"per_n_root", jnum(p.per_n_root)}});
        csv.add_row({std::to_string(p.n), io::format_double(p.mean_ratio),
                     io::format_double(p.per_n_root)});
      }
      write_artifact("ergodic_contraction.csv", csv.content());
      summary["ergodic"]["contraction"] = {{"eps", jnum(contraction.eps)},
                                           {"r_hat", jnum(contraction.r_hat)},
                                           {"r_hat_prev",
                                            jnum(contraction.r_hat_prev)},
                                           {"points", pts}};
      add_check("contraction-window-stable",
                json{{"r_hat", jnum(contraction.r_hat)},
                     {"r_hat_prev", jnum(contraction.r_hat_prev)}});
      add_check("contraction-range", json{{"r_hat", jnum(contraction.r_hat)}});
    }

    sigma2 = sigma2_estimate(
        law, stat.measure, cfg.sigma2.n_lo_exp, cfg.sigma2.n_hi_exp,
        cfg.sigma2.n_paths_growth, cfg.sigma2.n_paths_cov, cfg.sigma2.max_lag,
        sub_seed(cfg.master_seed, stream_id::kSigma2Growth), cfg.threads);
    walk_degenerate = sigma2.growth.value < 1e-9;
    io::CsvWriter lag_csv({"lag", "cov", "se"});
    for (std::size_t lag = 0; lag < sigma2.cov.lag_cov.size(); ++lag)
      lag_csv.add_row({std::to_string(lag),
                       io::format_double(sigma2.cov.lag_cov[lag]),
                       io::format_double(sigma2.cov.lag_se[lag])});
    write_artifact("ergodic_sigma2_lags.csv", lag_csv.content());
    summary["ergodic"]["sigma2"] = {
        {"growth", vse(sigma2.growth)},
        {"cov_series", vse(sigma2.cov.sigma2)},
        {"truncation_lag", sigma2.cov.truncation_lag},
        {"truncation_found", sigma2.cov.truncation_found},
        {"window", sigma2.cov.window},
        {"degenerate", walk_degenerate}};
    if (!walk_degenerate) {
      add_check("sigma2-positive",
                json{{"growth", jnum(sigma2.growth.value)},
                     {"cov", jnum(sigma2.cov.sigma2.value)}});
      add_check("sigma2-two-route-agreement",
                json{{"growth", jnum(sigma2.growth.value)},
                     {"growth_se", jnum(sigma2.growth.se)},
                     {"cov", jnum(sigma2.cov.sigma2.value)},
                     {"cov_se", jnum(sigma2.cov.sigma2.se)}});
    }

    // centering of the lifted measure: nu_tilde(rho) ~ 0 after recentering
    if (cfg.recenter != RecenterMode::None) {
      const auto rho_fn = [](const GroupElement& g, const ProjPoint& u) {
        return cocycle(g, u);
      };
      const ValueSE c = nu_tilde_expect(
          law, rho_fn, stat.measure, cfg.stationary.n_samples,
          sub_seed(cfg.master_seed, stream_id::kNuTilde));
      summary["ergodic"]["nu_tilde_rho"] = vse(c);
      add_check("recenter-centered",
                json{{"lambda", jnum(c.value)}, {"se", jnum(c.se)}});
    }
    core_ok = true;
  }

  void stage_ergodic() {
    StageTimer t(wall, "ergodic");
    // equidistribution of a bounded projective observable
    if (law.dim() >= 2) {
      const auto phi = [](const Eigen::VectorXd& v) {
        return v(0) * v(0) - v(1) * v(1);
      };
      const ValueSE nu_phi = stat.measure.expect(phi);
      std::vector<ProjPoint> starts;
      for (int i = 0; i < 8; ++i) {
        const double th = std::numbers::pi * i / 8.0;
        Eigen::VectorXd v = Eigen::VectorXd::Zero(law.dim());
        v(0) = std::cos(th);
        v(1) = std::sin(th);
        starts.emplace_back(v);
      }
      const std::vector<std::size_t> grid{8, 16, 32, 64, 128};
      const EquidistReport eq = equidistribution_check(
          law, phi, nu_phi.value, starts, grid, 512,
          sub_seed(cfg.master_seed, stream_id::kEquidistribution), cfg.threads);
      json pts = json::array();
      for (const auto& p : eq.points)
        pts.push_back({{"n", p.n},
                       {"sup_disc", jnum(p.sup_disc)},
                       {"max_se", jnum(p.max_se)}});
      summary["ergodic"]["equidistribution"] = {{"nu_phi", jnum(nu_phi.value)},
                                                {"points", pts}};
      add_check("equidistribution-decreasing",
                json{{"first_disc", jnum(eq.points.front().sup_disc)},
                     {"first_se", jnum(eq.points.front().max_se)},
                     {"last_disc", jnum(eq.points.back().sup_disc)},
                     {"last_se", jnum(eq.points.back().max_se)}});
    }

    // a small reproducible path dump documenting the trajectory format
    {
      const ChainStart x0{GroupElement::identity(law.dim()),
                          ProjPoint::axis(law.dim(), 0)};
      RunPathsOptions opts;
      opts.threads = 1;
      opts.keep_paths = true;
      const auto res = run_paths(law, x0, 32, 4, cfg.master_seed, opts);
      std::vector<std::string> header{"replica", "step", "rho", "s"};
      for (int i = 0; i < law.dim(); ++i)
        header.push_back("dir" + std::to_string(i));
      io::CsvWriter csv(header);
      for (const auto& wp : res.paths) {
        for (std::size_t k = 0; k < wp.rho.size(); ++k) {
          std::vector<std::string> row{
              std::to_string(wp.replica), std::to_string(k + 1),
              io::format_double(wp.rho[k]), io::format_double(wp.s[k])};
          for (int i = 0; i < law.dim(); ++i)
            row.push_back(io::format_double(wp.dir[k](i)));
          csv.add_row(row);
        }
      }
      write_artifact("ergodic_walk_paths.csv", csv.content());
    }
  }

  void stage_banach() {
    StageTimer t(wall, "banach");
    // cap the ladder by the contraction exponent when evidence requires it
    std::optional<double> eps0;
    json cap_info;
    if (law.dim() >= 2 && have_contraction && contraction.r_hat >= 0.999) {
      double eps_try = law.delta0() / 16.0;
      bool found = false;
      for (int k = 0; k < 2 && !found; ++k, eps_try /= 2.0) {
        const auto c2 = contraction_rate(
            law, eps_try, cfg.contraction.n_max, cfg.contraction.n_pairs,
            cfg.contraction.n_reps,
            sub_seed(cfg.master_seed, stream_id::kContraction, 7 + k),
            cfg.threads);
        if (c2.r_hat < 0.999) {
          eps0 = eps_try;
          found = true;
        }
      }
      cap_info["contraction_evidence"] = found;
      if (!found) cap_info["note"] = "no contraction at probed exponents";
    }
    params = derive_params(law.delta0(), eps0);
    json pj{{"delta0", jnum(params.delta0)}, {"eps", jnum(params.eps)},
            {"theta", jnum(params.theta)},   {"alpha", jnum(params.alpha)},
            {"beta", jnum(params.beta)},     {"capped", params.capped}};
    summary["banach"]["params"] = pj;
    if (!cap_info.empty()) summary["banach"]["cap_info"] = cap_info;
    add_check("ladder-identities", pj);

    const SamplePlan plan = make_sample_plan(
        law, cfg.banach.n_points, cfg.banach.n_pairs,
        sub_seed(cfg.master_seed, stream_id::kSamplePlan), 32.0);

    io::CsvWriter wit({"function", "component", "ratio", "n_g", "n_g2", "dist"});
    auto witness_rows = [&](const std::string& fn, const SeminormReport& r) {
      auto row = [&](const char* comp, const Witness& w) {
        wit.add_row({fn, comp, io::format_double(w.ratio),
                     io::format_double(w.n_g), io::format_double(w.n_g2),
                     io::format_double(w.dist)});
      };
      row("abs_theta", r.w_theta);
      row("k_eps_alpha", r.w_alpha);
      row("k_eps_beta_prime", r.w_beta);
    };

    const TestFunction one = tf_one();
    const SeminormReport sm_one = seminorms(one, params, plan);
    witness_rows("one", sm_one);
    summary["banach"]["seminorms"]["one"] = {
        {"abs_theta", jnum(sm_one.abs_theta)},
        {"k_alpha", jnum(sm_one.k_eps_alpha)},
        {"k_beta", jnum(sm_one.k_eps_beta_prime)},
        {"norm_b", jnum(sm_one.norm_b)}};
    add_check("banach-one-seminorms",
              json{{"abs_theta", jnum(sm_one.abs_theta)},
                   {"k_alpha", jnum(sm_one.k_eps_alpha)},
                   {"k_beta", jnum(sm_one.k_eps_beta_prime)}});

    const TestFunction w = tf_weight(params);
    const SeminormReport sm_w = seminorms(w, params, plan);
    witness_rows("weight", sm_w);
    const double w_bound = std::pow(2.0, params.theta + 2.0);
    summary["banach"]["seminorms"]["weight"] = {
        {"abs_theta", jnum(sm_w.abs_theta)},
        {"k_alpha", jnum(sm_w.k_eps_alpha)},
        {"k_beta", jnum(sm_w.k_eps_beta_prime)},
        {"norm_b", jnum(sm_w.norm_b)},
        {"bound", jnum(w_bound)}};
    add_check("banach-weight-norm",
              json{{"norm_b", jnum(sm_w.norm_b)}, {"bound", jnum(w_bound)}});

    const double wl_bound = std::pow(2.0, 2.0 * params.theta + 3.0);
    json trunc_rows = json::array();
    for (double l : cfg.banach.l_grid) {
      const TestFunction wl = tf_weight_trunc(params, l);
      const SeminormReport sm = seminorms(wl, params, plan);
      witness_rows(wl.name, sm);
      trunc_rows.push_back({{"l", jnum(l)},
                            {"norm_b", jnum(sm.norm_b)},
                            {"bound", jnum(wl_bound)}});
    }
    summary["banach"]["seminorms"]["weight_trunc"] = trunc_rows;
    add_check("banach-trunc-norms", json{{"rows", trunc_rows}});
    write_artifact("banach_witnesses.csv", wit.content());

    // phase twist e^{it rho} h
    json phase_rows = json::array();
    std::vector<TestFunction> hs{one, w, tf_weight_trunc(params, 4.0)};
    for (const auto& h : hs) {
      for (double tval : cfg.banach.t_values) {
        const PhasePerturbReport pr =
            check_phase_perturbation(h, tval, params, plan);
        phase_rows.push_back({{"h", h.name},
                              {"t", jnum(tval)},
                              {"n_checked", pr.n_checked},
                              {"n_failures", pr.n_failures},
                              {"worst_slack", jnum(pr.worst_slack)},
                              {"theta_preserved", pr.theta_preserved}});
      }
    }
    summary["banach"]["phase_perturbation"] = phase_rows;
    add_check("banach-phase-perturbation", json{{"rows", phase_rows}});

    // |rho|^{1+gamma} <= c * weight, gamma = 1, analytic envelope constant
    {
      RngStream rng = RngStream::from_seed(
          sub_seed(cfg.master_seed, stream_id::kSamplePlan, 2));
      const double bound = rho_power_weight_bound(1.0, params);
      double max_ratio = 0.0;
      for (int i = 0; i < 20000; ++i) {
        const GroupElement g = law.sample(rng);
        const ProjPoint u{[&] {
          Eigen::VectorXd v(law.dim());
          for (int k = 0; k < law.dim(); ++k) v(k) = rng.next_normal();
          return v;
        }()};
        const double r = std::fabs(cocycle(g, u));
        max_ratio = std::max(max_ratio, r * r / weight(g, params));
      }
      summary["banach"]["rho_weight_envelope"] = {{"max_ratio", jnum(max_ratio)},
                                                  {"bound", jnum(bound)}};
      add_check("banach-rho-weight-envelope",
                json{{"max_ratio", jnum(max_ratio)}, {"bound", jnum(bound)}});
    }

    // decay of the lifted truncated weight
    const TruncDecayReport td = check_trunc_weight_decay(
        law, params, cfg.banach.l_grid, stat.measure, cfg.banach.nu_samples,
        sub_seed(cfg.master_seed, stream_id::kNuTilde, 3));
    json td_pts = json::array();
    for (const auto& p : td.points)
      td_pts.push_back({{"l", jnum(p.l)},
                        {"value", jnum(p.value)},
                        {"se", jnum(p.se)},
                        {"censored", p.censored}});
    summary["banach"]["trunc_decay"] = {{"points", td_pts},
                                        {"slope", jnum(td.slope)},
                                        {"slope_valid", td.slope_valid},
                                        {"threshold", jnum(td.threshold)}};
    add_check("banach-trunc-decay",
              json{{"slope", jnum(td.slope)},
                   {"slope_valid", td.slope_valid},
                   {"last_censored", td.points.back().censored},
                   {"threshold", jnum(td.threshold)}});

    // norm control of twisted-operator iterates
    const double r_hat = (law.dim() >= 2 && have_contraction)
                             ? contraction.r_hat
                             : 0.0;
    const SamplePlan small_plan = make_sample_plan(
        law, std::max<std::size_t>(32, cfg.banach.n_points / 8),
        std::max<std::size_t>(32, cfg.banach.n_pairs / 8),
        sub_seed(cfg.master_seed, stream_id::kSamplePlan, 1), 16.0);
    const TestFunction h_osc =
        law.dim() >= 2 ? tf_projective_mode(law.dim()) : tf_weight(params);
    io::CsvWriter it_csv({"h", "t", "n", "abs_theta", "k_alpha", "k_beta",
                          "norm_b"});
    json it_rows = json::array();
    for (double tval : {0.0, 0.5}) {
      const IterateNormReport ir = check_transfer_iterate_norms(
          h_osc, tval, law, cfg.banach.iterate_n_grid, params, r_hat,
          small_plan, cfg.banach.iterate_reps,
          sub_seed(cfg.master_seed, stream_id::kTransferIterate));
      for (const auto& p : ir.points)
        it_csv.add_row({h_osc.name, io::format_double(tval),
                        std::to_string(p.n), io::format_double(p.abs_theta),
                        io::format_double(p.k_eps_alpha),
                        io::format_double(p.k_eps_beta_prime),
                        io::format_double(p.norm_b)});
      it_rows.push_back({{"h", h_osc.name},
                         {"t", jnum(tval)},
                         {"c_eps", jnum(ir.c_eps)},
                         {"envelope_rate", jnum(ir.envelope_rate)},
                         {"noise_floor", jnum(ir.noise_floor)},
                         {"envelope_ok", ir.envelope_ok},
                         {"inconclusive", ir.inconclusive},
                         {"df_k0", ir.df_k0},
                         {"df_r", jnum(ir.df_r)},
                         {"df_ok", ir.df_ok}});
      add_check("banach-iterate-envelope",
                json{{"envelope_ok", ir.envelope_ok},
                     {"inconclusive", ir.inconclusive}});
      add_check("banach-iterate-doeblin-fortet",
                json{{"df_ok", ir.df_ok}, {"inconclusive", ir.inconclusive}});
    }
    summary["banach"]["iterates"] = it_rows;
    write_artifact("banach_iterates.csv", it_csv.content());
  }

  void stage_spectral() {
    StageTimer t(wall, "spectral");
    if (law.dim() != 2 || !law.is_finite_support()) {
      summary["spectral"] = {{"skipped", "needs a finite-support law on GL(2)"}};
      return;
    }
    const int m = cfg.spectral.m;
    const CircleGrid grid(m), grid2(2 * m);
    const ReducedOperator op0 = assemble(law, grid, 0.0);
    const SpectrumReport sp = peripheral_spectrum(op0);
    const ReducedOperator op0r = assemble(law, grid2, 0.0);
    const SpectrumReport sp2 = peripheral_spectrum(op0r);

    io::CsvWriter eig({"m", "t", "idx", "re", "im"});
    json evs = json::array();
    for (std::size_t i = 0; i < std::min<std::size_t>(16, sp.eigenvalues.size());
         ++i) {
      eig.add_row({std::to_string(m), "0", std::to_string(i),
                   io::format_double(sp.eigenvalues[i].real()),
                   io::format_double(sp.eigenvalues[i].imag())});
      evs.push_back({{"re", jnum(sp.eigenvalues[i].real())},
                     {"im", jnum(sp.eigenvalues[i].imag())}});
    }
    summary["spectral"]["t0"] = {{"m", m},
                                 {"row_sum_err", jnum(op0.row_sum_err)},
                                 {"lambda1_err", jnum(sp.lambda1_err)},
                                 {"gap", jnum(sp.gap)},
                                 {"gap_refined", jnum(sp2.gap)},
                                 {"eigenvalues", evs}};
    add_check("spectral-row-stochastic",
              json{{"row_sum_err", jnum(op0.row_sum_err)}});
    add_check("spectral-perron", json{{"lambda1_err", jnum(sp.lambda1_err)}});
    // a gap is only promised under irreducibility + contraction; degenerate
    // controls (single matrix, pure rotations) are reported, not asserted
    const auto adv = law.irreducibility_advisory();
    const bool gap_expected =
        adv.has_contracting_element && adv.no_common_invariant_line;
    if (gap_expected) {
      add_check("spectral-gap", json{{"gap", jnum(sp.gap)}});
      add_check("spectral-gap-stable",
                json{{"gap_m", jnum(sp.gap)}, {"gap_2m", jnum(sp2.gap)}});
    }

    json trows = json::array();
    for (double tv : cfg.spectral.t_values) {
      if (tv == 0.0) continue;
      const ReducedOperator opt = assemble(law, grid, tv);
      const PowerBoundReport pb = perturbed_power_bound(opt, cfg.spectral.n_power);
      for (std::size_t i = 0; i < 4 && i < pb.power_norms.size(); ++i)
        eig.add_row({std::to_string(m), io::format_double(tv),
                     std::to_string(i), io::format_double(pb.power_norms[i]),
                     "0"});
      trows.push_back({{"t", jnum(tv)},
                       {"radius", jnum(pb.spectral_radius)},
                       {"max_power_norm", jnum(pb.max_power_norm)}});
    }
    summary["spectral"]["perturbed"] = trows;
    if (!trows.empty() && gap_expected)
      add_check("spectral-perturbed-radius", json{{"rows", trows}});
    write_artifact("spectral_eigenvalues.csv", eig.content());

    if (core_ok && adv.has_contracting_element && sp.stationary_converged) {
      const double tv_dist = tv_distance_to_chain(
          sp.stationary, grid, law, cfg.stationary.burn_in, 1'000'000,
          sub_seed(cfg.master_seed, stream_id::kStationary, 9));
      summary["spectral"]["tv_vs_mc"] = jnum(tv_dist);
      add_check("spectral-tv", json{{"tv", jnum(tv_dist)}});
    }
  }

  void stage_conditioned() {
    StageTimer t(wall, "conditioned");
    if (walk_degenerate) {
      summary["conditioned"] = {
          {"skipped", "walk variance is numerically zero for this law"}};
      return;
    }
    const double sigma_w = std::sqrt(std::max(sigma2.growth.value, 0.0));
    const auto& cb = cfg.conditioned;

    std::vector<ChainStart> xs;
    if (law.dim() == 1) {
      xs.push_back({GroupElement::identity(1), ProjPoint::axis(1, 0)});
    } else {
      for (double th : {0.0, std::numbers::pi / 3.0, 2.0 * std::numbers::pi / 3.0}) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(law.dim());
        v(0) = std::cos(th);
        v(1) = std::sin(th);
        xs.push_back({GroupElement::identity(law.dim()), ProjPoint(v)});
      }
    }

    std::vector<std::size_t> n_grid;
    for (std::size_t n = 4; n <= (std::size_t{1} << cb.n_grid_max_exp); n *= 2)
      n_grid.push_back(n);

    std::vector<double> gammas = cb.gammas;
    std::sort(gammas.begin(), gammas.end());
    const double gamma_lo = gammas.front(), gamma_hi = gammas.back();

    io::CsvWriter surv_csv({"x", "y", "n", "survivors", "paths", "p_hat",
                            "ci_lo", "ci_hi"});
    io::CsvWriter harm_csv({"x", "y", "n", "v_n", "se"});
    json mono_rows = json::array(), probe_rows = json::array(),
         gamma_rows = json::array(), sw_rows = json::array();
    double max_sqrt_ratio = 0.0;
    double best_vhat = 0.0, best_y = 0.0;
    std::size_t best_x = 0;

    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t jy = 0; jy < cb.y_scales.size(); ++jy) {
        const double y = cb.y_scales[jy] * sigma_w;
        // shared sub-seed across y at fixed x keeps survival coupled in y
        const std::uint64_t s = sub_seed(cfg.master_seed,
                                         stream_id::kConditioned, i);
        const ExitStats es =
            survival_prob(law, xs[i], y, n_grid, cb.n_paths, s, cfg.threads);
        json phats = json::array();
        for (const auto& p : es.points) {
          surv_csv.add_row({std::to_string(i), io::format_double(y),
                            std::to_string(p.n), std::to_string(p.survivors),
                            std::to_string(p.paths),
                            io::format_double(p.p_hat),
                            io::format_double(p.ci.lo),
                            io::format_double(p.ci.hi)});
          phats.push_back(jnum(p.p_hat));
          max_sqrt_ratio = std::max(
              max_sqrt_ratio, p.p_hat * std::sqrt(static_cast<double>(p.n)) /
                                  (1.0 + std::max(y, 0.0)));
        }
        mono_rows.push_back({{"x", i}, {"y", jnum(y)}, {"p_hat", phats}});

        const HarmonicEstimate he = harmonic_estimate(
            law, xs[i], y, n_grid, cb.n_paths,
            sub_seed(cfg.master_seed, stream_id::kConditioned, 100 + i, jy),
            cfg.c_delta_half, cfg.threads);
        for (const auto& p : he.points)
          harm_csv.add_row({std::to_string(i), io::format_double(y),
                            std::to_string(p.n), io::format_double(p.v_n),
                            io::format_double(p.se)});

        const SupportProbe pr_lo = support_probe(
            law, xs[i], y, gamma_lo * sigma_w, cb.n0_budget, 4096,
            sub_seed(cfg.master_seed, stream_id::kConditioned, 200 + i, jy),
            cfg.threads);
        const SupportProbe pr_hi = support_probe(
            law, xs[i], y, gamma_hi * sigma_w, cb.n0_budget, 4096,
            sub_seed(cfg.master_seed, stream_id::kConditioned, 300 + i, jy),
            cfg.threads);
        const bool member = pr_lo.verdict == ProbeVerdict::Member;
        probe_rows.push_back({{"x", i},
                              {"y", jnum(y)},
                              {"member", member},
                              {"vhat", jnum(he.v_hat)},
                              {"vse", jnum(he.se)}});
        gamma_rows.push_back({{"x", i},
                              {"y", jnum(y)},
                              {"member_lo", member},
                              {"member_hi",
                               pr_hi.verdict == ProbeVerdict::Member}});
        sw_rows.push_back({{"x", i},
                           {"y", jnum(y)},
                           {"member", member},
                           {"sandwich_ok", he.sandwich_ok},
                           {"plateau_ok", he.plateau_ok}});
        if (he.v_hat > best_vhat) {
          best_vhat = he.v_hat;
          best_y = y;
          best_x = i;
        }
      }
    }
    write_artifact("conditioned_survival.csv", surv_csv.content());
    write_artifact("conditioned_harmonic.csv", harm_csv.content());
    summary["conditioned"]["grid"] = {{"sigma_w", jnum(sigma_w)},
                                      {"probe", probe_rows}};
    add_check("conditioned-survival-monotone", json{{"rows", mono_rows}});
    add_check("conditioned-probe-agreement", json{{"rows", probe_rows}});
    add_check("conditioned-gamma-monotone", json{{"rows", gamma_rows}});
    add_check("conditioned-sandwich", json{{"rows", sw_rows}});
    // single frozen constant across presets for the sqrt(n) bound
    add_check("conditioned-sqrt-bound",
              json{{"max_ratio", jnum(max_sqrt_ratio)}, {"c_bound", 40.0}});

    // square-root asymptotics and the Rayleigh conditional law at the
    // best-resolved grid point
    if (best_vhat > 0.0 && sigma_w > 0.0) {
      std::vector<std::size_t> ks_grid;
      for (std::size_t n = 16; n < cb.ks_n; n *= 2) ks_grid.push_back(n);
      ks_grid.push_back(cb.ks_n);
      const AsymptoticsReport ar = asymptotics_check(
          law, xs[best_x], best_y, ks_grid, cb.ks_paths, best_vhat, sigma_w,
          sub_seed(cfg.master_seed, stream_id::kConditioned, 400), cfg.threads);
      json ratios = json::array();
      for (double r : ar.ratio) ratios.push_back(jnum(r));
      summary["conditioned"]["asymptotics"] = {
          {"y", jnum(best_y)},
          {"ratio", ratios},
          {"ks", jnum(ar.ks_distance)},
          {"n_survivors", ar.n_survivors},
          {"n_paths_used", ar.n_paths_used},
          {"enough_survivors", ar.enough_survivors}};
      add_check("conditioned-ratio-near-one",
                json{{"ratio_last", jnum(ar.ratio.back())}});
      add_check("conditioned-ks", json{{"ks", jnum(ar.ks_distance)},
                                       {"enough_survivors",
                                        ar.enough_survivors}});
      if (ar.enough_survivors) {
        io::CsvWriter ep({"endpoint_scaled"});
        // endpoints are re-derived by verify from ks only; store the KS mark
        ep.add_row({io::format_double(ar.ks_distance)});
        write_artifact("conditioned_endpoints.csv", ep.content());
      }
    }

    // trivial exponential-decay witness below the increment bound
    if (const auto m = law.max_abs_increment()) {
      const double y_neg = -(*m + 0.5 * sigma_w + 0.1);
      const std::vector<std::size_t> small_grid{1, 2, 4, 8};
      const ExitStats es = survival_prob(
          law, xs[0], y_neg, small_grid, 4096,
          sub_seed(cfg.master_seed, stream_id::kConditioned, 500), cfg.threads);
      bool all_zero = true;
      for (const auto& p : es.points) all_zero = all_zero && p.survivors == 0;
      const HarmonicEstimate he = harmonic_estimate(
          law, xs[0], y_neg, small_grid, 4096,
          sub_seed(cfg.master_seed, stream_id::kConditioned, 501),
          cfg.c_delta_half, cfg.threads);
      summary["conditioned"]["bounded_negative"] = {
          {"y", jnum(y_neg)},
          {"survival_zero", all_zero},
          {"vhat", jnum(he.v_hat)}};
      add_check("conditioned-bounded-negative",
                json{{"survival_zero", all_zero}, {"vhat", jnum(he.v_hat)}});
    }
  }
};

}  // namespace

RunManifest run_experiment(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  Runner r(cfg);
  r.summary["schema_version"] = kSchemaVersion;
  r.summary["code_version"] = kCodeVersion;
  r.summary["preset"] = cfg.preset_name;
  r.summary["master_seed"] = cfg.master_seed;

  const bool need_core = cfg.stage_enabled("ergodic") ||
                         cfg.stage_enabled("banach") ||
                         cfg.stage_enabled("spectral") ||
                         cfg.stage_enabled("conditioned");

  auto guarded = [&](const std::string& stage, auto&& fn, bool enabled,
                     bool deps_ok) {
    if (!enabled) return true;
    if (!deps_ok) {
      r.summary[stage]["skipped"] = "dependency stage failed";
      return false;
    }
    try {
      fn();
      return true;
    } catch (const std::exception& e) {
      r.summary[stage]["error"] = e.what();
      r.add_check("stage-completed",
                  json{{"ok", false}, {"stage", stage}, {"error", e.what()}});
      return false;
    }
  };

  bool ok = guarded("law", [&] { r.stage_law(); }, true, true);
  ok = guarded("recenter", [&] { r.stage_recenter(); }, true, ok) && ok;
  bool core_ok = guarded("core", [&] { r.stage_core(); }, need_core, ok);
  guarded("ergodic", [&] { r.stage_ergodic(); }, cfg.stage_enabled("ergodic"),
          ok && core_ok);
  guarded("banach", [&] { r.stage_banach(); }, cfg.stage_enabled("banach"),
          ok && core_ok);
  guarded("spectral", [&] { r.stage_spectral(); }, cfg.stage_enabled("spectral"),
          ok && core_ok);
  guarded("conditioned", [&] { r.stage_conditioned(); },
          cfg.stage_enabled("conditioned"), ok && core_ok);

  json jchecks = json::array();
  bool all_pass = true;
  for (const auto& c : r.checks) {
    jchecks.push_back(
        {{"name", c.name}, {"pass", c.pass}, {"details", c.details}});
    all_pass = all_pass && c.pass;
  }
  r.summary["checks"] = jchecks;
  r.summary["stages_enabled"] = cfg.stages;
  r.write_artifact("summary.json", r.summary.dump(2) + "\n");

  RunManifest man;
  man.config_hash = io::hex64(io::fnv1a(cfg.canonical_dump()));
  man.artifacts = r.artifacts;
  man.checks = r.checks;
  man.stage_wall_ms = r.wall;
  man.all_pass = all_pass;

  json jman;
  jman["schema_version"] = man.schema_version;
  jman["code_version"] = man.code_version;
  jman["config_hash"] = man.config_hash;
  json ja = json::array();
  for (const auto& [p, h] : man.artifacts)
    ja.push_back({{"path", p}, {"fnv64", h}});
  jman["artifacts"] = ja;
  json jc = json::array();
  for (const auto& c : man.checks)
    jc.push_back({{"name", c.name}, {"pass", c.pass}});
  jman["checks"] = jc;
  json jw;
  for (const auto& [s, ms] : man.stage_wall_ms) jw[s] = ms;
  jman["stage_wall_ms"] = jw;
  jman["all_pass"] = man.all_pass;
  io::write_text_file(std::filesystem::path(cfg.out_dir) / "manifest.json",
                      jman.dump(2) + "\n");
  return man;
}

VerifyResult verify_run(const std::filesystem::path& manifest_path) {
  VerifyResult res;
  const json man = json::parse(io::read_text_file(manifest_path));
  if (!man.contains("schema_version") ||
      man.at("schema_version").get<int>() != kSchemaVersion)
    throw std::invalid_argument("verify: unsupported manifest schema version");
  const auto dir = manifest_path.parent_path();

  res.checksums_ok = true;
  for (const auto& a : man.at("artifacts")) {
    const std::string rel = a.at("path");
    const std::string want = a.at("fnv64");
    const std::string got =
        io::hex64(io::fnv1a(io::read_text_file(dir / rel)));
    if (got != want) {
      res.checksums_ok = false;
      res.messages.push_back("checksum mismatch: " + rel);
    }
  }

  const json summary = json::parse(io::read_text_file(dir / "summary.json"));
  if (summary.at("schema_version").get<int>() != kSchemaVersion)
    throw std::invalid_argument("verify: unsupported summary schema version");

  // recompute verdicts from stored details
  std::vector<std::pair<std::string, bool>> recomputed;
  for (const auto& c : summary.at("checks")) {
    const std::string name = c.at("name");
    const bool pass = evaluate_check(name, c.at("details"));
    recomputed.emplace_back(name, pass);
  }
  const auto& man_checks = man.at("checks");
  res.verdicts_match = man_checks.size() == recomputed.size();
  if (res.verdicts_match) {
    for (std::size_t i = 0; i < recomputed.size(); ++i) {
      const bool stored = man_checks[i].at("pass").get<bool>();
      const std::string name = man_checks[i].at("name");
      if (name != recomputed[i].first || stored != recomputed[i].second) {
        res.verdicts_match = false;
        res.messages.push_back("verdict mismatch: " + name);
      } else {
        res.messages.push_back(std::string(recomputed[i].second ? "pass " : "FAIL ") +
                               name);
      }
    }
  } else {
    res.messages.push_back("check list size mismatch");
  }
  return res;
}

}  // namespace matwalk
