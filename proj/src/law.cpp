// SPDX-License-Identifier: Apache-2.0
#include "matwalk/law.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "matwalk/stats.hpp"

namespace matwalk {

MatrixLaw MatrixLaw::finite_support(
    const std::vector<std::pair<Eigen::MatrixXd, double>>& support,
    double delta0) {
  if (support.empty())
    throw std::invalid_argument("finite_support: empty support");
  if (!(delta0 > 0.0)) throw std::invalid_argument("delta0 must be positive");
  MatrixLaw law;
  law.dim_ = static_cast<int>(support.front().first.rows());
  law.delta0_ = delta0;
  FiniteSupport fs;
  double total = 0.0;
  for (const auto& [m, p] : support) {
    if (m.rows() != law.dim_ || m.cols() != law.dim_)
      throw std::invalid_argument("finite_support: mixed dimensions");
    if (!(p >= 0.0)) throw std::invalid_argument("finite_support: negative weight");
    fs.atoms.emplace_back(m);  // throws SingularMatrixError below the floor
    fs.probs.push_back(p);
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9)
    throw std::invalid_argument("finite_support: probabilities sum to " +
                                std::to_string(total));
  double c = 0.0;
  for (double p : fs.probs) {
    c += p / total;
    fs.cum.push_back(c);
  }
  fs.cum.back() = 1.0;
  law.kind_ = std::move(fs);
  return law;
}

MatrixLaw MatrixLaw::rotation_diagonal(ScalarLaw angle, ScalarLaw log_sv,
                                       double delta0) {
  if (!(delta0 > 0.0)) throw std::invalid_argument("delta0 must be positive");
  MatrixLaw law;
  law.dim_ = 2;
  law.delta0_ = delta0;
  law.kind_ = RotationDiagonal{angle, log_sv};
  return law;
}

MatrixLaw MatrixLaw::gl1(ScalarLaw log_gain, double delta0) {
  if (!(delta0 > 0.0)) throw std::invalid_argument("delta0 must be positive");
  MatrixLaw law;
  law.dim_ = 1;
  law.delta0_ = delta0;
  law.kind_ = Gl1{log_gain};
  return law;
}

MatrixLaw MatrixLaw::recentered(double lambda_hat) const {
  MatrixLaw law = *this;
  law.shift_ += lambda_hat;
  return law;
}

GroupElement MatrixLaw::sample(RngStream& rng) const {
  const double scale = std::exp(-shift_);
  if (const auto* fs = std::get_if<FiniteSupport>(&kind_)) {
    const double u = rng.next_double();
    std::size_t i = 0;
    while (i + 1 < fs->cum.size() && u >= fs->cum[i]) ++i;
    return shift_ == 0.0 ? fs->atoms[i] : fs->atoms[i].scaled_by(scale);
  }
  if (const auto* rd = std::get_if<RotationDiagonal>(&kind_)) {
    const double phi = rd->angle.draw(rng);
    const double a = rd->log_sv.draw(rng);
    const double c = std::cos(phi), s = std::sin(phi);
    Eigen::MatrixXd m(2, 2);
    m << c * std::exp(a), -s * std::exp(-a), s * std::exp(a), c * std::exp(-a);
    m *= scale;
    return {std::move(m), std::exp(std::fabs(a)) * scale,
            std::exp(std::fabs(a)) / scale, GroupElement::TrustedNorms{}};
  }
  const auto& g1 = std::get<Gl1>(kind_);
  const double x = g1.log_gain.draw(rng);
  Eigen::MatrixXd m(1, 1);
  m(0, 0) = std::exp(x) * scale;
  return {std::move(m), std::exp(x) * scale, std::exp(-x) / scale,
          GroupElement::TrustedNorms{}};
}

MomentReport MatrixLaw::moment_check(std::size_t n_samples,
                                     RngStream rng) const {
  if (n_samples < 1000)
    throw std::invalid_argument("moment_check: need >= 1000 samples");
  stats::Accumulator acc;
  double max_term = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    const GroupElement g = sample(rng);
    const double t = std::pow(g.n_value(), delta0_);
    acc.add(t);
    max_term = std::max(max_term, t);
    total += t;
  }
  MomentReport rep;
  rep.n_samples = n_samples;
  rep.estimate = acc.mean;
  rep.se = acc.se();
  rep.ci_lo = rep.estimate - 1.96 * rep.se;
  rep.ci_hi = rep.estimate + 1.96 * rep.se;
  rep.max_share = total > 0.0 ? max_term / total : 0.0;
  rep.heavy_tail_flag = rep.max_share > 0.2;
  return rep;
}

namespace {

// range of a bounded scalar law, or nullopt
std::optional<std::pair<double, double>> scalar_range(const ScalarLaw& s) {
  switch (s.kind) {
    case ScalarLaw::Kind::Constant: return std::make_pair(s.a, s.a);
    case ScalarLaw::Kind::TwoPoint:
      return std::make_pair(std::min(s.a, s.b), std::max(s.a, s.b));
    case ScalarLaw::Kind::Uniform: return std::make_pair(s.a, s.b);
    case ScalarLaw::Kind::Normal:
      if (s.b == 0.0) return std::make_pair(s.a, s.a);
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

std::optional<double> MatrixLaw::max_abs_increment() const {
  if (const auto* fs = std::get_if<FiniteSupport>(&kind_)) {
    double m = 0.0;
    for (const auto& g : fs->atoms) {
      m = std::max(m, std::max(std::log(g.op_norm()) - shift_,
                               std::log(g.inv_norm()) + shift_));
    }
    return m;
  }
  if (const auto* rd = std::get_if<RotationDiagonal>(&kind_)) {
    const auto r = scalar_range(rd->log_sv);
    if (!r) return std::nullopt;
    const double amax = std::max(std::fabs(r->first), std::fabs(r->second));
    return amax + std::fabs(shift_);
  }
  const auto& g1 = std::get<Gl1>(kind_);
  const auto r = scalar_range(g1.log_gain);
  if (!r) return std::nullopt;
  return std::max(std::fabs(r->first - shift_), std::fabs(r->second - shift_));
}

namespace {

// Is the direction of v invariant (up to sign) under every atom?
bool common_invariant_line(const std::vector<GroupElement>& atoms,
                           const Eigen::VectorXd& v) {
  const ProjPoint p{v};
  for (const auto& g : atoms) {
    if (angular_dist(p, act(g, p)) > 1e-9) return false;
  }
  return true;
}

}  // namespace

IrreducibilityAdvisory MatrixLaw::irreducibility_advisory() const {
  IrreducibilityAdvisory adv;
  const auto* fs = std::get_if<FiniteSupport>(&kind_);
  if (fs == nullptr) {
    adv.note = "advisory only implemented for finite-support laws";
    return adv;
  }
  adv.applicable = true;

  for (const auto& g : fs->atoms) {
    if (g.op_norm() * g.inv_norm() > 1.0 + 1e-9) {
      adv.has_contracting_element = true;
      break;
    }
  }

  // candidate invariant lines: real eigendirections of each atom
  adv.no_common_invariant_line = true;
  for (const auto& g : fs->atoms) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(g.matrix());
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      if (std::fabs(es.eigenvalues()(k).imag()) > 1e-12) continue;
      Eigen::VectorXd v = es.eigenvectors().col(k).real();
      if (v.norm() < 1e-12) continue;
      if (common_invariant_line(fs->atoms, v)) {
        adv.no_common_invariant_line = false;
        adv.note = "a common invariant line exists";
        return adv;
      }
    }
  }
  return adv;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> table = [] {
    std::vector<Preset> v;

    v.push_back({"SRW1",
                 "d=1, log-gain +1/-1 with equal weight; centered lattice walk",
                 MatrixLaw::gl1(ScalarLaw::two_point(1.0, -1.0, 0.5), 1.0),
                 RecenterMode::ExactZero, 1.0});

    v.push_back({"LOGN1",
                 "d=1, log-gain standard normal; centered walk, heavy weight tail",
                 MatrixLaw::gl1(ScalarLaw::normal(0.0, 1.0), 8.0 / 3.0),
                 RecenterMode::ExactZero, 1.5});

    v.push_back(
        {"DIAGROT2",
         "d=2, uniform rotation times diag(e^a, e^-a), a ~ N(0, 0.5); "
         "drifting, needs an estimated recentering shift",
         MatrixLaw::rotation_diagonal(
             ScalarLaw::uniform(0.0, std::numbers::pi),
             ScalarLaw::normal(0.0, 0.5), 2.0),
         RecenterMode::Estimate, 1.5});

    {
      Eigen::MatrixXd r(2, 2), d(2, 2);
      const double th = 1.0;
      r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
      d << 1.5, 0, 0, 1.0 / 1.5;
      v.push_back({"FIN2",
                   "d=2, rotation by 1 rad or diag(3/2, 2/3) with equal "
                   "weight; contracting, bounded increments after recentering",
                   MatrixLaw::finite_support({{r, 0.5}, {d, 0.5}}, 2.0),
                   RecenterMode::Estimate, 1.0});
    }

    {
      Eigen::MatrixXd d(2, 2);
      d << 2, 0, 0, 0.5;
      v.push_back({"DIAG1",
                   "d=2, the single matrix diag(2, 1/2); deterministic "
                   "projective contraction control",
                   MatrixLaw::finite_support({{d, 1.0}}, 2.0),
                   RecenterMode::Estimate, 1.0});
    }

    v.push_back({"ROT1",
                 "d=2, rotation-only isometric control; no contraction",
                 MatrixLaw::rotation_diagonal(
                     ScalarLaw::uniform(0.0, std::numbers::pi),
                     ScalarLaw::constant(0.0), 1.0),
                 RecenterMode::ExactZero, 1.0});

    return v;
  }();
  return table;
}

const Preset& preset_by_name(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown preset: " + name);
}

}  // namespace matwalk
