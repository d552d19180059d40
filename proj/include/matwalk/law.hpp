// SPDX-License-Identifier: Apache-2.0
//
// Sampling specification for the common law of the i.i.d. matrices:
// finite-support, rotation-diagonal (d=2) and scalar (d=1) families, with a
// declared moment exponent delta0, Lyapunov recentering, a moment check and
// heuristic irreducibility/contraction advisories. Hot loops go through
// Stepper objects that apply a draw to a direction vector without forming
// cached norm data.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "matwalk/geometry.hpp"
#include "matwalk/rng.hpp"

namespace matwalk {

// One-dimensional sampling primitive used for angles, log singular values
// and scalar log-gains.
struct ScalarLaw {
  enum class Kind { Constant, TwoPoint, Uniform, Normal };
  Kind kind = Kind::Constant;
  double a = 0.0;  // Constant: value; TwoPoint: first value; Uniform: lower; Normal: mean
  double b = 0.0;  // TwoPoint: second value; Uniform: upper; Normal: sd
  double p = 0.5;  // TwoPoint: probability of `a`

  static ScalarLaw constant(double v) { return {Kind::Constant, v, 0.0, 0.5}; }
  static ScalarLaw two_point(double x, double y, double prob_x) {
    return {Kind::TwoPoint, x, y, prob_x};
  }
  static ScalarLaw uniform(double lo, double hi) {
    return {Kind::Uniform, lo, hi, 0.5};
  }
  static ScalarLaw normal(double mean, double sd) {
    return {Kind::Normal, mean, sd, 0.5};
  }

  double draw(RngStream& rng) const {
    switch (kind) {
      case Kind::Constant: return a;
      case Kind::TwoPoint: return rng.next_bernoulli(p) ? a : b;
      case Kind::Uniform: return rng.next_uniform(a, b);
      case Kind::Normal: return a + b * rng.next_normal();
    }
    return a;
  }

  [[nodiscard]] double mean() const {
    switch (kind) {
      case Kind::Constant: return a;
      case Kind::TwoPoint: return p * a + (1.0 - p) * b;
      case Kind::Uniform: return 0.5 * (a + b);
      case Kind::Normal: return a;
    }
    return a;
  }
};

struct MomentReport {
  double estimate = 0.0;  // sample mean of N(g)^delta0
  double se = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // normal-approximation 95% CI
  double max_share = 0.0;           // largest single term / total
  bool heavy_tail_flag = false;     // running max dominates the sum
  std::size_t n_samples = 0;
};

struct IrreducibilityAdvisory {
  bool applicable = false;       // finite-support laws only
  bool no_common_invariant_line = false;
  bool has_contracting_element = false;  // some atom with distinct singular values
  std::string note;
};

// Common law of the i.i.d. matrices g_i. Immutable after construction; the
// recentering shift s acts as g -> exp(-s) g, which leaves the projective
// action untouched and shifts every cocycle increment by -s.
class MatrixLaw {
 public:
  struct FiniteSupport {
    std::vector<GroupElement> atoms;
    std::vector<double> probs;
    std::vector<double> cum;  // cumulative probabilities
  };
  struct RotationDiagonal {  // d = 2: g = R(phi) * diag(e^a, e^-a)
    ScalarLaw angle;
    ScalarLaw log_sv;
  };
  struct Gl1 {  // d = 1: g = (e^x)
    ScalarLaw log_gain;
  };

  static MatrixLaw finite_support(
      const std::vector<std::pair<Eigen::MatrixXd, double>>& support,
      double delta0);
  static MatrixLaw rotation_diagonal(ScalarLaw angle, ScalarLaw log_sv,
                                     double delta0);
  static MatrixLaw gl1(ScalarLaw log_gain, double delta0);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] double delta0() const { return delta0_; }
  [[nodiscard]] double shift() const { return shift_; }
  [[nodiscard]] bool is_finite_support() const {
    return std::holds_alternative<FiniteSupport>(kind_);
  }
  [[nodiscard]] bool is_gl1() const { return std::holds_alternative<Gl1>(kind_); }
  [[nodiscard]] const FiniteSupport& finite() const {
    return std::get<FiniteSupport>(kind_);
  }

  // New law with shift_ += lambda_hat (g -> e^{-lambda_hat} g on top of any
  // existing recentering).
  [[nodiscard]] MatrixLaw recentered(double lambda_hat) const;

  // Draw a full element (recentering applied). Consumes the same stream
  // values as one Stepper::step call.
  [[nodiscard]] GroupElement sample(RngStream& rng) const;

  // Monte Carlo check of E N(g)^delta0 < infinity.
  [[nodiscard]] MomentReport moment_check(std::size_t n_samples,
                                          RngStream rng) const;

  // Deterministic bound M with |rho| <= M a.s., when the law has bounded
  // increments (finite support, or bounded scalar laws); nullopt otherwise.
  [[nodiscard]] std::optional<double> max_abs_increment() const;

  [[nodiscard]] IrreducibilityAdvisory irreducibility_advisory() const;

  // ---- hot-loop steppers ------------------------------------------------
  // A stepper draws one matrix, applies it to the unit direction `dir`
  // (renormalizing in place) and returns the cocycle increment
  // log|g dir| (recentering shift included). The direction update uses the
  // unscaled matrix so recentering never perturbs the direction stream.
  struct FiniteStepper {
    const FiniteSupport* fs;
    double shift;
    Eigen::VectorXd tmp;
    std::size_t last = 0;

    double step(RngStream& rng, Eigen::VectorXd& dir) {
      const double u = rng.next_double();
      std::size_t i = 0;
      while (i + 1 < fs->cum.size() && u >= fs->cum[i]) ++i;
      last = i;
      tmp.noalias() = fs->atoms[i].matrix() * dir;
      const double nrm = tmp.norm();
      dir = tmp / nrm;
      return std::log(nrm) - shift;
    }
    [[nodiscard]] double last_op_norm() const {
      return fs->atoms[last].op_norm() * std::exp(-shift);
    }
    [[nodiscard]] double last_inv_norm() const {
      return fs->atoms[last].inv_norm() * std::exp(shift);
    }
  };

  struct RotDiagStepper {
    ScalarLaw angle, log_sv;
    double shift;
    double last_a = 0.0;

    double step(RngStream& rng, Eigen::VectorXd& dir) {
      const double phi = angle.draw(rng);
      const double a = log_sv.draw(rng);
      last_a = a;
      const double x = std::exp(a) * dir(0);
      const double y = std::exp(-a) * dir(1);
      const double nrm = std::sqrt(x * x + y * y);
      const double c = std::cos(phi), s = std::sin(phi);
      dir(0) = (c * x - s * y) / nrm;
      dir(1) = (s * x + c * y) / nrm;
      return std::log(nrm) - shift;
    }
    [[nodiscard]] double last_op_norm() const {
      return std::exp(std::fabs(last_a) - shift);
    }
    [[nodiscard]] double last_inv_norm() const {
      return std::exp(std::fabs(last_a) + shift);
    }
  };

  struct Gl1Stepper {
    ScalarLaw log_gain;
    double shift;
    double last_x = 0.0;

    double step(RngStream& rng, Eigen::VectorXd& /*dir*/) {
      last_x = log_gain.draw(rng);
      return last_x - shift;
    }
    [[nodiscard]] double last_op_norm() const { return std::exp(last_x - shift); }
    [[nodiscard]] double last_inv_norm() const { return std::exp(shift - last_x); }
  };

  // Calls f with a concrete stepper; the lambda's loop is monomorphized.
  template <class F>
  decltype(auto) with_stepper(F&& f) const {
    if (const auto* fs = std::get_if<FiniteSupport>(&kind_)) {
      FiniteStepper st{fs, shift_, Eigen::VectorXd(dim_), 0};
      return f(st);
    }
    if (const auto* rd = std::get_if<RotationDiagonal>(&kind_)) {
      RotDiagStepper st{rd->angle, rd->log_sv, shift_, 0.0};
      return f(st);
    }
    const auto& g1 = std::get<Gl1>(kind_);
    Gl1Stepper st{g1.log_gain, shift_, 0.0};
    return f(st);
  }

  // Unit start direction used when a caller does not supply one.
  [[nodiscard]] Eigen::VectorXd default_direction() const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(dim_);
    v(0) = 1.0;
    return v;
  }

 private:
  MatrixLaw() = default;

  int dim_ = 1;
  double delta0_ = 1.0;
  double shift_ = 0.0;
  std::variant<FiniteSupport, RotationDiagonal, Gl1> kind_;
};

// How a preset obtains its recentering shift.
enum class RecenterMode { None, ExactZero, Estimate };

struct Preset {
  std::string name;
  std::string description;
  MatrixLaw law;
  RecenterMode recenter = RecenterMode::ExactZero;
  double c_delta_half = 1.0;  // frozen sandwich constant for delta = 1/2
};

const std::vector<Preset>& presets();
const Preset& preset_by_name(const std::string& name);

}  // namespace matwalk
