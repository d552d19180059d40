// SPDX-License-Identifier: Apache-2.0
#include "matwalk/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace matwalk {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

void svd_extremes(const Eigen::MatrixXd& m, double& smax, double& smin) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  smax = sv(0);
  smin = sv(sv.size() - 1);
}

}  // namespace

GroupElement::GroupElement(Eigen::MatrixXd m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() < 1)
    throw std::invalid_argument("GroupElement: matrix must be square");
  double smax = 0.0, smin = 0.0;
  svd_extremes(m_, smax, smin);
  if (!(smin >= kSingularFloor))
    throw SingularMatrixError("GroupElement: smallest singular value " +
                              std::to_string(smin) + " below floor");
  op_norm_ = smax;
  inv_norm_ = 1.0 / smin;
  n_value_ = std::max(op_norm_, inv_norm_);
}

GroupElement::GroupElement(Eigen::MatrixXd m, double op_norm, double inv_norm,
                           TrustedNorms)
    : m_(std::move(m)), op_norm_(op_norm), inv_norm_(inv_norm) {
  if (!(op_norm > 0.0) || !(inv_norm > 0.0) || 1.0 / inv_norm < kSingularFloor)
    throw SingularMatrixError("GroupElement: trusted norms rejected");
  n_value_ = std::max(op_norm_, inv_norm_);
}

GroupElement GroupElement::identity(int d) {
  return {Eigen::MatrixXd::Identity(d, d), 1.0, 1.0, TrustedNorms{}};
}

GroupElement GroupElement::scaled_by(double c) const {
  if (c == 0.0) throw std::invalid_argument("scaled_by: zero scalar");
  const double a = std::fabs(c);
  return {m_ * c, op_norm_ * a, inv_norm_ / a, TrustedNorms{}};
}

GroupElement GroupElement::inverse() const {
  Eigen::MatrixXd inv = m_.inverse();
  return {std::move(inv), inv_norm_, op_norm_, TrustedNorms{}};
}

ProjPoint::ProjPoint(Eigen::VectorXd v) : v_(std::move(v)) {
  const double n = v_.norm();
  if (!(n > 1e-300)) throw std::invalid_argument("ProjPoint: zero vector");
  v_ /= n;
  // canonical sign: first coordinate that is definitely nonzero decides
  for (Eigen::Index i = 0; i < v_.size(); ++i) {
    if (std::fabs(v_(i)) > 1e-14) {
      if (v_(i) < 0.0) v_ = -v_;
      break;
    }
  }
}

ProjPoint ProjPoint::axis(int d, int i) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  v(i) = 1.0;
  return ProjPoint(std::move(v));
}

double n_of(const GroupElement& g) { return g.n_value(); }

double angular_dist(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() == 2) {
    // cross-product form, exact even for nearly coincident directions
    const double cross = u(0) * v(1) - u(1) * v(0);
    return std::fabs(cross) / (u.norm() * v.norm());
  }
  const double nu = u.squaredNorm(), nv = v.squaredNorm();
  const double dot = u.dot(v);
  const double g2 = std::max(0.0, nu * nv - dot * dot);  // |u ^ v|^2 (Gram)
  return std::sqrt(g2 / (nu * nv));
}

double angular_dist(const ProjPoint& u, const ProjPoint& v) {
  return angular_dist(u.rep(), v.rep());
}

ProjPoint act(const GroupElement& g, const ProjPoint& v) {
  return ProjPoint(g.matrix() * v.rep());
}

double cocycle(const GroupElement& g, const Eigen::VectorXd& unit_rep) {
  return std::log((g.matrix() * unit_rep).norm());
}

double cocycle(const GroupElement& g, const ProjPoint& u) {
  return cocycle(g, u.rep());
}

double operator_distance(const GroupElement& g, const GroupElement& h) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g.matrix() - h.matrix());
  return svd.singularValues()(0);
}

LipschitzReport check_pointwise_lipschitz(const GroupElement& g,
                                          const GroupElement& g2,
                                          const ProjPoint& u,
                                          const ProjPoint& v, double tol) {
  LipschitzReport rep;
  const double dist = angular_dist(u, v);
  const double n_g = g.n_value();

  auto slack_ok = [&](double lhs, double rhs) {
    const double margin = rhs - lhs + tol + 1e-12 * std::fabs(rhs);
    rep.worst_margin = std::min(rep.worst_margin, rhs - lhs);
    return margin >= 0.0;
  };

  // same-sense unit representatives for the chord comparison
  Eigen::VectorXd a = u.rep(), b = v.rep();
  if (a.dot(b) < 0.0) b = -b;
  const double chordlen = (a - b).norm();
  rep.chord = slack_ok(dist, chordlen) && slack_ok(chordlen, kSqrt2 * dist);

  const double drho = std::fabs(cocycle(g, u) - cocycle(g, v));
  rep.cocycle_lipschitz = slack_ok(drho, kSqrt2 * n_g * n_g * dist);

  const double dact = angular_dist(act(g, u), act(g, v));
  rep.action_in_point = slack_ok(dact, 2.0 * kSqrt2 * n_g * n_g * dist);

  const double dmat = operator_distance(g, g2);
  const double dact2 = angular_dist(act(g, u), act(g2, u));
  rep.action_in_matrix = slack_ok(dact2, 2.0 * n_g * dmat);

  return rep;
}

}  // namespace matwalk
