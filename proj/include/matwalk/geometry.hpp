// SPDX-License-Identifier: Apache-2.0
//
// Exact small-d linear algebra for the projective action of invertible
// matrices: operator norms from singular values, canonical direction
// representatives, the angular metric d(u,v) = |sin(angle)|, the norm
// cocycle, and the four pointwise Lipschitz bounds used by the
// Hoelder-space machinery.
#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace matwalk {

class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(const std::string& what)
      : std::runtime_error(what) {}
};

// Invertible d x d real matrix with cached operator norms. Immutable.
class GroupElement {
 public:
  // Smallest singular value accepted; below this the matrix is rejected.
  static constexpr double kSingularFloor = 1e-10;

  explicit GroupElement(Eigen::MatrixXd m);

  // Construct with known norms, skipping the SVD. Callers must guarantee
  // op_norm = sigma_max(m) and inv_norm = 1/sigma_min(m).
  struct TrustedNorms {};
  GroupElement(Eigen::MatrixXd m, double op_norm, double inv_norm, TrustedNorms);

  static GroupElement identity(int d);

  [[nodiscard]] const Eigen::MatrixXd& matrix() const { return m_; }
  [[nodiscard]] int dim() const { return static_cast<int>(m_.rows()); }
  [[nodiscard]] double op_norm() const { return op_norm_; }
  [[nodiscard]] double inv_norm() const { return inv_norm_; }
  // N(g) = max(|g|, |g^-1|); always >= 1
  [[nodiscard]] double n_value() const { return n_value_; }

  // c*g for c != 0; norms rescale without a new SVD
  [[nodiscard]] GroupElement scaled_by(double c) const;
  [[nodiscard]] GroupElement inverse() const;

 private:
  Eigen::MatrixXd m_;
  double op_norm_ = 0.0;
  double inv_norm_ = 0.0;
  double n_value_ = 0.0;
};

// Direction in P(R^d), stored as the unit representative whose first
// nonzero coordinate is positive.
class ProjPoint {
 public:
  explicit ProjPoint(Eigen::VectorXd v);

  [[nodiscard]] const Eigen::VectorXd& rep() const { return v_; }
  [[nodiscard]] int dim() const { return static_cast<int>(v_.size()); }

  static ProjPoint axis(int d, int i);

 private:
  Eigen::VectorXd v_;
};

// N(g) computed from singular values.
double n_of(const GroupElement& g);

// Angular distance between directions: |u ^ v| / (|u| |v|), in [0, 1].
// Representatives may be any nonzero vectors.
double angular_dist(const Eigen::VectorXd& u, const Eigen::VectorXd& v);
double angular_dist(const ProjPoint& u, const ProjPoint& v);

// Projective action g . v
ProjPoint act(const GroupElement& g, const ProjPoint& v);

// Norm cocycle log(|g u| / |u|).
double cocycle(const GroupElement& g, const ProjPoint& u);
double cocycle(const GroupElement& g, const Eigen::VectorXd& unit_rep);

// Operator-norm distance sigma_max(g - g').
double operator_distance(const GroupElement& g, const GroupElement& h);

// The four pointwise Lipschitz inequalities (checked with tolerance tol):
//   chord:             d(u,v) <= |u-v| <= sqrt(2) d(u,v)   (same-sense unit reps)
//   cocycle_lipschitz: |rho(g,u)-rho(g,v)| <= sqrt(2) N(g)^2 d(u,v)
//   action_in_point:   d(g.u, g.v) <= 2 sqrt(2) N(g)^2 d(u,v)
//   action_in_matrix:  d(g.u, g'.u) <= 2 N(g) |g-g'|
struct LipschitzReport {
  bool chord = false;
  bool cocycle_lipschitz = false;
  bool action_in_point = false;
  bool action_in_matrix = false;
  double worst_margin = 0.0;  // most negative slack seen (RHS - LHS)
  [[nodiscard]] bool all() const {
    return chord && cocycle_lipschitz && action_in_point && action_in_matrix;
  }
};

LipschitzReport check_pointwise_lipschitz(const GroupElement& g,
                                          const GroupElement& g2,
                                          const ProjPoint& u,
                                          const ProjPoint& v,
                                          double tol = 1e-9);

}  // namespace matwalk
