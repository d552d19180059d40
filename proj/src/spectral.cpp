// SPDX-License-Identifier: Apache-2.0
#include "matwalk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace matwalk {

namespace {
constexpr double kPi = std::numbers::pi;
}

CircleGrid::CircleGrid(int nodes) : m(nodes) {
  if (m < 1 || m > 4096)
    throw std::invalid_argument("CircleGrid: node count out of range");
}

double CircleGrid::node(int j) const { return kPi * j / m; }

double CircleGrid::spacing() const { return kPi / m; }

CircleGrid::Location CircleGrid::locate(double theta) const {
  // reduce to [0, pi)
  theta = std::fmod(theta, kPi);
  if (theta < 0.0) theta += kPi;
  const double h = spacing();
  int j = static_cast<int>(theta / h);
  if (j >= m) j = m - 1;
  double frac = theta / h - j;
  frac = std::clamp(frac, 0.0, 1.0);
  return {j, frac};
}

double projective_angle(const Eigen::Vector2d& v) {
  double th = std::atan2(v(1), v(0));
  if (th < 0.0) th += kPi;
  if (th >= kPi) th -= kPi;
  return th;
}

ReducedOperator assemble(const MatrixLaw& law, const CircleGrid& grid,
                         double t) {
  if (law.dim() != 2)
    throw std::invalid_argument("assemble: operator grid needs d = 2");
  if (!law.is_finite_support())
    throw std::invalid_argument("assemble: finite-support laws only");
  const auto& fs = law.finite();
  const double scale = std::exp(-law.shift());

  ReducedOperator op;
  op.grid = grid;
  op.t = t;
  op.mat = Eigen::MatrixXcd::Zero(grid.m, grid.m);

  Eigen::Vector2d u, w;
  for (int j = 0; j < grid.m; ++j) {
    const double th = grid.node(j);
    u << std::cos(th), std::sin(th);
    for (std::size_t a = 0; a < fs.atoms.size(); ++a) {
      w = fs.atoms[a].matrix() * u;
      const double nrm = w.norm();
      const double rho = std::log(nrm * scale);
      const auto loc = grid.locate(projective_angle(w));
      const std::complex<double> amp =
          fs.probs[a] * std::polar(1.0, t * rho);
      op.mat(j, loc.j) += amp * (1.0 - loc.frac);
      op.mat(j, (loc.j + 1) % grid.m) += amp * loc.frac;
    }
  }

  double err = 0.0;
  for (int j = 0; j < grid.m; ++j)
    err = std::max(err, std::abs(op.mat.row(j).sum() - 1.0));
  op.row_sum_err = (t == 0.0) ? err : 0.0;
  return op;
}

namespace {

Eigen::VectorXd left_perron_vector(const Eigen::MatrixXcd& mat, bool& converged) {
  const int m = static_cast<int>(mat.rows());
  Eigen::MatrixXd p = mat.real().transpose();
  Eigen::VectorXd v = Eigen::VectorXd::Constant(m, 1.0 / m);
  converged = false;
  Eigen::VectorXd next(m);
  for (int it = 0; it < 200000; ++it) {
    next.noalias() = p * v;
    const double s = next.sum();
    if (s <= 0.0) break;
    next /= s;
    const double diff = (next - v).cwiseAbs().maxCoeff();
    v = next;
    if (diff < 1e-14) {
      converged = true;
      break;
    }
  }
  // clip tiny negative interpolation round-off
  for (int i = 0; i < m; ++i) v(i) = std::max(v(i), 0.0);
  const double s = v.sum();
  if (s > 0.0) v /= s;
  return v;
}

}  // namespace

SpectrumReport peripheral_spectrum(const ReducedOperator& op) {
  SpectrumReport rep;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(op.mat, false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("peripheral_spectrum: eigensolver failed");
  std::vector<std::complex<double>> ev(es.eigenvalues().data(),
                                       es.eigenvalues().data() +
                                           es.eigenvalues().size());
  std::sort(ev.begin(), ev.end(),
            [](const std::complex<double>& a, const std::complex<double>& b) {
              return std::abs(a) > std::abs(b);
            });
  rep.eigenvalues = std::move(ev);
  rep.lambda1_err = std::fabs(std::abs(rep.eigenvalues[0]) - 1.0);
  rep.gap = rep.eigenvalues.size() > 1
                ? 1.0 - std::abs(rep.eigenvalues[1])
                : 1.0;
  if (op.t == 0.0)
    rep.stationary = left_perron_vector(op.mat, rep.stationary_converged);
  return rep;
}

PowerBoundReport perturbed_power_bound(const ReducedOperator& op, int n_max) {
  if (n_max < 1 || n_max > 4096)
    throw std::invalid_argument("perturbed_power_bound: n_max out of range");
  PowerBoundReport rep;
  auto sup_norm = [](const Eigen::MatrixXcd& m) {
    double best = 0.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      best = std::max(best, m.row(r).cwiseAbs().sum());
    return best;
  };
  Eigen::MatrixXcd pw = op.mat;
  rep.power_norms.push_back(sup_norm(pw));
  for (int n = 2; n <= n_max; ++n) {
    pw = pw * op.mat;
    rep.power_norms.push_back(sup_norm(pw));
  }
  rep.max_power_norm =
      *std::max_element(rep.power_norms.begin(), rep.power_norms.end());
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(op.mat, false);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("perturbed_power_bound: eigensolver failed");
  rep.spectral_radius = es.eigenvalues().cwiseAbs().maxCoeff();
  return rep;
}

Eigen::VectorXd stationary_from_spectrum(const ReducedOperator& op) {
  if (op.t != 0.0)
    throw std::invalid_argument("stationary_from_spectrum: needs t = 0");
  bool converged = false;
  Eigen::VectorXd v = left_perron_vector(op.mat, converged);
  if (!converged)
    throw std::runtime_error(
        "stationary_from_spectrum: power iteration did not converge (no gap?)");
  return v;
}

double tv_distance_to_sample(const Eigen::VectorXd& grid_mass,
                             const CircleGrid& grid,
                             const EmpiricalMeasure& nu_hat) {
  if (grid_mass.size() != grid.m)
    throw std::invalid_argument("tv_distance_to_sample: size mismatch");
  if (nu_hat.size() == 0)
    throw std::invalid_argument("tv_distance_to_sample: empty sample");
  Eigen::VectorXd hist = Eigen::VectorXd::Zero(grid.m);
  Eigen::Vector2d v2;
  for (const auto& v : nu_hat.points()) {
    v2 << v(0), v(1);
    const auto loc = grid.locate(projective_angle(v2));
    // same linear interpolation the operator uses, so both vectors are the
    // identically smoothed node functional of the underlying measure
    hist(loc.j) += 1.0 - loc.frac;
    hist((loc.j + 1) % grid.m) += loc.frac;
  }
  hist /= hist.sum();
  return 0.5 * (grid_mass - hist).cwiseAbs().sum();
}

double tv_distance_to_chain(const Eigen::VectorXd& grid_mass,
                            const CircleGrid& grid, const MatrixLaw& law,
                            std::size_t burn_in, std::size_t n_steps,
                            std::uint64_t seed) {
  if (law.dim() != 2)
    throw std::invalid_argument("tv_distance_to_chain: needs d = 2");
  if (grid_mass.size() != grid.m)
    throw std::invalid_argument("tv_distance_to_chain: size mismatch");
  Eigen::VectorXd hist = Eigen::VectorXd::Zero(grid.m);
  RngStream rng = RngStream::from_seed(seed).child(stream_id::kStationary, 2);
  Eigen::Vector2d v2;
  law.with_stepper([&](auto stepper) {
    Eigen::VectorXd dir = law.default_direction();
    for (std::size_t n = 0; n < burn_in; ++n) stepper.step(rng, dir);
    for (std::size_t n = 0; n < n_steps; ++n) {
      stepper.step(rng, dir);
      v2 << dir(0), dir(1);
      const auto loc = grid.locate(projective_angle(v2));
      hist(loc.j) += 1.0 - loc.frac;
      hist((loc.j + 1) % grid.m) += loc.frac;
    }
  });
  hist /= hist.sum();
  return 0.5 * (grid_mass - hist).cwiseAbs().sum();
}

}  // namespace matwalk
