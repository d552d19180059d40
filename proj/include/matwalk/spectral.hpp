// SPDX-License-Identifier: Apache-2.0
//
// Discretization of the reduced transfer operator on P(R^2), identified
// with [0, pi) with a wrap-around. Linear periodic interpolation keeps the
// t = 0 operator exactly row-stochastic, so the Perron eigenvalue 1, the
// spectral gap, the stationary grid measure and the spectral radius of the
// phase-twisted operator can all be read off a dense eigensolve.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "matwalk/ergodic.hpp"
#include "matwalk/law.hpp"

namespace matwalk {

struct CircleGrid {
  int m = 0;  // nodes theta_j = j*pi/m, j = 0..m-1

  explicit CircleGrid(int nodes);
  [[nodiscard]] double node(int j) const;
  [[nodiscard]] double spacing() const;
  // interpolation weights of an angle: node index j and fraction w toward
  // node (j+1) mod m; both weights nonnegative, summing to one
  struct Location {
    int j = 0;
    double frac = 0.0;
  };
  [[nodiscard]] Location locate(double theta) const;
};

// angle in [0, pi) of a nonzero 2-vector's direction
double projective_angle(const Eigen::Vector2d& v);

struct ReducedOperator {
  CircleGrid grid{1};
  double t = 0.0;
  Eigen::MatrixXcd mat;
  double row_sum_err = 0.0;  // max |row sum - 1| at t = 0
};

// Discretized twisted operator for a finite-support law on GL(2).
ReducedOperator assemble(const MatrixLaw& law, const CircleGrid& grid, double t);

struct SpectrumReport {
  std::vector<std::complex<double>> eigenvalues;  // sorted by modulus, desc
  double lambda1_err = 0.0;                       // | |lambda_1| - 1 |
  double gap = 0.0;                               // 1 - |lambda_2|
  Eigen::VectorXd stationary;                     // leading left eigenvector"s mass
  bool stationary_converged = false;
};
// Dense eigensolve; t = 0 expected (Perron structure asserted there).
SpectrumReport peripheral_spectrum(const ReducedOperator& op);

struct PowerBoundReport {
  std::vector<double> power_norms;  // sup-operator norm of mat^n, n = 1..n_max
  double max_power_norm = 0.0;
  double spectral_radius = 0.0;
};
PowerBoundReport perturbed_power_bound(const ReducedOperator& op, int n_max);

// Normalized leading left eigenvector at t = 0 (power iteration on the
// transpose; requires a spectral gap to converge).
Eigen::VectorXd stationary_from_spectrum(const ReducedOperator& op);

// Total-variation distance between a grid mass vector and the
// interpolation-weighted histogram of an empirical measure on P(R^2).
double tv_distance_to_sample(const Eigen::VectorXd& grid_mass,
                             const CircleGrid& grid,
                             const EmpiricalMeasure& nu_hat);

// Streaming variant: runs a fresh direction chain of n_steps after burn_in
// and accumulates the histogram without storing the samples.
double tv_distance_to_chain(const Eigen::VectorXd& grid_mass,
                            const CircleGrid& grid, const MatrixLaw& law,
                            std::size_t burn_in, std::size_t n_steps,
                            std::uint64_t seed);

}  // namespace matwalk
