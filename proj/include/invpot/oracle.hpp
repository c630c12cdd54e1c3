// SPDX-License-Identifier: Apache-2.0
//
// Independent verification tools: central finite-difference derivative
// estimates and a backward-Euler finite-difference solver for the forward
// problem. These stay implementation-independent of the network/jet path
// they are used to check.

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "invpot/problem.hpp"

namespace invpot::oracle {

// Central-difference derivative of a scalar function of one variable.
// Default steps: order 1 uses cbrt(eps_mach), order 2 uses eps_mach^(1/4),
// both scaled by max(1, |x|).
double fd_derivative(const std::function<double(double)>& f, double x, int order);
double fd_derivative(const std::function<double(double)>& f, double x, int order, double step);

// Finite-difference grid for the forward solver.
struct FDGrid {
  std::vector<int> n_cells;  // cells per spatial axis (nodes = n+1)
  int n_steps = 0;           // time steps
};

// Backward Euler in time, second-order central differences in space,
// Dirichlet boundary data from the problem. Returns the space-time field;
// time index major, flattened interior+boundary nodes minor.
struct ForwardSolution {
  FDGrid grid;
  std::vector<double> spacing;  // h per axis
  double dt = 0.0;
  // u[step][node], node = lexicographic over all grid nodes (incl. boundary)
  std::vector<Eigen::VectorXd> u;

  int node_count() const;
  double max_error_vs(const std::function<double(std::span<const double>, double)>& exact,
                      const problem::Domain& domain) const;
};

ForwardSolution solve_forward(const problem::Problem& prob,
                              const std::function<double(std::span<const double>)>& q,
                              const FDGrid& grid);

}  // namespace invpot::oracle
