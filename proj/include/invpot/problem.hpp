// SPDX-License-Identifier: Apache-2.0
//
// Manufactured PDE instances for (d_t - Lap + q(x)) u = F on a box, with all
// analytically derived companions (F, F_t, boundary/initial data, final-time
// measurement and its Laplacian), the noise model, and positivity
// diagnostics for the structural assumptions of the underlying theory.

#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "invpot/field.hpp"
#include "invpot/net.hpp"

namespace invpot::problem {

struct Domain {
  int dim = 0;
  Eigen::VectorXd lo, hi;
  double T = 1.0;

  double measure() const;           // |Omega|
  double boundary_measure() const;  // |dOmega|
  double boundary_distance(std::span<const double> x) const;
  bool contains(std::span<const double> x) const;
};

using SpatialFn = std::function<double(std::span<const double>)>;
using SpaceTimeFn = std::function<double(std::span<const double>, double)>;

struct Problem {
  std::string name;
  Domain domain;
  double M = 1.0;  // admissible-set upper bound for q

  SpatialFn q_exact;
  SpaceTimeFn u_exact;
  std::function<net::Jet(std::span<const double>, double)> u_exact_jet;
  SpaceTimeFn F, F_t;
  SpatialFn u0, laplacian_u0;
  SpaceTimeFn b, b_t, b_tt;
  SpatialFn phi, laplacian_phi;
};

Problem example1();  // d=2, u=(x^2+y^2+1)e^t, q=sin(pi x)sin(pi y)
Problem example2();  // d=2 on [0,2]^2, u=t e^{x+y}, truncated-cosine bump q
Problem example3();  // d=3, u=t e^{x+y+z}, q=x+y+z
Problem by_name(const std::string& name);

// Final-time measurement on a uniform grid with per-node uniform noise
// phi^delta = phi + amp (2 rand - 1); amp = delta (absolute, the default) or
// delta * max|phi| when relative=true.
struct Measurement {
  mollify::SampledField clean;
  mollify::SampledField noisy;
  double delta = 0.0;
  std::uint64_t seed = 0;
};

Measurement add_noise(const mollify::SampledField& clean, double delta, std::uint64_t seed,
                      bool relative = false);
// Default data grids: 200 nodes/axis for d=2, 60 for d=3.
Measurement make_measurement(const Problem& prob, double delta, std::uint64_t seed,
                             int nodes_per_axis = 0, bool relative = false);

// Samples each bullet of the positivity assumptions (advisory only).
struct AssumptionBullet {
  std::string name;
  bool holds = false;
  double observed_min = 0.0;
};
struct AssumptionReport {
  std::vector<AssumptionBullet> bullets;
  bool all_hold() const;
  std::string summary() const;
};
AssumptionReport check_assumption1(const Problem& prob, int samples, std::uint64_t seed);

// max over `samples` random interior points of |u_t - Lap u + q u - F| using
// the problem's analytic jet (manufactured-consistency diagnostic).
double manufactured_residual(const Problem& prob, int samples, std::uint64_t seed);

}  // namespace invpot::problem
