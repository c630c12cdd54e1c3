// SPDX-License-Identifier: Apache-2.0
//
// Radial mollifier G_eps with kernel rho(t) = c_d t^2 (1-t)^2 on [0,1],
// c_d = (d+2)(d+3)(d+4) / (2 pi_d), normalized so int rho_eps = 1, plus the
// kernel-differentiated Laplacian Lap(G_eps psi) and the eps = c delta^{1/3}
// selection rule with a rate-verification harness.
//
// Quadrature: both kernels are written as divergences of radial fields, and
// node-cell averages are obtained from Gauss-Legendre flux integrals over
// the cell faces. Shared faces telescope, so the discrete mollifier mass is
// exactly 1 (up to roundoff) and the discrete Laplacian kernel has exactly
// zero total mass for interior points; near the boundary the Laplacian
// weights get an explicit zero-mass correction proportional to G_eps psi(x).

#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>

#include "invpot/field.hpp"
#include "invpot/problem.hpp"

namespace invpot::mollify {

struct ResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MollifierConfig {
  int dim = 0;
  double epsilon = 0.0;
  double c_d = 0.0;  // normalizer
  double pi_d = 0.0;  // unit-sphere surface area

  // radial profile and derivatives on [0,1] (0 outside)
  double rho(double t) const;
  double rho_prime(double t) const;
  double rho_second(double t) const;
  double rho_prime_over_t(double t) const;  // analytic at t=0
  // Q(u) = int_0^u s^{d-1} rho(s) ds, = 1/pi_d for u >= 1
  double radial_mass(double u) const;
};

// Kernel part only (epsilon left 0).
MollifierConfig make_kernel(int dim);
MollifierConfig make_config(int dim, double epsilon);

// eps = c_eps * delta^(1/3); 0 for delta = 0 (identity operator, handled by
// callers with analytic access to the clean data).
double select_epsilon(double delta, double c_eps = 1.0);

// Node weights of the convolution quadrature near one evaluation point.
struct Stencil {
  std::array<int, 3> lo{0, 0, 0}, hi{-1, -1, -1};  // inclusive node box
  std::vector<double> w;                           // lexicographic over the box
  double wsum = 0.0;

  double apply(const SampledField& field) const;
};

Stencil mollify_stencil(const MollifierConfig& cfg, const Grid& grid, std::span<const double> x);
Stencil laplacian_stencil(const MollifierConfig& cfg, const Grid& grid, std::span<const double> x);

// (G_eps psi)(x); mass-renormalized so constants are preserved exactly.
double mollify(const MollifierConfig& cfg, const SampledField& field, std::span<const double> x);

// Lap(G_eps psi)(x) by kernel differentiation with the zero-mass correction.
double mollify_laplacian(const MollifierConfig& cfg, const SampledField& field,
                         std::span<const double> x);

// Rate verification for the delta^{1/3} law on a problem's final-time data.
struct RateRow {
  double delta = 0.0;
  double epsilon = 0.0;
  double sup_error = 0.0;
  int trials = 0;
};
struct RateStudyResult {
  std::vector<RateRow> rows;
  double slope = 0.0;  // fitted log-log slope of sup_error vs delta
};

// For each delta: eps = select_epsilon(delta, c_eps), data grid with spacing
// eps/ratio, fresh noise per trial, error of Lap(G_eps phi^delta) vs the
// analytic Lap(phi) at grid-aligned interior test points (mean over trials of
// the sup over points).
RateStudyResult rate_study(const problem::Problem& prob, std::vector<double> deltas, int trials,
                           std::uint64_t seed, double c_eps = 1.0, double ratio = 40.0,
                           int test_points = 1);

void write_rate_csv(const RateStudyResult& result, std::ostream& os);

}  // namespace invpot::mollify
