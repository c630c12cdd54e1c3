// SPDX-License-Identifier: Apache-2.0
//
// The four residual families of the loss, evaluated from jets:
//   interior  R_int = u_t - Lap u + q u - F       (+ d/dt variant)
//   boundary  R_sb  = u - b                        (+ d/dt, d2/dt2)
//   initial   R_tb  = u(.,0) - u0                  (+ q-weighted, Lap)
//   data      R_d   = u(.,T) - G_eps phi^delta     (+ q-weighted, Lap vs
//                     Lap G_eps phi^delta on its own collocation batch)
//
// Formulas are small templates over the scalar type so the plain evaluation
// path (tests, exact-solution oracles) and the autodiff graph path share one
// source of truth.

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>

#include "invpot/graph.hpp"
#include "invpot/problem.hpp"

namespace invpot::residual {

enum class BatchKind { kInterior, kSpatialBoundary, kInitial, kData };

struct CollocationBatch {
  BatchKind kind = BatchKind::kInterior;
  // interior / spatial_boundary rows: (x_1..x_d, t); initial / data rows: (x_1..x_d)
  Eigen::MatrixXd points;
  int count() const { return static_cast<int>(points.rows()); }
};

// ---- scalar-generic residual formulas --------------------------------------

template <class S>
struct UVals {
  S value{}, dt{}, dtt{}, lap{}, dt_lap{};
};

template <class S>
S interior_residual(const UVals<S>& u, const S& q, const S& F) {
  return u.dt - u.lap + q * u.value - F;
}
template <class S>
S interior_residual_dt(const UVals<S>& u, const S& q, const S& F_t) {
  return u.dtt - u.dt_lap + q * u.dt - F_t;
}
template <class S>
S boundary_residual(const UVals<S>& u, const S& b) {
  return u.value - b;
}
template <class S>
S boundary_residual_dt(const UVals<S>& u, const S& b_t) {
  return u.dt - b_t;
}
template <class S>
S boundary_residual_dtt(const UVals<S>& u, const S& b_tt) {
  return u.dtt - b_tt;
}
template <class S>
S initial_residual(const UVals<S>& u, const S& u0) {
  return u.value - u0;
}
template <class S>
S initial_residual_lap(const UVals<S>& u, const S& lap_u0) {
  return u.lap - lap_u0;
}
template <class S>
S data_residual(const UVals<S>& u, const S& g_phi) {
  return u.value - g_phi;
}
template <class S>
S data_residual_lap(const UVals<S>& u, const S& lap_g_phi) {
  return u.lap - lap_g_phi;
}

// ---- plain evaluation path --------------------------------------------------

// u evaluator: full jet at (x, t); q evaluator: value at x. Either can be a
// network or an analytic oracle.
using UJetFn = std::function<net::Jet(std::span<const double>, double)>;
using QFn = std::function<double(std::span<const double>)>;

UJetFn net_u_evaluator(const net::NetworkSpec& spec, const net::ParamSet& params);
QFn net_q_evaluator(const net::NetworkSpec& spec, const net::ParamSet& params);
UJetFn exact_u_evaluator(const problem::Problem& prob);
QFn exact_q_evaluator(const problem::Problem& prob);

struct InteriorResiduals {
  Eigen::VectorXd r, dt_r;
};
InteriorResiduals interior_residuals(const UJetFn& u, const QFn& q, const problem::Problem& prob,
                                     const CollocationBatch& batch);

struct BoundaryResiduals {
  Eigen::VectorXd r, dt_r, dtt_r;
};
BoundaryResiduals boundary_residuals(const UJetFn& u, const problem::Problem& prob,
                                     const CollocationBatch& batch);

struct InitialResiduals {
  Eigen::VectorXd r, q_r, lap_r;
};
InitialResiduals initial_residuals(const UJetFn& u, const QFn& q, const problem::Problem& prob,
                                   const CollocationBatch& batch);

struct DataResiduals {
  Eigen::VectorXd r, q_r;   // value residual on the data batch
  Eigen::VectorXd lap_r;    // Laplacian residual on its own batch
};
// `g_phi`: precomputed G_eps phi^delta at batch points; `lap_g_phi`:
// precomputed Lap G_eps phi^delta at lap_batch points.
DataResiduals data_residuals(const UJetFn& u, const QFn& q, const CollocationBatch& batch,
                             const Eigen::VectorXd& g_phi, const CollocationBatch& lap_batch,
                             const Eigen::VectorXd& lap_g_phi, double T);

struct ResidualBatch {
  InteriorResiduals interior;
  BoundaryResiduals boundary;
  InitialResiduals initial;
  DataResiduals data;
};

}  // namespace invpot::residual
