// SPDX-License-Identifier: Apache-2.0

#include "invpot/residual.hpp"

#include <string>

namespace invpot::residual {

namespace {

UVals<double> uvals_from_jet(const net::Jet& j) {
  return {j.value, j.dt, j.dtt, j.laplacian(), j.dt_laplacian()};
}

void require_finite(double v, const char* what, int index) {
  if (!std::isfinite(v))
    throw net::NumericError(std::string(what) + " is non-finite at point index " +
                            std::to_string(index));
}

}  // namespace

UJetFn net_u_evaluator(const net::NetworkSpec& spec, const net::ParamSet& params) {
  return [&spec, &params](std::span<const double> x, double t) {
    std::vector<double> pt(x.begin(), x.end());
    pt.push_back(t);
    return net::forward_jet(spec, params, pt);
  };
}

QFn net_q_evaluator(const net::NetworkSpec& spec, const net::ParamSet& params) {
  return [&spec, &params](std::span<const double> x) { return net::forward(spec, params, x); };
}

UJetFn exact_u_evaluator(const problem::Problem& prob) {
  return [&prob](std::span<const double> x, double t) { return prob.u_exact_jet(x, t); };
}

QFn exact_q_evaluator(const problem::Problem& prob) {
  return [&prob](std::span<const double> x) { return prob.q_exact(x); };
}

InteriorResiduals interior_residuals(const UJetFn& u, const QFn& q, const problem::Problem& prob,
                                     const CollocationBatch& batch) {
  const int n = batch.count();
  const int d = prob.domain.dim;
  InteriorResiduals out;
  out.r.resize(n);
  out.dt_r.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto row = batch.points.row(i);
    std::span<const double> x(row.data(), static_cast<std::size_t>(d));
    const double t = row[d];
    const net::Jet jet = u(x, t);
    const double qv = q(x);
    const UVals<double> uv = uvals_from_jet(jet);
    out.r[i] = interior_residual(uv, qv, prob.F(x, t));
    out.dt_r[i] = interior_residual_dt(uv, qv, prob.F_t(x, t));
    require_finite(out.r[i], "interior residual", i);
    require_finite(out.dt_r[i], "interior residual time derivative", i);
  }
  return out;
}

BoundaryResiduals boundary_residuals(const UJetFn& u, const problem::Problem& prob,
                                     const CollocationBatch& batch) {
  const int n = batch.count();
  const int d = prob.domain.dim;
  BoundaryResiduals out;
  out.r.resize(n);
  out.dt_r.resize(n);
  out.dtt_r.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto row = batch.points.row(i);
    std::span<const double> x(row.data(), static_cast<std::size_t>(d));
    const double t = row[d];
    const UVals<double> uv = uvals_from_jet(u(x, t));
    out.r[i] = boundary_residual(uv, prob.b(x, t));
    out.dt_r[i] = boundary_residual_dt(uv, prob.b_t(x, t));
    out.dtt_r[i] = boundary_residual_dtt(uv, prob.b_tt(x, t));
    require_finite(out.r[i], "boundary residual", i);
    require_finite(out.dtt_r[i], "boundary residual second derivative", i);
  }
  return out;
}

InitialResiduals initial_residuals(const UJetFn& u, const QFn& q, const problem::Problem& prob,
                                   const CollocationBatch& batch) {
  const int n = batch.count();
  const int d = prob.domain.dim;
  InitialResiduals out;
  out.r.resize(n);
  out.q_r.resize(n);
  out.lap_r.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto row = batch.points.row(i);
    std::span<const double> x(row.data(), static_cast<std::size_t>(d));
    const UVals<double> uv = uvals_from_jet(u(x, 0.0));
    out.r[i] = initial_residual(uv, prob.u0(x));
    out.q_r[i] = q(x) * out.r[i];
    out.lap_r[i] = initial_residual_lap(uv, prob.laplacian_u0(x));
    require_finite(out.r[i], "initial residual", i);
    require_finite(out.lap_r[i], "initial residual Laplacian", i);
  }
  return out;
}

DataResiduals data_residuals(const UJetFn& u, const QFn& q, const CollocationBatch& batch,
                             const Eigen::VectorXd& g_phi, const CollocationBatch& lap_batch,
                             const Eigen::VectorXd& lap_g_phi, double T) {
  const int n = batch.count();
  const int d = static_cast<int>(batch.points.cols());
  if (g_phi.size() != n || lap_g_phi.size() != lap_batch.count())
    throw net::ShapeError("mollified data length does not match batch");
  DataResiduals out;
  out.r.resize(n);
  out.q_r.resize(n);
  out.lap_r.resize(lap_batch.count());
  for (int i = 0; i < n; ++i) {
    const auto row = batch.points.row(i);
    std::span<const double> x(row.data(), static_cast<std::size_t>(d));
    const UVals<double> uv = uvals_from_jet(u(x, T));
    out.r[i] = data_residual(uv, g_phi[i]);
    out.q_r[i] = q(x) * out.r[i];
    require_finite(out.q_r[i], "data residual", i);
  }
  for (int i = 0; i < lap_batch.count(); ++i) {
    const auto row = lap_batch.points.row(i);
    std::span<const double> x(row.data(), static_cast<std::size_t>(d));
    const UVals<double> uv = uvals_from_jet(u(x, T));
    out.lap_r[i] = data_residual_lap(uv, lap_g_phi[i]);
    require_finite(out.lap_r[i], "data residual Laplacian", i);
  }
  return out;
}

}  // namespace invpot::residual
