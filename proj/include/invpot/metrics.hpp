// SPDX-License-Identifier: Apache-2.0
//
// Relative L2 reconstruction errors on a uniform test mesh:
//   Re_u = |u - u*| / |u| over Omega x [0,T], Re_q over Omega,
//   Re_lap_u for the Laplacian (via jets), plus the per-time-slice Re_u
//   series and the extra slice at t = 1/7.

#pragma once

#include "invpot/net.hpp"
#include "invpot/problem.hpp"

namespace invpot::cli {

struct MetricsReport {
  double re_q = 0.0;
  double re_u = 0.0;
  double re_lap_u = 0.0;
  std::vector<double> slice_t;
  std::vector<double> slice_re_u;

  std::string csv_row() const;  // re_q,re_u,re_lap_u
};

// mesh_per_axis = 0 picks 50 for d=2 and 20 for d=3.
MetricsReport evaluate_metrics(const problem::Problem& prob, const net::NetworkSpec& u_spec,
                               const net::ParamSet& u_params, const net::NetworkSpec& q_spec,
                               const net::ParamSet& q_params, int mesh_per_axis = 0);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(std::span<const double> xs);

}  // namespace invpot::cli
