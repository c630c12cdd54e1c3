// SPDX-License-Identifier: Apache-2.0
//
// Assembly of the Sobolev-regularized empirical loss
//
//   J^N_lambda = sum w^{d,0} |q R_d|^2 + sum w^{d,1} |Lap R_d|^2
//              + lambda [ sum w^{int,0} |R_int|^2 + sum w^{int,1} |dt R_int|^2 ]
//              + sum w^{tb,0} |R_tb|^2 + sum w^{tb,1} |q R_tb|^2 + sum w^{tb,2} |Lap R_tb|^2
//              + sum w^{sb,0} |R_sb|^2 + sum w^{sb,1} |dt R_sb|^2 + sum w^{sb,2} |dt^2 R_sb|^2
//
// plus the plain baseline J^s = |R_d|^2 + lambda |R_int|^2 + |R_tb|^2 + |R_sb|^2,
// Monte-Carlo quadrature weights (measure/N), and the per-stream training
// errors E_T (square roots of the lambda-unweighted terms).

#pragma once

#include <array>
#include <string>

#include "invpot/residual.hpp"

namespace invpot::loss {

struct QuadratureRule {
  Eigen::VectorXd d0, d1, int0, int1, tb0, tb1, tb2, sb0, sb1, sb2;
};

// Uniform weights measure/N for one batch; the measure comes from the batch
// kind (interior: |Omega| T, boundary: |dOmega| T, initial/data: |Omega|).
Eigen::VectorXd monte_carlo_weights(const residual::CollocationBatch& batch,
                                    const problem::Domain& domain);

struct Batches {
  residual::CollocationBatch interior, boundary, initial, data, data_lap;
};

// Rule for all streams. The Lap-of-data stream integrates over the
// eps-interior subdomain Omega_eps where the mollified Laplacian is valid,
// so its weights are |Omega_eps| / N.
QuadratureRule make_rule(const problem::Domain& domain, const Batches& batches, double eps);

struct LossBreakdown {
  // lambda-unweighted term values, in Loss1-1 order
  double d0 = 0, d1 = 0, int0 = 0, int1 = 0;
  double tb0 = 0, tb1 = 0, tb2 = 0;
  double sb0 = 0, sb1 = 0, sb2 = 0;
  double lambda = 0;
  double total = 0;  // lambda multiplies exactly the two interior terms

  std::array<double, 10> terms() const { return {d0, d1, int0, int1, tb0, tb1, tb2, sb0, sb1, sb2}; }
  // training errors E_{T,*} = sqrt(lambda-unweighted term)
  std::array<double, 10> training_errors() const;

  static std::string csv_header();
  std::string csv_row() const;
};

LossBreakdown assemble(const residual::ResidualBatch& residuals, const QuadratureRule& rule,
                       double lambda);
// Baseline loss J^s over the value-residual streams only.
double assemble_standard(const residual::ResidualBatch& residuals, const QuadratureRule& rule,
                         double lambda);

// ---- autodiff graph path ----------------------------------------------------

enum class Scheme { kSobolev, kStandard };

Scheme scheme_from_string(const std::string& s);
std::string to_string(Scheme s);

struct GraphLoss {
  net::Graph::Expr total = net::Graph::kNone;
  // all ten Loss1-1 terms (evaluated for logging under both schemes) plus
  // the unweighted data value term used by the baseline
  net::Graph::Expr d0, d1, int0, int1, tb0, tb1, tb2, sb0, sb1, sb2, d_value;

  LossBreakdown snapshot(const net::Graph& g, double lambda, Scheme scheme) const;
};

// Handles for updating the graph in place when the PDE-side collocation sets
// are resampled: jet node ids per batch, and input slots carrying the
// problem data evaluated at the current points.
struct LossBindings {
  std::vector<int> int_u, int_q, sb_u, tb_u, tb_q;
  std::vector<net::Graph::Expr> F, F_t, b, b_t, b_tt, u0, lap_u0;
};

GraphLoss emit_loss(net::Graph& g, int u_net, int q_net, const problem::Problem& prob,
                    const Batches& batches, const Eigen::VectorXd& g_phi,
                    const Eigen::VectorXd& lap_g_phi, const QuadratureRule& rule, double lambda,
                    Scheme scheme, LossBindings* bindings = nullptr);

// Re-points the interior/boundary/initial jet nodes and refreshes the
// problem-data inputs after a resample (batch sizes must be unchanged).
void rebind_pde_batches(net::Graph& g, const LossBindings& bindings, const problem::Problem& prob,
                        const Batches& batches);

}  // namespace invpot::loss
