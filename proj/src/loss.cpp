// SPDX-License-Identifier: Apache-2.0

#include "invpot/loss.hpp"

#include <cmath>
#include <sstream>

#include "invpot/util.hpp"

namespace invpot::loss {

Eigen::VectorXd monte_carlo_weights(const residual::CollocationBatch& batch,
                                    const problem::Domain& domain) {
  const int n = batch.count();
  if (n == 0) throw std::invalid_argument("empty collocation batch");
  double measure = 0.0;
  switch (batch.kind) {
    case residual::BatchKind::kInterior: measure = domain.measure() * domain.T; break;
    case residual::BatchKind::kSpatialBoundary: measure = domain.boundary_measure() * domain.T; break;
    case residual::BatchKind::kInitial:
    case residual::BatchKind::kData: measure = domain.measure(); break;
  }
  return Eigen::VectorXd::Constant(n, measure / n);
}

QuadratureRule make_rule(const problem::Domain& domain, const Batches& batches, double eps) {
  QuadratureRule rule;
  rule.int0 = monte_carlo_weights(batches.interior, domain);
  rule.int1 = rule.int0;
  rule.sb0 = monte_carlo_weights(batches.boundary, domain);
  rule.sb1 = rule.sb0;
  rule.sb2 = rule.sb0;
  rule.tb0 = monte_carlo_weights(batches.initial, domain);
  rule.tb1 = rule.tb0;
  rule.tb2 = rule.tb0;
  rule.d0 = monte_carlo_weights(batches.data, domain);
  double inner = 1.0;
  for (int a = 0; a < domain.dim; ++a)
    inner *= std::max(0.0, domain.hi[a] - domain.lo[a] - 2.0 * eps);
  const int n1 = batches.data_lap.count();
  if (n1 == 0) throw std::invalid_argument("empty data_lap batch");
  rule.d1 = Eigen::VectorXd::Constant(n1, inner / n1);
  return rule;
}

namespace {

double wsq(const Eigen::VectorXd& w, const Eigen::VectorXd& r) {
  if (w.size() != r.size()) throw net::ShapeError("weights do not match residual stream");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) acc += w[i] * r[i] * r[i];
  return acc;
}

}  // namespace

std::array<double, 10> LossBreakdown::training_errors() const {
  std::array<double, 10> e{};
  const auto t = terms();
  for (std::size_t i = 0; i < 10; ++i) e[i] = std::sqrt(t[i]);
  return e;
}

std::string LossBreakdown::csv_header() {
  return "term_d0,term_d1,term_int0,term_int1,term_tb0,term_tb1,term_tb2,"
         "term_sb0,term_sb1,term_sb2,lambda,total,"
         "E_d0,E_d1,E_int0,E_int1,E_tb0,E_tb1,E_tb2,E_sb0,E_sb1,E_sb2";
}

std::string LossBreakdown::csv_row() const {
  std::ostringstream os;
  for (double v : terms()) os << util::format_double(v) << ",";
  os << util::format_double(lambda) << "," << util::format_double(total);
  for (double v : training_errors()) os << "," << util::format_double(v);
  return os.str();
}

LossBreakdown assemble(const residual::ResidualBatch& r, const QuadratureRule& rule,
                       double lambda) {
  LossBreakdown b;
  b.lambda = lambda;
  b.d0 = wsq(rule.d0, r.data.q_r);
  b.d1 = wsq(rule.d1, r.data.lap_r);
  b.int0 = wsq(rule.int0, r.interior.r);
  b.int1 = wsq(rule.int1, r.interior.dt_r);
  b.tb0 = wsq(rule.tb0, r.initial.r);
  b.tb1 = wsq(rule.tb1, r.initial.q_r);
  b.tb2 = wsq(rule.tb2, r.initial.lap_r);
  b.sb0 = wsq(rule.sb0, r.boundary.r);
  b.sb1 = wsq(rule.sb1, r.boundary.dt_r);
  b.sb2 = wsq(rule.sb2, r.boundary.dtt_r);
  b.total = b.d0 + b.d1 + lambda * (b.int0 + b.int1) + b.tb0 + b.tb1 + b.tb2 + b.sb0 + b.sb1 + b.sb2;
  return b;
}

double assemble_standard(const residual::ResidualBatch& r, const QuadratureRule& rule,
                         double lambda) {
  return wsq(rule.d0, r.data.r) + lambda * wsq(rule.int0, r.interior.r) +
         wsq(rule.tb0, r.initial.r) + wsq(rule.sb0, r.boundary.r);
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "sobolev") return Scheme::kSobolev;
  if (s == "standard") return Scheme::kStandard;
  throw std::invalid_argument("unknown loss scheme: " + s);
}

std::string to_string(Scheme s) { return s == Scheme::kSobolev ? "sobolev" : "standard"; }

namespace {

using net::GExpr;
using EList = std::vector<net::Graph::Expr>;

residual::UVals<GExpr> uvals(net::Graph& g, const net::Graph::JetHandle& h) {
  residual::UVals<GExpr> u;
  u.value = {&g, h.value};
  if (h.dt != net::Graph::kNone) u.dt = {&g, h.dt};
  if (h.dtt != net::Graph::kNone) u.dtt = {&g, h.dtt};
  if (h.lap != net::Graph::kNone) u.lap = {&g, h.lap};
  if (h.dt_lap != net::Graph::kNone) u.dt_lap = {&g, h.dt_lap};
  return u;
}

}  // namespace

GraphLoss emit_loss(net::Graph& g, int u_net, int q_net, const problem::Problem& prob,
                    const Batches& batches, const Eigen::VectorXd& g_phi,
                    const Eigen::VectorXd& lap_g_phi, const QuadratureRule& rule, double lambda,
                    Scheme scheme, LossBindings* bindings) {
  const int d = prob.domain.dim;
  GraphLoss out;
  LossBindings local;
  LossBindings& bind = bindings ? *bindings : local;

  auto in = [&g](double v) { return g.input(v); };

  EList r_int, rt_int;
  for (int i = 0; i < batches.interior.count(); ++i) {
    const auto row = batches.interior.points.row(i);
    std::span<const double> xt(row.data(), static_cast<std::size_t>(d + 1));
    std::span<const double> x(row.data(), static_cast<std::size_t>(d));
    const auto hu = g.add_jet(u_net, xt, net::JetMode::kFull);
    const auto hq = g.add_jet(q_net, x, net::JetMode::kValueOnly);
    bind.int_u.push_back(hu.node);
    bind.int_q.push_back(hq.node);
    const auto uv = uvals(g, hu);
    const GExpr q{&g, hq.value};
    const double t = row[d];
    bind.F.push_back(in(prob.F(x, t)));
    bind.F_t.push_back(in(prob.F_t(x, t)));
    r_int.push_back(residual::interior_residual(uv, q, GExpr{&g, bind.F.back()}).e);
    rt_int.push_back(residual::interior_residual_dt(uv, q, GExpr{&g, bind.F_t.back()}).e);
  }

  EList r_sb, rt_sb, rtt_sb;
  for (int i = 0; i < batches.boundary.count(); ++i) {
    const auto row = batches.boundary.points.row(i);
    std::span<const double> xt(row.data(), static_cast<std::size_t>(d + 1));
    std::span<const double> x(row.data(), static_cast<std::size_t>(d));
    const auto hu = g.add_jet(u_net, xt, net::JetMode::kTimeOnly);
    bind.sb_u.push_back(hu.node);
    const auto uv = uvals(g, hu);
    const double t = row[d];
    bind.b.push_back(in(prob.b(x, t)));
    bind.b_t.push_back(in(prob.b_t(x, t)));
    bind.b_tt.push_back(in(prob.b_tt(x, t)));
    r_sb.push_back(residual::boundary_residual(uv, GExpr{&g, bind.b.back()}).e);
    rt_sb.push_back(residual::boundary_residual_dt(uv, GExpr{&g, bind.b_t.back()}).e);
    rtt_sb.push_back(residual::boundary_residual_dtt(uv, GExpr{&g, bind.b_tt.back()}).e);
  }

  EList r_tb, qr_tb, lap_tb;
  std::vector<double> pt(static_cast<std::size_t>(d + 1));
  for (int i = 0; i < batches.initial.count(); ++i) {
    const auto row = batches.initial.points.row(i);
    for (int a = 0; a < d; ++a) pt[static_cast<std::size_t>(a)] = row[a];
    pt[static_cast<std::size_t>(d)] = 0.0;
    std::span<const double> x(row.data(), static_cast<std::size_t>(d));
    const auto hu = g.add_jet(u_net, pt, net::JetMode::kSpatialOnly);
    const auto hq = g.add_jet(q_net, x, net::JetMode::kValueOnly);
    bind.tb_u.push_back(hu.node);
    bind.tb_q.push_back(hq.node);
    const auto uv = uvals(g, hu);
    const GExpr q{&g, hq.value};
    bind.u0.push_back(in(prob.u0(x)));
    bind.lap_u0.push_back(in(prob.laplacian_u0(x)));
    const GExpr r = residual::initial_residual(uv, GExpr{&g, bind.u0.back()});
    r_tb.push_back(r.e);
    qr_tb.push_back((q * r).e);
    lap_tb.push_back(residual::initial_residual_lap(uv, GExpr{&g, bind.lap_u0.back()}).e);
  }

  EList r_d, qr_d, lap_d;
  for (int i = 0; i < batches.data.count(); ++i) {
    const auto row = batches.data.points.row(i);
    for (int a = 0; a < d; ++a) pt[static_cast<std::size_t>(a)] = row[a];
    pt[static_cast<std::size_t>(d)] = prob.domain.T;
    std::span<const double> x(row.data(), static_cast<std::size_t>(d));
    const auto hu = g.add_jet(u_net, pt, net::JetMode::kValueOnly);
    const auto hq = g.add_jet(q_net, x, net::JetMode::kValueOnly);
    const GExpr uval{&g, hu.value};
    const GExpr q{&g, hq.value};
    const GExpr r = uval - g_phi[i];
    r_d.push_back(r.e);
    qr_d.push_back((q * r).e);
  }
  for (int i = 0; i < batches.data_lap.count(); ++i) {
    const auto row = batches.data_lap.points.row(i);
    for (int a = 0; a < d; ++a) pt[static_cast<std::size_t>(a)] = row[a];
    pt[static_cast<std::size_t>(d)] = prob.domain.T;
    const auto hu = g.add_jet(u_net, pt, net::JetMode::kSpatialOnly);
    lap_d.push_back(g.affine(1.0, hu.lap, -lap_g_phi[i]));
  }

  auto vw = [](const Eigen::VectorXd& v) {
    return std::span<const double>(v.data(), static_cast<std::size_t>(v.size()));
  };
  out.d0 = g.wsq_sum(vw(rule.d0), qr_d);
  out.d1 = g.wsq_sum(vw(rule.d1), lap_d);
  out.int0 = g.wsq_sum(vw(rule.int0), r_int);
  out.int1 = g.wsq_sum(vw(rule.int1), rt_int);
  out.tb0 = g.wsq_sum(vw(rule.tb0), r_tb);
  out.tb1 = g.wsq_sum(vw(rule.tb1), qr_tb);
  out.tb2 = g.wsq_sum(vw(rule.tb2), lap_tb);
  out.sb0 = g.wsq_sum(vw(rule.sb0), r_sb);
  out.sb1 = g.wsq_sum(vw(rule.sb1), rt_sb);
  out.sb2 = g.wsq_sum(vw(rule.sb2), rtt_sb);
  out.d_value = g.wsq_sum(vw(rule.d0), r_d);

  if (scheme == Scheme::kSobolev) {
    const EList plain = {out.d0, out.d1, out.tb0, out.tb1, out.tb2, out.sb0, out.sb1, out.sb2};
    const auto fixed = g.sum(plain);
    out.total = g.add(fixed, g.affine(lambda, g.add(out.int0, out.int1), 0.0));
  } else {
    const EList plain = {out.d_value, out.tb0, out.sb0};
    out.total = g.add(g.sum(plain), g.affine(lambda, out.int0, 0.0));
  }
  return out;
}

void rebind_pde_batches(net::Graph& g, const LossBindings& bind, const problem::Problem& prob,
                        const Batches& batches) {
  const int d = prob.domain.dim;
  std::vector<double> pt(static_cast<std::size_t>(d + 1));
  for (int i = 0; i < batches.interior.count(); ++i) {
    const auto row = batches.interior.points.row(i);
    std::span<const double> xt(row.data(), static_cast<std::size_t>(d + 1));
    std::span<const double> x(row.data(), static_cast<std::size_t>(d));
    const double t = row[d];
    g.set_jet_point(bind.int_u[static_cast<std::size_t>(i)], xt);
    g.set_jet_point(bind.int_q[static_cast<std::size_t>(i)], x);
    g.set_input(bind.F[static_cast<std::size_t>(i)], prob.F(x, t));
    g.set_input(bind.F_t[static_cast<std::size_t>(i)], prob.F_t(x, t));
  }
  for (int i = 0; i < batches.boundary.count(); ++i) {
    const auto row = batches.boundary.points.row(i);
    std::span<const double> xt(row.data(), static_cast<std::size_t>(d + 1));
    std::span<const double> x(row.data(), static_cast<std::size_t>(d));
    const double t = row[d];
    g.set_jet_point(bind.sb_u[static_cast<std::size_t>(i)], xt);
    g.set_input(bind.b[static_cast<std::size_t>(i)], prob.b(x, t));
    g.set_input(bind.b_t[static_cast<std::size_t>(i)], prob.b_t(x, t));
    g.set_input(bind.b_tt[static_cast<std::size_t>(i)], prob.b_tt(x, t));
  }
  for (int i = 0; i < batches.initial.count(); ++i) {
    const auto row = batches.initial.points.row(i);
    for (int a = 0; a < d; ++a) pt[static_cast<std::size_t>(a)] = row[a];
    pt[static_cast<std::size_t>(d)] = 0.0;
    std::span<const double> x(row.data(), static_cast<std::size_t>(d));
    g.set_jet_point(bind.tb_u[static_cast<std::size_t>(i)], pt);
    g.set_jet_point(bind.tb_q[static_cast<std::size_t>(i)], x);
    g.set_input(bind.u0[static_cast<std::size_t>(i)], prob.u0(x));
    g.set_input(bind.lap_u0[static_cast<std::size_t>(i)], prob.laplacian_u0(x));
  }
}

LossBreakdown GraphLoss::snapshot(const net::Graph& g, double lambda, Scheme scheme) const {
  LossBreakdown b;
  b.lambda = lambda;
  b.d0 = g.value(d0);
  b.d1 = g.value(d1);
  b.int0 = g.value(int0);
  b.int1 = g.value(int1);
  b.tb0 = g.value(tb0);
  b.tb1 = g.value(tb1);
  b.tb2 = g.value(tb2);
  b.sb0 = g.value(sb0);
  b.sb1 = g.value(sb1);
  b.sb2 = g.value(sb2);
  b.total = g.value(total);
  (void)scheme;
  return b;
}

}  // namespace invpot::loss
