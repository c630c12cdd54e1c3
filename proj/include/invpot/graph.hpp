// SPDX-License-Identifier: Apache-2.0
//
// A small scalar expression graph whose leaves are network jet evaluations.
// Any scalar built from jets, arithmetic and weighted square sums (i.e. the
// empirical losses) gets exact parameter gradients for every participating
// network by reverse accumulation: scalar adjoints flow back to per-point
// jet adjoints, which the net reverse pass turns into parameter gradients.
//
// The graph is built once per run (collocation sets are fixed); forward()
// re-evaluates it against the current parameters each epoch. Jet evaluation
// and the jet reverse passes run on a worker pool in fixed chunks, so
// results are bitwise independent of the worker count.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "invpot/net.hpp"

namespace invpot::net {

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Graph {
 public:
  using Expr = std::int32_t;
  static constexpr Expr kNone = -1;

  // Registers a network; `params` must outlive the graph and may be updated
  // between forward() calls.
  int add_net(const NetworkSpec& spec, const ParamSet& params);

  struct JetHandle {
    Expr value = kNone, dt = kNone, dtt = kNone, lap = kNone, dt_lap = kNone;
    int node = -1;
  };
  JetHandle add_jet(int net, std::span<const double> point, JetMode mode);

  Expr constant(double v);
  // external scalar slot whose value can be updated between forward() calls
  Expr input(double v);
  void set_input(Expr e, double v);
  // moves a jet node to a new point (same dimension); used when collocation
  // sets are resampled between epochs
  void set_jet_point(int jet_node, std::span<const double> point);
  Expr add(Expr a, Expr b);
  Expr sub(Expr a, Expr b);
  Expr mul(Expr a, Expr b);
  Expr affine(double a, Expr x, double b);  // a*x + b
  Expr scale(double a, Expr x) { return affine(a, x, 0.0); }
  // sum_i w_i * e_i^2, accumulated in index order
  Expr wsq_sum(std::span<const double> w, std::span<const Expr> e);
  Expr sum(std::span<const Expr> e);

  void forward();
  double value(Expr e) const { return values_[static_cast<std::size_t>(e)]; }

  // d(root)/d(params of net i) for every registered net. Must follow a
  // forward() with unchanged parameters.
  std::vector<ParamSet> backward(Expr root);

  std::size_t jet_count() const { return jets_.size(); }

 private:
  enum class Op : std::uint8_t { kConst, kInput, kJetField, kAdd, kSub, kMul, kAffine, kWsq, kSum };
  struct Node {
    Op op;
    std::int32_t a = kNone, b = kNone;  // operands or (offset,count) for pools
    double ca = 0.0, cb = 0.0;          // constants for kConst/kAffine
  };
  struct JetNode {
    int net;
    JetMode mode;
    std::vector<double> point;
    PointTape tape;
    // field expr ids (kNone when not requested)
    JetHandle handle;
  };
  struct NetEntry {
    const NetworkSpec* spec;
    const ParamSet* params;
    JetEvaluator evaluator;
  };

  Expr push(Node n);
  Expr jet_field(int jet_node, int field);

  std::vector<NetEntry> nets_;
  std::vector<JetNode> jets_;
  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> wpool_;
  std::vector<Expr> epool_;
  bool forwarded_ = false;
};

// Gradient of a scalar expression w.r.t. all registered parameter sets
// (runs forward + reverse).
std::vector<ParamSet> param_gradient(Graph& g, Graph::Expr scalar_root);

// Small wrapper so scalar-generic formulas read naturally over graph
// expressions.
struct GExpr {
  Graph* g = nullptr;
  Graph::Expr e = Graph::kNone;
};
inline GExpr operator+(GExpr a, GExpr b) { return {a.g, a.g->add(a.e, b.e)}; }
inline GExpr operator-(GExpr a, GExpr b) { return {a.g, a.g->sub(a.e, b.e)}; }
inline GExpr operator*(GExpr a, GExpr b) { return {a.g, a.g->mul(a.e, b.e)}; }
inline GExpr operator+(GExpr a, double c) { return {a.g, a.g->affine(1.0, a.e, c)}; }
inline GExpr operator-(GExpr a, double c) { return {a.g, a.g->affine(1.0, a.e, -c)}; }
inline GExpr operator*(double c, GExpr a) { return {a.g, a.g->affine(c, a.e, 0.0)}; }

}  // namespace invpot::net
