// SPDX-License-Identifier: Apache-2.0

#include "invpot/graph.hpp"

#include <cmath>
#include <string>

#include "invpot/util.hpp"

namespace invpot::net {

namespace {
constexpr int kFieldValue = 0;
constexpr int kFieldDt = 1;
constexpr int kFieldDtt = 2;
constexpr int kFieldLap = 3;
constexpr int kFieldDtLap = 4;
constexpr std::size_t kJetChunk = 64;
}  // namespace

int Graph::add_net(const NetworkSpec& spec, const ParamSet& params) {
  nets_.push_back(NetEntry{&spec, &params, JetEvaluator(spec, params)});
  return static_cast<int>(nets_.size()) - 1;
}

Graph::Expr Graph::push(Node n) {
  nodes_.push_back(n);
  values_.push_back(0.0);
  forwarded_ = false;
  return static_cast<Expr>(nodes_.size()) - 1;
}

Graph::Expr Graph::jet_field(int jet_node, int field) {
  Node n{Op::kJetField};
  n.a = jet_node;
  n.b = field;
  return push(n);
}

Graph::JetHandle Graph::add_jet(int net, std::span<const double> point, JetMode mode) {
  JetNode jn;
  jn.net = net;
  jn.mode = mode;
  jn.point.assign(point.begin(), point.end());
  jets_.push_back(std::move(jn));
  const int idx = static_cast<int>(jets_.size()) - 1;

  JetHandle h;
  h.node = idx;
  h.value = jet_field(idx, kFieldValue);
  if (mode == JetMode::kTimeOnly || mode == JetMode::kFull) {
    h.dt = jet_field(idx, kFieldDt);
    h.dtt = jet_field(idx, kFieldDtt);
  }
  if (mode == JetMode::kSpatialOnly || mode == JetMode::kFull) h.lap = jet_field(idx, kFieldLap);
  if (mode == JetMode::kFull) h.dt_lap = jet_field(idx, kFieldDtLap);
  jets_[static_cast<std::size_t>(idx)].handle = h;
  return h;
}

Graph::Expr Graph::constant(double v) {
  Node n{Op::kConst};
  n.ca = v;
  return push(n);
}

Graph::Expr Graph::input(double v) {
  Node n{Op::kInput};
  n.ca = v;
  return push(n);
}

void Graph::set_input(Expr e, double v) {
  Node& n = nodes_[static_cast<std::size_t>(e)];
  if (n.op != Op::kInput) throw ShapeError("set_input on a non-input node");
  n.ca = v;
}

void Graph::set_jet_point(int jet_node, std::span<const double> point) {
  auto& jn = jets_[static_cast<std::size_t>(jet_node)];
  if (jn.point.size() != point.size()) throw ShapeError("jet point dimension changed");
  jn.point.assign(point.begin(), point.end());
}

Graph::Expr Graph::add(Expr a, Expr b) {
  Node n{Op::kAdd};
  n.a = a;
  n.b = b;
  return push(n);
}

Graph::Expr Graph::sub(Expr a, Expr b) {
  Node n{Op::kSub};
  n.a = a;
  n.b = b;
  return push(n);
}

Graph::Expr Graph::mul(Expr a, Expr b) {
  Node n{Op::kMul};
  n.a = a;
  n.b = b;
  return push(n);
}

Graph::Expr Graph::affine(double a, Expr x, double b) {
  Node n{Op::kAffine};
  n.a = x;
  n.ca = a;
  n.cb = b;
  return push(n);
}

Graph::Expr Graph::wsq_sum(std::span<const double> w, std::span<const Expr> e) {
  if (w.size() != e.size()) throw ShapeError("wsq_sum: weight/expr length mismatch");
  Node n{Op::kWsq};
  n.a = static_cast<Expr>(epool_.size());
  n.b = static_cast<Expr>(e.size());
  epool_.insert(epool_.end(), e.begin(), e.end());
  wpool_.insert(wpool_.end(), w.begin(), w.end());
  if (wpool_.size() != epool_.size()) throw ShapeError("wsq_sum pools out of sync");
  return push(n);
}

Graph::Expr Graph::sum(std::span<const Expr> e) {
  Node n{Op::kSum};
  n.a = static_cast<Expr>(epool_.size());
  n.b = static_cast<Expr>(e.size());
  epool_.insert(epool_.end(), e.begin(), e.end());
  wpool_.insert(wpool_.end(), e.size(), 1.0);
  return push(n);
}

void Graph::forward() {
  util::parallel_for_chunks(jets_.size(), kJetChunk,
                            [this](std::size_t, std::size_t lo, std::size_t hi) {
                              for (std::size_t i = lo; i < hi; ++i) {
                                auto& jn = jets_[i];
                                nets_[static_cast<std::size_t>(jn.net)].evaluator.evaluate(
                                    jn.point, jn.mode, jn.tape);
                              }
                            });
  for (std::size_t i = 0; i < jets_.size(); ++i) {
    if (!jets_[i].tape.jet().all_finite())
      throw NumericError("non-finite jet at collocation point index " + std::to_string(i));
  }
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const Node& n = nodes_[id];
    double v = 0.0;
    switch (n.op) {
      case Op::kConst:
      case Op::kInput:
        v = n.ca;
        break;
      case Op::kJetField: {
        const Jet& j = jets_[static_cast<std::size_t>(n.a)].tape.jet();
        switch (n.b) {
          case kFieldValue: v = j.value; break;
          case kFieldDt: v = j.dt; break;
          case kFieldDtt: v = j.dtt; break;
          case kFieldLap: v = j.laplacian(); break;
          default: v = j.dt_laplacian(); break;
        }
        break;
      }
      case Op::kAdd:
        v = values_[static_cast<std::size_t>(n.a)] + values_[static_cast<std::size_t>(n.b)];
        break;
      case Op::kSub:
        v = values_[static_cast<std::size_t>(n.a)] - values_[static_cast<std::size_t>(n.b)];
        break;
      case Op::kMul:
        v = values_[static_cast<std::size_t>(n.a)] * values_[static_cast<std::size_t>(n.b)];
        break;
      case Op::kAffine:
        v = n.ca * values_[static_cast<std::size_t>(n.a)] + n.cb;
        break;
      case Op::kWsq: {
        const std::size_t off = static_cast<std::size_t>(n.a);
        for (std::int32_t i = 0; i < n.b; ++i) {
          const double e = values_[static_cast<std::size_t>(epool_[off + static_cast<std::size_t>(i)])];
          v += wpool_[off + static_cast<std::size_t>(i)] * e * e;
        }
        break;
      }
      case Op::kSum: {
        const std::size_t off = static_cast<std::size_t>(n.a);
        for (std::int32_t i = 0; i < n.b; ++i)
          v += values_[static_cast<std::size_t>(epool_[off + static_cast<std::size_t>(i)])];
        break;
      }
    }
    values_[id] = v;
  }
  forwarded_ = true;
}

std::vector<ParamSet> Graph::backward(Expr root) {
  if (!forwarded_) throw NumericError("backward() requires a prior forward()");
  std::vector<double> adj(nodes_.size(), 0.0);
  adj[static_cast<std::size_t>(root)] = 1.0;

  const int d_max = [&] {
    int d = 1;
    for (const auto& ne : nets_) d = std::max(d, ne.spec->spatial_dim());
    return d;
  }();
  std::vector<JetAdjoint> seeds(jets_.size(), JetAdjoint(d_max));

  for (std::size_t id = nodes_.size(); id-- > 0;) {
    const double a = adj[id];
    if (a == 0.0) continue;
    const Node& n = nodes_[id];
    switch (n.op) {
      case Op::kConst:
      case Op::kInput:
        break;
      case Op::kJetField: {
        JetAdjoint& s = seeds[static_cast<std::size_t>(n.a)];
        const int d = nets_[static_cast<std::size_t>(jets_[static_cast<std::size_t>(n.a)].net)]
                          .spec->spatial_dim();
        switch (n.b) {
          case kFieldValue: s.value += a; break;
          case kFieldDt: s.dt += a; break;
          case kFieldDtt: s.dtt += a; break;
          case kFieldLap:
            for (int i = 0; i < d; ++i) s.dxx[i] += a;
            break;
          default:
            for (int i = 0; i < d; ++i) s.dt_dxx[i] += a;
            break;
        }
        break;
      }
      case Op::kAdd:
        adj[static_cast<std::size_t>(n.a)] += a;
        adj[static_cast<std::size_t>(n.b)] += a;
        break;
      case Op::kSub:
        adj[static_cast<std::size_t>(n.a)] += a;
        adj[static_cast<std::size_t>(n.b)] -= a;
        break;
      case Op::kMul:
        adj[static_cast<std::size_t>(n.a)] += a * values_[static_cast<std::size_t>(n.b)];
        adj[static_cast<std::size_t>(n.b)] += a * values_[static_cast<std::size_t>(n.a)];
        break;
      case Op::kAffine:
        adj[static_cast<std::size_t>(n.a)] += a * n.ca;
        break;
      case Op::kWsq: {
        const std::size_t off = static_cast<std::size_t>(n.a);
        for (std::int32_t i = 0; i < n.b; ++i) {
          const Expr e = epool_[off + static_cast<std::size_t>(i)];
          adj[static_cast<std::size_t>(e)] +=
              a * 2.0 * wpool_[off + static_cast<std::size_t>(i)] * values_[static_cast<std::size_t>(e)];
        }
        break;
      }
      case Op::kSum: {
        const std::size_t off = static_cast<std::size_t>(n.a);
        for (std::int32_t i = 0; i < n.b; ++i)
          adj[static_cast<std::size_t>(epool_[off + static_cast<std::size_t>(i)])] += a;
        break;
      }
    }
  }

  // Jet reverse passes, chunked; per-chunk buffers combined in chunk order.
  const std::size_t nchunks = jets_.empty() ? 0 : (jets_.size() + kJetChunk - 1) / kJetChunk;
  std::vector<std::vector<ParamSet>> chunk_grads(nchunks);
  util::parallel_for_chunks(
      jets_.size(), kJetChunk, [this, &chunk_grads, &seeds](std::size_t c, std::size_t lo, std::size_t hi) {
        auto& bufs = chunk_grads[c];
        bufs.reserve(nets_.size());
        for (const auto& ne : nets_) bufs.push_back(zero_params(*ne.spec));
        for (std::size_t i = lo; i < hi; ++i) {
          const auto& jn = jets_[i];
          nets_[static_cast<std::size_t>(jn.net)].evaluator.backward(
              jn.tape, seeds[i], bufs[static_cast<std::size_t>(jn.net)]);
        }
      });

  std::vector<ParamSet> grads;
  grads.reserve(nets_.size());
  for (const auto& ne : nets_) grads.push_back(zero_params(*ne.spec));
  for (std::size_t c = 0; c < nchunks; ++c) {
    for (std::size_t m = 0; m < nets_.size(); ++m) {
      for (std::size_t k = 0; k < grads[m].weights.size(); ++k) {
        grads[m].weights[k] += chunk_grads[c][m].weights[k];
        grads[m].biases[k] += chunk_grads[c][m].biases[k];
      }
    }
  }
  return grads;
}

std::vector<ParamSet> param_gradient(Graph& g, Graph::Expr scalar_root) {
  g.forward();
  return g.backward(scalar_root);
}

}  // namespace invpot::net
