// SPDX-License-Identifier: Apache-2.0

#include "invpot/net.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "invpot/graph.hpp"
#include "invpot/oracle.hpp"

using namespace invpot;
using net::JetMode;

namespace {

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

net::ParamSet random_params(const net::NetworkSpec& spec, std::uint64_t seed) {
  return net::init_params(spec, seed);
}

}  // namespace

TEST_CASE("forward: zero network evaluates to zero") {
  auto spec = net::make_spec(2, true, 2, 6);
  auto p = net::zero_params(spec);
  CHECK(net::forward(spec, p, std::vector<double>{0.3, 0.4, 0.5}) == 0.0);
}

TEST_CASE("forward: output bias passes through a zero network") {
  auto spec = net::make_spec(2, true, 2, 6);
  auto p = net::zero_params(spec);
  p.biases.back()[0] = 2.75;
  CHECK(net::forward(spec, p, std::vector<double>{0.1, 0.9, 0.2}) == 2.75);
}

TEST_CASE("forward: single tanh unit") {
  // 1 hidden layer, W1=[[1]], b1=[0], W2=[[1]], b2=[0], input 0.5 -> tanh(0.5)
  net::NetworkSpec spec;
  spec.input_dim = 1;
  spec.widths = {1};
  auto p = net::zero_params(spec);
  p.weights[0](0, 0) = 1.0;
  p.weights[1](0, 0) = 1.0;
  const double got = net::forward(spec, p, std::vector<double>{0.5});
  CHECK(got == std::tanh(0.5));
  CHECK(got == doctest::Approx(0.46211715726000974).epsilon(1e-14));
}

TEST_CASE("forward: shape mismatch raises a configuration error") {
  auto spec = net::make_spec(2, true, 2, 6);
  auto p = net::zero_params(spec);
  CHECK_THROWS_AS(net::forward(spec, p, std::vector<double>{0.1, 0.2}), net::ShapeError);
  auto bad = p;
  bad.weights[0].resize(3, 3);
  CHECK_THROWS_AS(net::forward(spec, bad, std::vector<double>{0.1, 0.2, 0.3}), net::ShapeError);
}

TEST_CASE("forward_jet: zero network gives an all-zero jet") {
  auto spec = net::make_spec(2, true, 3, 5);
  auto p = net::zero_params(spec);
  const net::Jet j = net::forward_jet(spec, p, std::vector<double>{0.2, 0.7, 0.4});
  CHECK(j.value == 0.0);
  CHECK(j.dt == 0.0);
  CHECK(j.dtt == 0.0);
  CHECK(j.dx.norm() == 0.0);
  CHECK(j.dxx.norm() == 0.0);
  CHECK(j.dt_dxx.norm() == 0.0);
}

TEST_CASE("forward_jet: affine map (no hidden layers) has linear jet") {
  net::NetworkSpec spec;
  spec.input_dim = 3;
  spec.has_time = true;
  spec.widths = {};  // K = 1: s(z) = W z + b
  auto p = net::zero_params(spec);
  p.weights[0](0, 0) = 1.5;
  p.weights[0](0, 1) = -0.25;
  p.weights[0](0, 2) = 4.0;
  p.biases[0][0] = 0.5;
  const net::Jet j = net::forward_jet(spec, p, std::vector<double>{0.3, 0.9, 0.1});
  CHECK(j.value == doctest::Approx(1.5 * 0.3 - 0.25 * 0.9 + 4.0 * 0.1 + 0.5).epsilon(1e-15));
  CHECK(j.dx[0] == 1.5);
  CHECK(j.dx[1] == -0.25);
  CHECK(j.dt == 4.0);
  CHECK(j.dxx.norm() == 0.0);
  CHECK(j.dtt == 0.0);
  CHECK(j.dt_dxx.norm() == 0.0);
}

TEST_CASE("forward_jet: fields match central finite differences of forward") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    auto spec = net::make_spec(2, true, 3, 8);
    auto p = random_params(spec, seed);
    const std::vector<double> pt{0.31, 0.64, 0.52};
    const net::Jet j = net::forward_jet(spec, p, pt);

    auto slice = [&](int axis) {
      return [&, axis](double v) {
        std::vector<double> q = pt;
        q[static_cast<std::size_t>(axis)] = v;
        return net::forward(spec, p, q);
      };
    };
    const double h = 1e-4;
    for (int a = 0; a < 2; ++a) {
      CHECK(rel_err(j.dx[a], oracle::fd_derivative(slice(a), pt[static_cast<std::size_t>(a)], 1, h)) < 1e-5);
      CHECK(rel_err(j.dxx[a], oracle::fd_derivative(slice(a), pt[static_cast<std::size_t>(a)], 2, h)) < 1e-4);
    }
    CHECK(rel_err(j.dt, oracle::fd_derivative(slice(2), pt[2], 1, h)) < 1e-5);
    CHECK(rel_err(j.dtt, oracle::fd_derivative(slice(2), pt[2], 2, h)) < 1e-4);

    // mixed third order: d/dt of dxx via FD in t of the jet's dxx field
    for (int a = 0; a < 2; ++a) {
      auto dxx_of_t = [&](double t) {
        std::vector<double> q = pt;
        q[2] = t;
        return net::forward_jet(spec, p, q).dxx[a];
      };
      CHECK(rel_err(j.dt_dxx[a], oracle::fd_derivative(dxx_of_t, pt[2], 1, 1e-4)) < 1e-3);
    }
  }
}

TEST_CASE("forward_jet: value field is bitwise identical to forward") {
  for (std::uint64_t seed : {3u, 4u, 5u, 6u}) {
    auto spec = net::make_spec(3, true, 2, 7);
    auto p = random_params(spec, seed);
    const std::vector<double> pt{0.11, 0.52, 0.83, 0.27};
    CHECK(net::forward_jet(spec, p, pt).value == net::forward(spec, p, pt));
  }
}

TEST_CASE("forward_jet: jets are additive across networks") {
  // Combine two nets into one block-diagonal net computing s1(z)+s2(z); its
  // jet must equal the fieldwise sum of the individual jets.
  auto spec = net::make_spec(2, true, 2, 5);
  auto p1 = random_params(spec, 21);
  auto p2 = random_params(spec, 22);

  net::NetworkSpec spec2 = spec;
  spec2.widths = {10, 10};
  auto pc = net::zero_params(spec2);
  for (int k = 0; k < 2; ++k) {
    pc.weights[static_cast<std::size_t>(k)].setZero();
    if (k == 0) {
      pc.weights[0].topRows(5) = p1.weights[0];
      pc.weights[0].bottomRows(5) = p2.weights[0];
    } else {
      pc.weights[1].topLeftCorner(5, 5) = p1.weights[1];
      pc.weights[1].bottomRightCorner(5, 5) = p2.weights[1];
    }
    pc.biases[static_cast<std::size_t>(k)].head(5) = p1.biases[static_cast<std::size_t>(k)];
    pc.biases[static_cast<std::size_t>(k)].tail(5) = p2.biases[static_cast<std::size_t>(k)];
  }
  pc.weights[2].leftCols(5) = p1.weights[2];
  pc.weights[2].rightCols(5) = p2.weights[2];
  pc.biases[2][0] = p1.biases[2][0] + p2.biases[2][0];

  const std::vector<double> pt{0.42, 0.17, 0.88};
  const net::Jet a = net::forward_jet(spec, p1, pt);
  const net::Jet b = net::forward_jet(spec, p2, pt);
  const net::Jet c = net::forward_jet(spec2, pc, pt);
  CHECK(c.value == doctest::Approx(a.value + b.value).epsilon(1e-13));
  CHECK(c.dt == doctest::Approx(a.dt + b.dt).epsilon(1e-13));
  CHECK(c.dtt == doctest::Approx(a.dtt + b.dtt).epsilon(1e-13));
  for (int i = 0; i < 2; ++i) {
    CHECK(c.dxx[i] == doctest::Approx(a.dxx[i] + b.dxx[i]).epsilon(1e-13));
    CHECK(c.dt_dxx[i] == doctest::Approx(a.dt_dxx[i] + b.dt_dxx[i]).epsilon(1e-13));
  }
}

TEST_CASE("forward_jet: hidden-neuron permutation leaves outputs unchanged") {
  // Permuting rows of W_k/b_k and columns of W_{k+1} is an exact symmetry of
  // the function; numerically the next layer's sums run in a different order,
  // so equality holds to summation roundoff rather than bitwise.
  auto spec = net::make_spec(2, true, 3, 9);
  auto p = random_params(spec, 77);
  const std::vector<double> pt{0.35, 0.61, 0.44};
  const net::Jet base = net::forward_jet(spec, p, pt);

  auto swapped = p;
  const int k = 1, i1 = 2, i2 = 6;
  swapped.weights[k].row(i1).swap(swapped.weights[k].row(i2));
  std::swap(swapped.biases[k][i1], swapped.biases[k][i2]);
  swapped.weights[k + 1].col(i1).swap(swapped.weights[k + 1].col(i2));

  const net::Jet j = net::forward_jet(spec, swapped, pt);
  CHECK(j.value == doctest::Approx(base.value).epsilon(1e-13));
  CHECK(j.dt == doctest::Approx(base.dt).epsilon(1e-13));
  CHECK(j.dtt == doctest::Approx(base.dtt).epsilon(1e-13));
  for (int i = 0; i < 2; ++i) {
    CHECK(j.dx[i] == doctest::Approx(base.dx[i]).epsilon(1e-12));
    CHECK(j.dxx[i] == doctest::Approx(base.dxx[i]).epsilon(1e-12));
    CHECK(j.dt_dxx[i] == doctest::Approx(base.dt_dxx[i]).epsilon(1e-12));
  }
}

TEST_CASE("param gradients: scalar independent of a parameter has zero entry") {
  auto spec_u = net::make_spec(2, true, 2, 4);
  auto spec_q = net::make_spec(2, false, 2, 4);
  auto pu = random_params(spec_u, 31);
  auto pq = random_params(spec_q, 32);

  net::Graph g;
  const int u_id = g.add_net(spec_u, pu);
  const int q_id = g.add_net(spec_q, pq);
  (void)q_id;
  auto h = g.add_jet(u_id, std::vector<double>{0.5, 0.5, 0.5}, JetMode::kFull);
  const auto root = g.mul(h.value, h.value);
  auto grads = net::param_gradient(g, root);
  // q never participates
  CHECK(grads[1].flatten().norm() == 0.0);
  CHECK(grads[0].flatten().norm() > 0.0);
}

TEST_CASE("param gradients: square of a zero network w.r.t. output bias") {
  // scalar = forward(z)^2 with all params 0: d/db_K (b_K^2) = 2 b_K = 0
  auto spec = net::make_spec(1, false, 1, 3);
  auto p = net::zero_params(spec);
  net::Graph g;
  const int id = g.add_net(spec, p);
  auto h = g.add_jet(id, std::vector<double>{0.4}, JetMode::kValueOnly);
  auto grads = net::param_gradient(g, g.mul(h.value, h.value));
  CHECK(grads[0].biases.back()[0] == 0.0);
  CHECK(grads[0].flatten().norm() == 0.0);
}

TEST_CASE("param gradients match central finite differences") {
  auto spec = net::make_spec(2, true, 2, 5);
  auto p = random_params(spec, 99);

  // scalar = sum over a few points of combinations of jet fields
  auto build = [&](net::Graph& g, int id) {
    std::vector<net::Graph::Expr> terms;
    const double pts[3][3] = {{0.2, 0.3, 0.4}, {0.7, 0.1, 0.9}, {0.5, 0.8, 0.6}};
    for (const auto& pt : pts) {
      auto h = g.add_jet(id, std::span<const double>(pt, 3), JetMode::kFull);
      auto r = g.add(g.sub(h.dt, h.lap), g.mul(h.value, h.value));
      auto rt = g.sub(h.dtt, h.dt_lap);
      terms.push_back(g.mul(r, r));
      terms.push_back(g.mul(rt, rt));
    }
    return g.sum(terms);
  };

  net::Graph g;
  const int id = g.add_net(spec, p);
  const auto root = build(g, id);
  g.forward();
  const double base = g.value(root);
  (void)base;
  auto grads = g.backward(root);
  const Eigen::VectorXd grad = grads[0].flatten();

  Eigen::VectorXd flat = p.flatten();
  const double step = 1e-5;
  for (Eigen::Index i = 0; i < flat.size(); i += 7) {  // sample every 7th parameter
    auto eval_at = [&](double v) {
      Eigen::VectorXd f2 = flat;
      f2[i] = v;
      net::ParamSet p2 = p;
      p2.unflatten(f2);
      net::Graph g2;
      const int id2 = g2.add_net(spec, p2);
      const auto root2 = build(g2, id2);
      g2.forward();
      return g2.value(root2);
    };
    const double fd = (eval_at(flat[i] + step) - eval_at(flat[i] - step)) / (2.0 * step);
    CHECK(rel_err(grad[i], fd) < 1e-4);
  }
}

TEST_CASE("checkpoint JSON round-trips bit-exactly") {
  auto spec_u = net::make_spec(2, true, 3, 20);
  auto spec_q = net::make_spec(2, false, 3, 20);
  auto pu = random_params(spec_u, 1234);
  auto pq = random_params(spec_q, 4321);
  const std::string path = "roundtrip_checkpoint.json";
  net::save_checkpoint(path, spec_u, pu, spec_q, pq);
  auto [u2, q2] = net::load_checkpoint(path);
  REQUIRE(u2.second.count() == pu.count());
  CHECK((u2.second.flatten() - pu.flatten()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((q2.second.flatten() - pq.flatten()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(u2.first.widths == spec_u.widths);
  CHECK(q2.first.has_time == false);
  std::remove(path.c_str());
}
