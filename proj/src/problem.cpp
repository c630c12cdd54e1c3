// SPDX-License-Identifier: Apache-2.0

#include "invpot/problem.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace invpot::problem {

double Domain::measure() const {
  double m = 1.0;
  for (int a = 0; a < dim; ++a) m *= hi[a] - lo[a];
  return m;
}

double Domain::boundary_measure() const {
  // sum of face measures of the box
  double total = 0.0;
  for (int a = 0; a < dim; ++a) {
    double face = 1.0;
    for (int b = 0; b < dim; ++b)
      if (b != a) face *= hi[b] - lo[b];
    total += 2.0 * face;
  }
  return total;
}

double Domain::boundary_distance(std::span<const double> x) const {
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim; ++a) d = std::min({d, x[a] - lo[a], hi[a] - x[a]});
  return d;
}

bool Domain::contains(std::span<const double> x) const {
  for (int a = 0; a < dim; ++a)
    if (x[a] < lo[a] || x[a] > hi[a]) return false;
  return true;
}

namespace {

Domain box(int dim, double lo, double hi, double T) {
  Domain d;
  d.dim = dim;
  d.lo = Eigen::VectorXd::Constant(dim, lo);
  d.hi = Eigen::VectorXd::Constant(dim, hi);
  d.T = T;
  return d;
}

net::Jet make_jet(int d) {
  net::Jet j;
  j.dx = Eigen::VectorXd::Zero(d);
  j.dxx = Eigen::VectorXd::Zero(d);
  j.dt_dxx = Eigen::VectorXd::Zero(d);
  return j;
}

}  // namespace

Problem example1() {
  Problem p;
  p.name = "example1";
  p.domain = box(2, 0.0, 1.0, 1.0);
  p.M = 1.0;
  auto q = [](std::span<const double> x) { return std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]); };
  auto radial = [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1] + 1.0; };
  p.q_exact = q;
  p.u_exact = [radial](std::span<const double> x, double t) { return radial(x) * std::exp(t); };
  p.u_exact_jet = [radial](std::span<const double> x, double t) {
    net::Jet j = make_jet(2);
    const double et = std::exp(t);
    j.value = radial(x) * et;
    j.dt = j.value;
    j.dtt = j.value;
    for (int a = 0; a < 2; ++a) {
      j.dx[a] = 2.0 * x[a] * et;
      j.dxx[a] = 2.0 * et;
      j.dt_dxx[a] = 2.0 * et;
    }
    return j;
  };
  p.F = [q, radial](std::span<const double> x, double t) {
    return std::exp(t) * (radial(x) - 4.0 + q(x) * radial(x));
  };
  p.F_t = p.F;  // every term carries e^t and q is time-independent
  p.u0 = radial;
  p.laplacian_u0 = [](std::span<const double>) { return 4.0; };
  p.b = p.u_exact;
  p.b_t = p.u_exact;
  p.b_tt = p.u_exact;
  p.phi = [radial](std::span<const double> x) { return radial(x) * std::exp(1.0); };
  p.laplacian_phi = [](std::span<const double>) { return 4.0 * std::exp(1.0); };
  return p;
}

Problem example2() {
  Problem p;
  p.name = "example2";
  p.domain = box(2, 0.0, 2.0, 1.0);
  p.M = 15.0 * (1.0 - std::sqrt(3.0) / 2.0) + 2.0;
  auto q = [](std::span<const double> x) {
    const double r = std::hypot(x[0] - 1.0, x[1] - 1.0);
    if (r <= M_PI / 6.0) return 15.0 * (std::cos(r) - std::sqrt(3.0) / 2.0) + 2.0;
    return 2.0;
  };
  auto es = [](std::span<const double> x) { return std::exp(x[0] + x[1]); };
  p.q_exact = q;
  p.u_exact = [es](std::span<const double> x, double t) { return t * es(x); };
  p.u_exact_jet = [es](std::span<const double> x, double t) {
    net::Jet j = make_jet(2);
    const double e = es(x);
    j.value = t * e;
    j.dt = e;
    j.dtt = 0.0;
    for (int a = 0; a < 2; ++a) {
      j.dx[a] = t * e;
      j.dxx[a] = t * e;
      j.dt_dxx[a] = e;
    }
    return j;
  };
  p.F = [q, es](std::span<const double> x, double t) {
    return es(x) * (1.0 - 2.0 * t + q(x) * t);
  };
  p.F_t = [q, es](std::span<const double> x, double) { return es(x) * (q(x) - 2.0); };
  p.u0 = [](std::span<const double>) { return 0.0; };
  p.laplacian_u0 = [](std::span<const double>) { return 0.0; };
  p.b = p.u_exact;
  p.b_t = [es](std::span<const double> x, double) { return es(x); };
  p.b_tt = [](std::span<const double>, double) { return 0.0; };
  p.phi = es;
  p.laplacian_phi = [es](std::span<const double> x) { return 2.0 * es(x); };
  return p;
}

Problem example3() {
  Problem p;
  p.name = "example3";
  p.domain = box(3, 0.0, 1.0, 1.0);
  p.M = 3.0;
  auto q = [](std::span<const double> x) { return x[0] + x[1] + x[2]; };
  auto es = [](std::span<const double> x) { return std::exp(x[0] + x[1] + x[2]); };
  p.q_exact = q;
  p.u_exact = [es](std::span<const double> x, double t) { return t * es(x); };
  p.u_exact_jet = [es](std::span<const double> x, double t) {
    net::Jet j = make_jet(3);
    const double e = es(x);
    j.value = t * e;
    j.dt = e;
    j.dtt = 0.0;
    for (int a = 0; a < 3; ++a) {
      j.dx[a] = t * e;
      j.dxx[a] = t * e;
      j.dt_dxx[a] = e;
    }
    return j;
  };
  p.F = [q, es](std::span<const double> x, double t) {
    return es(x) * (1.0 - 3.0 * t + q(x) * t);
  };
  p.F_t = [q, es](std::span<const double> x, double) { return es(x) * (q(x) - 3.0); };
  p.u0 = [](std::span<const double>) { return 0.0; };
  p.laplacian_u0 = [](std::span<const double>) { return 0.0; };
  p.b = p.u_exact;
  p.b_t = [es](std::span<const double> x, double) { return es(x); };
  p.b_tt = [](std::span<const double>, double) { return 0.0; };
  p.phi = es;
  p.laplacian_phi = [es](std::span<const double> x) { return 3.0 * es(x); };
  return p;
}

Problem by_name(const std::string& name) {
  if (name == "example1") return example1();
  if (name == "example2") return example2();
  if (name == "example3") return example3();
  throw std::invalid_argument("unknown problem: " + name);
}

Measurement add_noise(const mollify::SampledField& clean, double delta, std::uint64_t seed,
                      bool relative) {
  if (delta < 0.0) throw std::invalid_argument("noise level must be >= 0");
  Measurement m;
  m.clean = clean;
  m.noisy = clean;
  m.delta = delta;
  m.seed = seed;
  double amp = delta;
  if (relative) amp *= clean.values.cwiseAbs().maxCoeff();
  if (amp > 0.0) {
    std::mt19937_64 rng(seed);
    for (Eigen::Index i = 0; i < m.noisy.values.size(); ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // U[0,1)
      m.noisy.values[i] += amp * (2.0 * u - 1.0);
    }
  }
  return m;
}

Measurement make_measurement(const Problem& prob, double delta, std::uint64_t seed,
                             int nodes_per_axis, bool relative) {
  if (nodes_per_axis <= 0) nodes_per_axis = prob.domain.dim == 3 ? 60 : 200;
  std::vector<int> nodes(static_cast<std::size_t>(prob.domain.dim), nodes_per_axis);
  const mollify::Grid grid = mollify::uniform_grid(prob.domain.lo, prob.domain.hi, nodes);
  return add_noise(mollify::sample_field(grid, prob.phi), delta, seed, relative);
}

bool AssumptionReport::all_hold() const {
  for (const auto& b : bullets)
    if (!b.holds) return false;
  return true;
}

std::string AssumptionReport::summary() const {
  std::ostringstream os;
  for (const auto& b : bullets)
    os << (b.holds ? "  [ok]   " : "  [FAIL] ") << b.name << "  (observed min " << b.observed_min
       << ")\n";
  return os.str();
}

AssumptionReport check_assumption1(const Problem& prob, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto u01 = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const Domain& dom = prob.domain;
  const int d = dom.dim;
  std::vector<double> x(static_cast<std::size_t>(d));

  auto interior = [&] {
    for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] = dom.lo[a] + u01() * (dom.hi[a] - dom.lo[a]);
  };
  auto on_boundary = [&] {
    interior();
    const int face = static_cast<int>(rng() % static_cast<std::uint64_t>(2 * d));
    x[static_cast<std::size_t>(face / 2)] = (face % 2 == 0) ? dom.lo[face / 2] : dom.hi[face / 2];
  };

  double u0_min = 1e300, b_min = 1e300, bt_min = 1e300, F_min = 1e300, Ft_min = 1e300,
         compat_min = 1e300;
  for (int s = 0; s < samples; ++s) {
    interior();
    const double t = u01() * dom.T;
    u0_min = std::min(u0_min, prob.u0(x));
    F_min = std::min(F_min, prob.F(x, t));
    Ft_min = std::min(Ft_min, prob.F_t(x, t));
    compat_min = std::min(compat_min,
                          prob.laplacian_u0(x) - prob.M * prob.u0(x) + prob.F(x, 0.0));
    on_boundary();
    const double tb = u01() * dom.T;
    b_min = std::min(b_min, prob.b(x, tb));
    bt_min = std::min(bt_min, prob.b_t(x, tb));
  }

  AssumptionReport rep;
  rep.bullets = {
      {"u0 >= nu > 0 on Omega", u0_min > 0.0, u0_min},
      {"b >= nu > 0 on dOmega", b_min > 0.0, b_min},
      {"b_t >= 0 on dOmega", bt_min >= 0.0, bt_min},
      {"F >= 0 on Omega_T", F_min >= 0.0, F_min},
      {"F_t >= 0 on Omega_T", Ft_min >= 0.0, Ft_min},
      {"Lap u0 - M u0 + F(.,0) >= 0", compat_min >= -1e-12, compat_min},
  };
  return rep;
}

double manufactured_residual(const Problem& prob, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto u01 = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  const Domain& dom = prob.domain;
  std::vector<double> x(static_cast<std::size_t>(dom.dim));
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    for (int a = 0; a < dom.dim; ++a)
      x[static_cast<std::size_t>(a)] = dom.lo[a] + u01() * (dom.hi[a] - dom.lo[a]);
    const double t = u01() * dom.T;
    const net::Jet j = prob.u_exact_jet(x, t);
    const double r = j.dt - j.laplacian() + prob.q_exact(x) * j.value - prob.F(x, t);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace invpot::problem
