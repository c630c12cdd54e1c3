// SPDX-License-Identifier: Apache-2.0

#include "invpot/oracle.hpp"

#include <Eigen/Sparse>
#include <cmath>
#include <stdexcept>

namespace invpot::oracle {

double fd_derivative(const std::function<double(double)>& f, double x, int order, double step) {
  if (order == 1) return (f(x + step) - f(x - step)) / (2.0 * step);
  if (order == 2) return (f(x + step) - 2.0 * f(x) + f(x - step)) / (step * step);
  throw std::invalid_argument("fd_derivative supports orders 1 and 2");
}

double fd_derivative(const std::function<double(double)>& f, double x, int order) {
  const double eps = std::numeric_limits<double>::epsilon();
  const double scale = std::max(1.0, std::abs(x));
  const double step = (order == 1 ? std::cbrt(eps) : std::pow(eps, 0.25)) * scale;
  return fd_derivative(f, x, order, step);
}

int ForwardSolution::node_count() const {
  int n = 1;
  for (int c : grid.n_cells) n *= c + 1;
  return n;
}

namespace {

struct Lattice {
  const problem::Domain* dom;
  std::vector<int> nn;  // nodes per axis
  std::vector<double> h;

  int dim() const { return static_cast<int>(nn.size()); }
  int total() const {
    int t = 1;
    for (int v : nn) t *= v;
    return t;
  }
  int index(std::span<const int> iv) const {
    int id = 0;
    for (std::size_t a = 0; a < nn.size(); ++a) id = id * nn[a] + iv[a];
    return id;
  }
  void coords(int id, std::span<int> iv) const {
    for (std::size_t a = nn.size(); a-- > 0;) {
      iv[a] = id % nn[a];
      id /= nn[a];
    }
  }
  bool boundary(std::span<const int> iv) const {
    for (std::size_t a = 0; a < nn.size(); ++a)
      if (iv[a] == 0 || iv[a] == nn[a] - 1) return true;
    return false;
  }
  void point(std::span<const int> iv, std::span<double> x) const {
    for (std::size_t a = 0; a < nn.size(); ++a)
      x[a] = dom->lo[static_cast<Eigen::Index>(a)] + h[a] * iv[a];
  }
};

}  // namespace

ForwardSolution solve_forward(const problem::Problem& prob,
                              const std::function<double(std::span<const double>)>& q,
                              const FDGrid& grid) {
  const problem::Domain& dom = prob.domain;
  const int d = dom.dim;
  if (static_cast<int>(grid.n_cells.size()) != d)
    throw std::invalid_argument("grid dimension does not match problem");
  if (grid.n_steps < 1) throw std::invalid_argument("need at least one time step");

  Lattice lat;
  lat.dom = &dom;
  lat.nn.resize(static_cast<std::size_t>(d));
  lat.h.resize(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) {
    lat.nn[static_cast<std::size_t>(a)] = grid.n_cells[static_cast<std::size_t>(a)] + 1;
    lat.h[static_cast<std::size_t>(a)] =
        (dom.hi[a] - dom.lo[a]) / grid.n_cells[static_cast<std::size_t>(a)];
  }
  const double k = dom.T / grid.n_steps;
  const int total = lat.total();

  // interior equation numbering
  std::vector<int> eq_of(static_cast<std::size_t>(total), -1);
  std::vector<int> node_of;  // eq -> node
  std::vector<int> iv(static_cast<std::size_t>(d));
  std::vector<double> x(static_cast<std::size_t>(d));
  for (int id = 0; id < total; ++id) {
    lat.coords(id, iv);
    if (!lat.boundary(iv)) {
      eq_of[static_cast<std::size_t>(id)] = static_cast<int>(node_of.size());
      node_of.push_back(id);
    }
  }
  const int m = static_cast<int>(node_of.size());

  // q >= 0 on the grid (admissible set)
  Eigen::VectorXd qv(m);
  for (int e = 0; e < m; ++e) {
    lat.coords(node_of[static_cast<std::size_t>(e)], iv);
    lat.point(iv, x);
    qv[e] = q(x);
    if (qv[e] < 0.0) throw std::invalid_argument("q must be nonnegative on the grid");
  }

  // A = I/k - Lap_h + diag(q), SPD M-matrix
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(m * (2 * d + 1)));
  std::vector<int> jv(static_cast<std::size_t>(d));
  for (int e = 0; e < m; ++e) {
    lat.coords(node_of[static_cast<std::size_t>(e)], iv);
    double diag = 1.0 / k + qv[e];
    for (int a = 0; a < d; ++a) diag += 2.0 / (lat.h[static_cast<std::size_t>(a)] * lat.h[static_cast<std::size_t>(a)]);
    trips.emplace_back(e, e, diag);
    for (int a = 0; a < d; ++a) {
      for (int s : {-1, +1}) {
        jv.assign(iv.begin(), iv.end());
        jv[static_cast<std::size_t>(a)] += s;
        const int nid = lat.index(jv);
        const int ne = eq_of[static_cast<std::size_t>(nid)];
        if (ne >= 0)
          trips.emplace_back(e, ne, -1.0 / (lat.h[static_cast<std::size_t>(a)] * lat.h[static_cast<std::size_t>(a)]));
      }
    }
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
  solver.compute(A);
  if (solver.info() != Eigen::Success) throw std::runtime_error("forward solver factorization failed");

  ForwardSolution sol;
  sol.grid = grid;
  sol.spacing = lat.h;
  sol.dt = k;
  sol.u.reserve(static_cast<std::size_t>(grid.n_steps) + 1);

  Eigen::VectorXd full(total);
  for (int id = 0; id < total; ++id) {
    lat.coords(id, iv);
    lat.point(iv, x);
    full[id] = lat.boundary(iv) ? prob.b(x, 0.0) : prob.u0(x);
  }
  sol.u.push_back(full);

  Eigen::VectorXd uin(m);
  for (int e = 0; e < m; ++e) uin[e] = full[node_of[static_cast<std::size_t>(e)]];

  for (int step = 1; step <= grid.n_steps; ++step) {
    const double t = k * step;
    Eigen::VectorXd rhs(m);
    for (int e = 0; e < m; ++e) {
      lat.coords(node_of[static_cast<std::size_t>(e)], iv);
      lat.point(iv, x);
      double r = uin[e] / k + prob.F(x, t);
      // Dirichlet neighbors at the new time level
      for (int a = 0; a < d; ++a) {
        for (int s : {-1, +1}) {
          jv.assign(iv.begin(), iv.end());
          jv[static_cast<std::size_t>(a)] += s;
          const int nid = lat.index(jv);
          if (eq_of[static_cast<std::size_t>(nid)] < 0) {
            std::vector<int> biv(static_cast<std::size_t>(d));
            lat.coords(nid, biv);
            std::vector<double> bx(static_cast<std::size_t>(d));
            lat.point(biv, bx);
            r += prob.b(bx, t) / (lat.h[static_cast<std::size_t>(a)] * lat.h[static_cast<std::size_t>(a)]);
          }
        }
      }
      rhs[e] = r;
    }
    uin = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw std::runtime_error("forward solve failed");
    for (int id = 0; id < total; ++id) {
      lat.coords(id, iv);
      lat.point(iv, x);
      full[id] = lat.boundary(iv) ? prob.b(x, t) : uin[eq_of[static_cast<std::size_t>(id)]];
    }
    sol.u.push_back(full);
  }
  return sol;
}

double ForwardSolution::max_error_vs(
    const std::function<double(std::span<const double>, double)>& exact,
    const problem::Domain& domain) const {
  const int d = domain.dim;
  std::vector<int> nn(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) nn[static_cast<std::size_t>(a)] = grid.n_cells[static_cast<std::size_t>(a)] + 1;
  std::vector<int> iv(static_cast<std::size_t>(d));
  std::vector<double> x(static_cast<std::size_t>(d));
  double worst = 0.0;
  for (std::size_t step = 0; step < u.size(); ++step) {
    const double t = dt * static_cast<double>(step);
    for (int id = 0; id < static_cast<int>(u[step].size()); ++id) {
      int rem = id;
      for (std::size_t a = nn.size(); a-- > 0;) {
        iv[a] = rem % nn[a];
        rem /= nn[a];
      }
      for (int a = 0; a < d; ++a)
        x[static_cast<std::size_t>(a)] = domain.lo[a] + spacing[static_cast<std::size_t>(a)] * iv[static_cast<std::size_t>(a)];
      worst = std::max(worst, std::abs(u[step][id] - exact(x, t)));
    }
  }
  return worst;
}

}  // namespace invpot::oracle
