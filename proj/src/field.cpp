// SPDX-License-Identifier: Apache-2.0

#include "invpot/field.hpp"

#include <stdexcept>

namespace invpot::mollify {

Grid uniform_grid(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, std::span<const int> nodes) {
  if (lo.size() != hi.size() || static_cast<std::size_t>(lo.size()) != nodes.size())
    throw std::invalid_argument("grid axes mismatch");
  Grid g;
  g.lo = lo;
  g.hi = hi;
  g.nodes.assign(nodes.begin(), nodes.end());
  for (int n : g.nodes)
    if (n < 2) throw std::invalid_argument("grid needs >= 2 nodes per axis");
  return g;
}

SampledField sample_field(const Grid& grid, const std::function<double(std::span<const double>)>& f) {
  SampledField sf;
  sf.grid = grid;
  sf.values.resize(static_cast<Eigen::Index>(grid.node_count()));
  const int d = grid.dim();
  std::vector<int> iv(static_cast<std::size_t>(d), 0);
  std::vector<double> x(static_cast<std::size_t>(d), 0.0);
  for (std::size_t id = 0; id < grid.node_count(); ++id) {
    grid.coords(id, iv);
    for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] = grid.node_coord(a, iv[static_cast<std::size_t>(a)]);
    sf.values[static_cast<Eigen::Index>(id)] = f(x);
  }
  return sf;
}

}  // namespace invpot::mollify
