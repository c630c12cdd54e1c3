// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>
#include <vector>

namespace invpot::mollify {

// Uniform node lattice over a closed box, lexicographic node order.
struct Grid {
  Eigen::VectorXd lo, hi;
  std::vector<int> nodes;  // nodes per axis, >= 2

  int dim() const { return static_cast<int>(nodes.size()); }
  double spacing(int axis) const {
    return (hi[axis] - lo[axis]) / static_cast<double>(nodes[static_cast<std::size_t>(axis)] - 1);
  }
  std::size_t node_count() const {
    std::size_t n = 1;
    for (int v : nodes) n *= static_cast<std::size_t>(v);
    return n;
  }
  std::size_t index(std::span<const int> iv) const {
    std::size_t id = 0;
    for (std::size_t a = 0; a < nodes.size(); ++a)
      id = id * static_cast<std::size_t>(nodes[a]) + static_cast<std::size_t>(iv[a]);
    return id;
  }
  void coords(std::size_t id, std::span<int> iv) const {
    for (std::size_t a = nodes.size(); a-- > 0;) {
      iv[a] = static_cast<int>(id % static_cast<std::size_t>(nodes[a]));
      id /= static_cast<std::size_t>(nodes[a]);
    }
  }
  double node_coord(int axis, int i) const { return lo[axis] + spacing(axis) * i; }
};

Grid uniform_grid(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, std::span<const int> nodes);

struct SampledField {
  Grid grid;
  Eigen::VectorXd values;
};

SampledField sample_field(const Grid& grid,
                          const std::function<double(std::span<const double>)>& f);

}  // namespace invpot::mollify
