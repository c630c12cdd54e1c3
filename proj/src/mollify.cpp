// SPDX-License-Identifier: Apache-2.0

#include "invpot/mollify.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "invpot/util.hpp"

namespace invpot::mollify {

namespace {

constexpr double kGL4x[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                             0.8611363115940526};
constexpr double kGL4w[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                             0.3478548451374538};

double pi_d_of(int d) {
  switch (d) {
    case 1: return 2.0;
    case 2: return 2.0 * M_PI;
    case 3: return 4.0 * M_PI;
    default: throw std::invalid_argument("mollifier supports dim 1..3");
  }
}

}  // namespace

double MollifierConfig::rho(double t) const {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double u = t * (1.0 - t);
  return c_d * u * u;
}

double MollifierConfig::rho_prime(double t) const {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return c_d * (2.0 * t - 6.0 * t * t + 4.0 * t * t * t);
}

double MollifierConfig::rho_second(double t) const {
  if (t < 0.0 || t >= 1.0) return 0.0;
  return c_d * (2.0 - 12.0 * t + 12.0 * t * t);
}

double MollifierConfig::rho_prime_over_t(double t) const {
  if (t < 0.0 || t >= 1.0) return 0.0;
  return c_d * (2.0 - 6.0 * t + 4.0 * t * t);
}

double MollifierConfig::radial_mass(double u) const {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0 / pi_d;
  const double d = dim;
  return c_d * (std::pow(u, d + 2) / (d + 2) - 2.0 * std::pow(u, d + 3) / (d + 3) +
                std::pow(u, d + 4) / (d + 4));
}

MollifierConfig make_kernel(int dim) {
  MollifierConfig cfg;
  cfg.dim = dim;
  cfg.pi_d = pi_d_of(dim);
  cfg.c_d = static_cast<double>((dim + 2) * (dim + 3) * (dim + 4)) / (2.0 * cfg.pi_d);
  return cfg;
}

MollifierConfig make_config(int dim, double epsilon) {
  MollifierConfig cfg = make_kernel(dim);
  if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  cfg.epsilon = epsilon;
  return cfg;
}

double select_epsilon(double delta, double c_eps) {
  if (delta < 0.0) throw std::invalid_argument("noise level must be >= 0");
  if (delta == 0.0) return 0.0;
  return c_eps * std::cbrt(delta);
}

double Stencil::apply(const SampledField& field) const {
  const Grid& g = field.grid;
  const int d = g.dim();
  double acc = 0.0;
  std::size_t at = 0;
  if (d == 1) {
    for (int i = lo[0]; i <= hi[0]; ++i) acc += w[at++] * field.values[i];
  } else if (d == 2) {
    const int n1 = g.nodes[1];
    for (int i = lo[0]; i <= hi[0]; ++i)
      for (int j = lo[1]; j <= hi[1]; ++j)
        acc += w[at++] * field.values[static_cast<Eigen::Index>(i) * n1 + j];
  } else {
    const int n1 = g.nodes[1], n2 = g.nodes[2];
    for (int i = lo[0]; i <= hi[0]; ++i)
      for (int j = lo[1]; j <= hi[1]; ++j)
        for (int k = lo[2]; k <= hi[2]; ++k)
          acc += w[at++] *
                 field.values[(static_cast<Eigen::Index>(i) * n1 + j) * n2 + k];
  }
  return acc;
}

namespace {

// Builds cell-average weights for a kernel of the form div(g(r) rhat) by
// Gauss flux integrals over node-cell faces; faces shared by two cells are
// computed once, so the weights telescope exactly.
template <class GFun>
Stencil flux_stencil(const MollifierConfig& cfg, const Grid& grid, std::span<const double> x,
                     GFun&& gfun) {
  const int d = grid.dim();
  if (d != cfg.dim) throw std::invalid_argument("field dimension does not match mollifier");
  const double eps = cfg.epsilon;
  for (int a = 0; a < d; ++a) {
    if (eps <= 2.0 * grid.spacing(a))
      throw ResolutionError("mollifier radius must exceed twice the grid spacing");
  }

  Stencil st;
  std::array<int, 3> n{1, 1, 1};
  std::array<double, 3> h{1.0, 1.0, 1.0};
  for (int a = 0; a < d; ++a) {
    h[static_cast<std::size_t>(a)] = grid.spacing(a);
    const double ha = h[static_cast<std::size_t>(a)];
    int a0 = static_cast<int>(std::floor((x[a] - eps - grid.lo[a]) / ha)) - 1;
    int a1 = static_cast<int>(std::ceil((x[a] + eps - grid.lo[a]) / ha)) + 1;
    a0 = std::max(a0, 0);
    a1 = std::min(a1, grid.nodes[static_cast<std::size_t>(a)] - 1);
    st.lo[static_cast<std::size_t>(a)] = a0;
    st.hi[static_cast<std::size_t>(a)] = a1;
    n[static_cast<std::size_t>(a)] = a1 - a0 + 1;
  }

  // Face coordinate per axis: cell around node i spans
  // [max(lo, xi - h/2), min(hi, xi + h/2)]; face k of axis a sits at
  // fc(a, lo[a]+k-1/2) clamped into the domain.
  auto face_coord = [&](int a, int k) {
    const double v = grid.lo[a] + h[static_cast<std::size_t>(a)] * (st.lo[static_cast<std::size_t>(a)] + k - 0.5);
    return std::clamp(v, grid.lo[a], grid.hi[a]);
  };

  const std::size_t cells = static_cast<std::size_t>(n[0]) * static_cast<std::size_t>(n[1]) *
                            static_cast<std::size_t>(n[2]);
  st.w.assign(cells, 0.0);

  auto flux_value = [&](const std::array<double, 3>& y, int axis) {
    // g(r) * (y-x)[axis] / r ; radial field component through a face
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      const double dv = y[static_cast<std::size_t>(a)] - x[a];
      r2 += dv * dv;
    }
    const double r = std::sqrt(r2);
    if (r < 1e-300) return 0.0;
    return gfun(r) * (y[static_cast<std::size_t>(axis)] - x[axis]) / r;
  };

  // accumulate signed fluxes axis by axis
  for (int axis = 0; axis < d; ++axis) {
    const int nf = n[static_cast<std::size_t>(axis)] + 1;
    // iterate faces: cross-section = cells of the other axes
    std::array<int, 3> cn = n;
    cn[static_cast<std::size_t>(axis)] = nf;
    for (int fi = 0; fi < cn[0]; ++fi) {
      for (int fj = 0; fj < cn[1]; ++fj) {
        for (int fk = 0; fk < cn[2]; ++fk) {
          const std::array<int, 3> f{fi, fj, fk};
          std::array<double, 3> y{0.0, 0.0, 0.0};
          y[static_cast<std::size_t>(axis)] = face_coord(axis, f[static_cast<std::size_t>(axis)]);
          // quick reject: face outside the kernel ball
          // (cheap bound: per-axis distance)
          double integral = 0.0;
          if (d == 1) {
            integral = flux_value(y, axis);
          } else if (d == 2) {
            const int oa = 1 - axis;
            const double c0 = face_coord(oa, f[static_cast<std::size_t>(oa)]);
            const double c1 = face_coord(oa, f[static_cast<std::size_t>(oa)] + 1);
            const double half = 0.5 * (c1 - c0), mid = 0.5 * (c0 + c1);
            if (c1 > c0) {
              for (int q = 0; q < 4; ++q) {
                y[static_cast<std::size_t>(oa)] = mid + half * kGL4x[q];
                integral += kGL4w[q] * flux_value(y, axis);
              }
              integral *= half;
            }
          } else {
            const int oa = (axis == 0) ? 1 : 0;
            const int ob = (axis == 2) ? 1 : 2;
            const double a0c = face_coord(oa, f[static_cast<std::size_t>(oa)]);
            const double a1c = face_coord(oa, f[static_cast<std::size_t>(oa)] + 1);
            const double b0c = face_coord(ob, f[static_cast<std::size_t>(ob)]);
            const double b1c = face_coord(ob, f[static_cast<std::size_t>(ob)] + 1);
            const double ah = 0.5 * (a1c - a0c), am = 0.5 * (a0c + a1c);
            const double bh = 0.5 * (b1c - b0c), bm = 0.5 * (b0c + b1c);
            if (a1c > a0c && b1c > b0c) {
              for (int qa = 0; qa < 4; ++qa) {
                y[static_cast<std::size_t>(oa)] = am + ah * kGL4x[qa];
                double inner = 0.0;
                for (int qb = 0; qb < 4; ++qb) {
                  y[static_cast<std::size_t>(ob)] = bm + bh * kGL4x[qb];
                  inner += kGL4w[qb] * flux_value(y, axis);
                }
                integral += kGL4w[qa] * inner;
              }
              integral *= ah * bh;
            }
          }
          if (integral == 0.0) continue;
          // face f contributes +integral to the lower cell (index f[axis]-1)
          // and -integral to the upper cell (index f[axis])
          std::array<int, 3> cell = f;
          for (int s = 0; s < 2; ++s) {
            cell[static_cast<std::size_t>(axis)] = f[static_cast<std::size_t>(axis)] - 1 + s;
            const int ci = cell[static_cast<std::size_t>(axis)];
            if (ci < 0 || ci >= n[static_cast<std::size_t>(axis)]) continue;
            const std::size_t idx =
                (static_cast<std::size_t>(cell[0]) * static_cast<std::size_t>(n[1]) +
                 static_cast<std::size_t>(cell[1])) *
                    static_cast<std::size_t>(n[2]) +
                static_cast<std::size_t>(cell[2]);
            st.w[idx] += (s == 0) ? integral : -integral;
          }
        }
      }
    }
  }
  st.wsum = 0.0;
  for (double v : st.w) st.wsum += v;
  return st;
}

}  // namespace

Stencil mollify_stencil(const MollifierConfig& cfg, const Grid& grid, std::span<const double> x) {
  const double eps = cfg.epsilon;
  return flux_stencil(cfg, grid, x, [&cfg, eps](double r) {
    // V = r^{1-d} Q(r/eps) rhat  =>  div V = rho_eps(r)
    return std::pow(r, 1 - cfg.dim) * cfg.radial_mass(r / eps);
  });
}

Stencil laplacian_stencil(const MollifierConfig& cfg, const Grid& grid, std::span<const double> x) {
  const double eps = cfg.epsilon;
  const double scale = std::pow(eps, -cfg.dim - 1);
  return flux_stencil(cfg, grid, x, [&cfg, eps, scale](double r) {
    // V = grad rho_eps = eps^{-d-1} rho'(r/eps) rhat  =>  div V = Lap rho_eps
    return scale * cfg.rho_prime(r / eps);
  });
}

double mollify(const MollifierConfig& cfg, const SampledField& field, std::span<const double> x) {
  const Stencil st = mollify_stencil(cfg, field.grid, x);
  if (st.wsum <= 0.0) throw ResolutionError("mollifier support does not intersect the grid");
  return st.apply(field) / st.wsum;
}

double mollify_laplacian(const MollifierConfig& cfg, const SampledField& field,
                         std::span<const double> x) {
  const Stencil lap = laplacian_stencil(cfg, field.grid, x);
  // zero-mass correction; exact no-op for interior points (wsum ~ 1e-13)
  const double g = mollify(cfg, field, x);
  return lap.apply(field) - lap.wsum * g;
}

RateStudyResult rate_study(const problem::Problem& prob, std::vector<double> deltas, int trials,
                           std::uint64_t seed, double c_eps, double ratio, int test_points) {
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  const int d = prob.domain.dim;
  RateStudyResult out;

  for (std::size_t di = 0; di < deltas.size(); ++di) {
    const double delta = deltas[di];
    const double eps = select_epsilon(delta, c_eps);
    RateRow row{delta, eps, 0.0, trials};
    if (delta == 0.0) {
      out.rows.push_back(row);
      continue;
    }
    const MollifierConfig cfg = make_config(d, eps);

    // per-delta grid resolving the kernel: spacing ~ eps/ratio
    std::vector<int> nodes(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
      const double len = prob.domain.hi[a] - prob.domain.lo[a];
      nodes[static_cast<std::size_t>(a)] = static_cast<int>(std::ceil(len * ratio / eps)) + 1;
    }
    const Grid grid = uniform_grid(prob.domain.lo, prob.domain.hi, nodes);
    const SampledField clean = sample_field(grid, prob.phi);

    // grid-aligned interior test points near the domain center
    std::vector<std::vector<double>> pts;
    std::vector<Stencil> lap_st, mol_st;
    {
      std::vector<double> center(static_cast<std::size_t>(d));
      std::vector<int> iv(static_cast<std::size_t>(d));
      for (int a = 0; a < d; ++a) {
        const double c = 0.5 * (prob.domain.lo[a] + prob.domain.hi[a]);
        iv[static_cast<std::size_t>(a)] = static_cast<int>(std::lround((c - grid.lo[a]) / grid.spacing(a)));
      }
      for (int p = 0; p < test_points; ++p) {
        // walk outward along axis 0 in steps of one node, staying interior
        std::vector<int> jv = iv;
        jv[0] += p;
        std::vector<double> xp(static_cast<std::size_t>(d));
        for (int a = 0; a < d; ++a) xp[static_cast<std::size_t>(a)] = grid.node_coord(a, jv[static_cast<std::size_t>(a)]);
        if (prob.domain.boundary_distance(xp) <= eps) break;
        pts.push_back(xp);
        lap_st.push_back(laplacian_stencil(cfg, grid, xp));
        mol_st.push_back(mollify_stencil(cfg, grid, xp));
      }
    }
    if (pts.empty()) throw ResolutionError("no interior test point with boundary distance > eps");

    double acc = 0.0;
    for (int tr = 0; tr < trials; ++tr) {
      const std::uint64_t tseed = util::derive_seed(seed, di * 1000003ULL + static_cast<std::uint64_t>(tr));
      const problem::Measurement meas = problem::add_noise(clean, delta, tseed);
      double sup = 0.0;
      for (std::size_t p = 0; p < pts.size(); ++p) {
        const double g = mol_st[p].apply(meas.noisy) / mol_st[p].wsum;
        const double lap = lap_st[p].apply(meas.noisy) - lap_st[p].wsum * g;
        sup = std::max(sup, std::abs(lap - prob.laplacian_phi(pts[p])));
      }
      acc += sup;
    }
    row.sup_error = acc / trials;
    out.rows.push_back(row);
  }

  // log-log least squares slope over rows with positive delta and error
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (const auto& r : out.rows) {
    if (r.delta <= 0.0 || r.sup_error <= 0.0) continue;
    const double lx = std::log(r.delta), ly = std::log(r.sup_error);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  out.slope = (m >= 2) ? (m * sxy - sx * sy) / (m * sxx - sx * sx) : 0.0;
  return out;
}

void write_rate_csv(const RateStudyResult& result, std::ostream& os) {
  os << "delta,epsilon,sup_error,trials\n";
  for (const auto& r : result.rows)
    os << r.delta << "," << r.epsilon << "," << r.sup_error << "," << r.trials << "\n";
}

}  // namespace invpot::mollify
