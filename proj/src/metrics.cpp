// SPDX-License-Identifier: Apache-2.0

#include "invpot/metrics.hpp"

#include <cmath>
#include <sstream>

#include "invpot/util.hpp"

namespace invpot::cli {

std::string MetricsReport::csv_row() const {
  std::ostringstream os;
  os << util::format_double(re_q) << "," << util::format_double(re_u) << ","
     << util::format_double(re_lap_u);
  return os.str();
}

MeanStd mean_std(std::span<const double> xs) {
  MeanStd ms;
  if (xs.empty()) return ms;
  for (double x : xs) ms.mean += x;
  ms.mean /= static_cast<double>(xs.size());
  double acc = 0.0;
  for (double x : xs) acc += (x - ms.mean) * (x - ms.mean);
  ms.std = xs.size() > 1 ? std::sqrt(acc / static_cast<double>(xs.size() - 1)) : 0.0;
  return ms;
}

MetricsReport evaluate_metrics(const problem::Problem& prob, const net::NetworkSpec& u_spec,
                               const net::ParamSet& u_params, const net::NetworkSpec& q_spec,
                               const net::ParamSet& q_params, int mesh_per_axis) {
  const int d = prob.domain.dim;
  if (u_spec.spatial_dim() != d || q_spec.spatial_dim() != d)
    throw net::ShapeError("checkpoint dimension does not match problem");
  const int n = mesh_per_axis > 0 ? mesh_per_axis : (d == 3 ? 20 : 50);

  // spatial mesh, lexicographic
  std::size_t nspace = 1;
  for (int a = 0; a < d; ++a) nspace *= static_cast<std::size_t>(n);
  auto coord = [&](int a, int i) {
    return prob.domain.lo[a] + (prob.domain.hi[a] - prob.domain.lo[a]) * i / (n - 1.0);
  };

  MetricsReport rep;
  const net::JetEvaluator u_eval(u_spec, u_params);

  // q on the spatial mesh
  {
    double num = 0.0, den = 0.0;
    std::vector<double> x(static_cast<std::size_t>(d));
    std::vector<int> iv(static_cast<std::size_t>(d));
    for (std::size_t id = 0; id < nspace; ++id) {
      std::size_t rem = id;
      for (std::size_t a = static_cast<std::size_t>(d); a-- > 0;) {
        iv[a] = static_cast<int>(rem % static_cast<std::size_t>(n));
        rem /= static_cast<std::size_t>(n);
      }
      for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] = coord(a, iv[static_cast<std::size_t>(a)]);
      const double qe = prob.q_exact(x);
      const double qn = net::forward(q_spec, q_params, x);
      num += (qn - qe) * (qn - qe);
      den += qe * qe;
    }
    rep.re_q = std::sqrt(num / den);
  }

  // u and Lap u on the space-time mesh; accumulate per time slice
  std::vector<double> slice_num(static_cast<std::size_t>(n), 0.0);
  std::vector<double> slice_den(static_cast<std::size_t>(n), 0.0);
  double lap_num = 0.0, lap_den = 0.0;
  {
    std::vector<double> num_k(static_cast<std::size_t>(n), 0.0), den_k(static_cast<std::size_t>(n), 0.0);
    std::vector<double> lap_num_k(static_cast<std::size_t>(n), 0.0), lap_den_k(static_cast<std::size_t>(n), 0.0);
    util::parallel_for_chunks(static_cast<std::size_t>(n), 1, [&](std::size_t, std::size_t lo, std::size_t hi) {
      std::vector<double> xt(static_cast<std::size_t>(d + 1));
      std::vector<int> iv(static_cast<std::size_t>(d));
      net::PointTape tape;
      for (std::size_t k = lo; k < hi; ++k) {
        const double t = prob.domain.T * static_cast<double>(k) / (n - 1.0);
        xt[static_cast<std::size_t>(d)] = t;
        double nu = 0.0, de = 0.0, lnum = 0.0, lden = 0.0;
        for (std::size_t id = 0; id < nspace; ++id) {
          std::size_t rem = id;
          for (std::size_t a = static_cast<std::size_t>(d); a-- > 0;) {
            iv[a] = static_cast<int>(rem % static_cast<std::size_t>(n));
            rem /= static_cast<std::size_t>(n);
          }
          for (int a = 0; a < d; ++a) xt[static_cast<std::size_t>(a)] = coord(a, iv[static_cast<std::size_t>(a)]);
          std::span<const double> x(xt.data(), static_cast<std::size_t>(d));
          const net::Jet& j = u_eval.evaluate(xt, net::JetMode::kSpatialOnly, tape);
          const net::Jet je = prob.u_exact_jet(x, t);
          nu += (j.value - je.value) * (j.value - je.value);
          de += je.value * je.value;
          const double le = je.laplacian();
          const double ln = j.laplacian();
          lnum += (ln - le) * (ln - le);
          lden += le * le;
        }
        num_k[k] = nu;
        den_k[k] = de;
        lap_num_k[k] = lnum;
        lap_den_k[k] = lden;
      }
    });
    for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
      slice_num[k] = num_k[k];
      slice_den[k] = den_k[k];
      lap_num += lap_num_k[k];
      lap_den += lap_den_k[k];
    }
  }
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
    num += slice_num[k];
    den += slice_den[k];
    rep.slice_t.push_back(prob.domain.T * static_cast<double>(k) / (n - 1.0));
    rep.slice_re_u.push_back(std::sqrt(slice_num[k] / std::max(slice_den[k], 1e-300)));
  }
  rep.re_u = std::sqrt(num / den);
  rep.re_lap_u = std::sqrt(lap_num / lap_den);

  // extra slice at t = T/7 (figure parity)
  {
    const double t = prob.domain.T / 7.0;
    std::vector<double> xt(static_cast<std::size_t>(d + 1));
    std::vector<int> iv(static_cast<std::size_t>(d));
    xt[static_cast<std::size_t>(d)] = t;
    net::PointTape tape;
    double nu = 0.0, de = 0.0;
    for (std::size_t id = 0; id < nspace; ++id) {
      std::size_t rem = id;
      for (std::size_t a = static_cast<std::size_t>(d); a-- > 0;) {
        iv[a] = static_cast<int>(rem % static_cast<std::size_t>(n));
        rem /= static_cast<std::size_t>(n);
      }
      for (int a = 0; a < d; ++a) xt[static_cast<std::size_t>(a)] = coord(a, iv[static_cast<std::size_t>(a)]);
      std::span<const double> x(xt.data(), static_cast<std::size_t>(d));
      const net::Jet& j = u_eval.evaluate(xt, net::JetMode::kValueOnly, tape);
      const double ue = prob.u_exact(x, t);
      nu += (j.value - ue) * (j.value - ue);
      de += ue * ue;
    }
    rep.slice_t.push_back(t);
    rep.slice_re_u.push_back(std::sqrt(nu / std::max(de, 1e-300)));
  }
  return rep;
}

}  // namespace invpot::cli
