// SPDX-License-Identifier: Apache-2.0

#include "invpot/train.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "invpot/mollify.hpp"
#include "invpot/util.hpp"

namespace invpot::train {

AdamState AdamState::init(Eigen::Index n) {
  AdamState st;
  st.m = Eigen::VectorXd::Zero(n);
  st.V = Eigen::VectorXd::Zero(n);
  return st;
}

void adam_step(AdamState& st, Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
  if (params.size() != st.m.size() || grad.size() != st.m.size())
    throw net::ShapeError("adam_step: size mismatch");
  if (!grad.allFinite()) throw net::NumericError("adam_step: non-finite gradient");
  st.t += 1;
  const double b1t = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
  const double b2t = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double gi = grad[i];
    st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * gi;
    st.V[i] = st.beta2 * st.V[i] + (1.0 - st.beta2) * gi * gi;
    const double mhat = st.m[i] / b1t;
    const double vhat = st.V[i] / b2t;
    params[i] -= lr * mhat / (std::sqrt(vhat) + st.fuzz);
  }
}

void adam_step(AdamState& st, net::ParamSet& params, const net::ParamSet& grad, double lr) {
  Eigen::VectorXd flat = params.flatten();
  const Eigen::VectorXd g = grad.flatten();
  adam_step(st, flat, g, lr);
  params.unflatten(flat);
}

double scheduled_lr(const TrainConfig& cfg, int epoch) {
  return cfg.lr0 * std::pow(10.0, -static_cast<double>(epoch / cfg.lr_period));
}

namespace {

class Uniform {
 public:
  explicit Uniform(std::uint64_t seed) : rng_(seed) {}
  double operator()() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

loss::Batches sample_sets(const problem::Problem& prob, const TrainConfig& cfg,
                          std::uint64_t seed, double eps) {
  const problem::Domain& dom = prob.domain;
  const int d = dom.dim;
  const int n_sb = cfg.n_sb > 0 ? cfg.n_sb : cfg.n_d * 2 * d;
  Uniform u(seed);

  loss::Batches out;
  out.interior.kind = residual::BatchKind::kInterior;
  out.interior.points.resize(cfg.n_int, d + 1);
  for (int i = 0; i < cfg.n_int; ++i) {
    for (int a = 0; a < d; ++a) out.interior.points(i, a) = dom.lo[a] + u() * (dom.hi[a] - dom.lo[a]);
    out.interior.points(i, d) = dom.T * (1.0 - u());  // t in (0, T]
  }

  // faces weighted by measure
  std::vector<double> cum(static_cast<std::size_t>(2 * d));
  {
    double total = 0.0;
    for (int f = 0; f < 2 * d; ++f) {
      double face = 1.0;
      for (int b = 0; b < d; ++b)
        if (b != f / 2) face *= dom.hi[b] - dom.lo[b];
      total += face;
      cum[static_cast<std::size_t>(f)] = total;
    }
    for (auto& c : cum) c /= total;
  }
  out.boundary.kind = residual::BatchKind::kSpatialBoundary;
  out.boundary.points.resize(n_sb, d + 1);
  for (int i = 0; i < n_sb; ++i) {
    const double pick = u();
    int face = 0;
    while (face < 2 * d - 1 && pick > cum[static_cast<std::size_t>(face)]) ++face;
    for (int a = 0; a < d; ++a) out.boundary.points(i, a) = dom.lo[a] + u() * (dom.hi[a] - dom.lo[a]);
    out.boundary.points(i, face / 2) = (face % 2 == 0) ? dom.lo[face / 2] : dom.hi[face / 2];
    out.boundary.points(i, d) = dom.T * (1.0 - u());
  }

  out.initial.kind = residual::BatchKind::kInitial;
  out.initial.points.resize(cfg.n_tb, d);
  for (int i = 0; i < cfg.n_tb; ++i)
    for (int a = 0; a < d; ++a) out.initial.points(i, a) = dom.lo[a] + u() * (dom.hi[a] - dom.lo[a]);

  out.data.kind = residual::BatchKind::kData;
  out.data.points.resize(cfg.n_d, d);
  for (int i = 0; i < cfg.n_d; ++i)
    for (int a = 0; a < d; ++a) out.data.points(i, a) = dom.lo[a] + u() * (dom.hi[a] - dom.lo[a]);

  // Lap-of-data points restricted to Omega_eps (where the mollified
  // Laplacian obeys the delta^{1/3} estimate)
  out.data_lap.kind = residual::BatchKind::kData;
  out.data_lap.points.resize(cfg.n_d, d);
  for (int i = 0; i < cfg.n_d; ++i)
    for (int a = 0; a < d; ++a) {
      const double lo = dom.lo[a] + eps, hi = dom.hi[a] - eps;
      if (hi <= lo) throw std::invalid_argument("epsilon too large for the domain");
      out.data_lap.points(i, a) = lo + u() * (hi - lo);
    }
  return out;
}

std::string log_csv_header() {
  return "epoch,lr," + loss::LossBreakdown::csv_header() + ",Re_q,Re_u";
}

std::string log_csv_row(const LogRow& row) {
  std::ostringstream os;
  os << row.epoch << "," << util::format_double(row.lr) << "," << row.breakdown.csv_row() << ",";
  if (row.re_q >= 0.0) os << util::format_double(row.re_q);
  os << ",";
  if (row.re_u >= 0.0) os << util::format_double(row.re_u);
  return os.str();
}

namespace {

// G_eps phi^delta at the data points and Lap G_eps phi^delta at the
// Lap-data points; analytic fields when delta = 0 (identity mollifier).
void prepare_mollified(const problem::Problem& prob, const TrainConfig& cfg, double eps,
                       const loss::Batches& batches, Eigen::VectorXd& g_phi,
                       Eigen::VectorXd& lap_g_phi) {
  const int n = batches.data.count();
  const int n1 = batches.data_lap.count();
  g_phi.resize(n);
  lap_g_phi.resize(n1);
  const int d = prob.domain.dim;
  if (cfg.delta == 0.0) {
    for (int i = 0; i < n; ++i) {
      const auto row = batches.data.points.row(i);
      g_phi[i] = prob.phi(std::span<const double>(row.data(), static_cast<std::size_t>(d)));
    }
    for (int i = 0; i < n1; ++i) {
      const auto row = batches.data_lap.points.row(i);
      lap_g_phi[i] =
          prob.laplacian_phi(std::span<const double>(row.data(), static_cast<std::size_t>(d)));
    }
    return;
  }
  const problem::Measurement meas = problem::make_measurement(
      prob, cfg.delta, util::derive_seed(cfg.seed, 0xDA7A), cfg.data_grid_nodes,
      cfg.relative_noise);
  const mollify::MollifierConfig mc = mollify::make_config(d, eps);
  util::parallel_for_chunks(static_cast<std::size_t>(n), 16, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto row = batches.data.points.row(static_cast<int>(i));
      g_phi[static_cast<Eigen::Index>(i)] = mollify::mollify(
          mc, meas.noisy, std::span<const double>(row.data(), static_cast<std::size_t>(d)));
    }
  });
  util::parallel_for_chunks(static_cast<std::size_t>(n1), 16, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const auto row = batches.data_lap.points.row(static_cast<int>(i));
      lap_g_phi[static_cast<Eigen::Index>(i)] = mollify::mollify_laplacian(
          mc, meas.noisy, std::span<const double>(row.data(), static_cast<std::size_t>(d)));
    }
  });
}

void write_log(const std::string& dir, const std::vector<LogRow>& log) {
  std::ofstream os(dir + "/training_log.csv", std::ios::binary);
  os << log_csv_header() << "\n";
  for (const auto& row : log) os << log_csv_row(row) << "\n";
}

}  // namespace

RunResult run(const problem::Problem& prob, const net::NetworkSpec& u_spec,
              const net::NetworkSpec& q_spec, const TrainConfig& cfg, const std::string& out_dir) {
  u_spec.validate();
  q_spec.validate();
  if (cfg.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  RunResult res;
  res.u_spec = u_spec;
  res.q_spec = q_spec;
  res.u_params = net::init_params(u_spec, util::derive_seed(cfg.seed, 0x0001));
  res.q_params = net::init_params(q_spec, util::derive_seed(cfg.seed, 0x0002));

  const double eps = mollify::select_epsilon(cfg.delta, cfg.c_eps);
  const std::uint64_t sets_seed = util::derive_seed(cfg.seed, 0x5E75);
  loss::Batches batches = sample_sets(prob, cfg, sets_seed, eps);

  Eigen::VectorXd g_phi, lap_g_phi;
  prepare_mollified(prob, cfg, eps, batches, g_phi, lap_g_phi);
  const loss::QuadratureRule rule = loss::make_rule(prob.domain, batches, eps);

  net::Graph graph;
  const int u_id = graph.add_net(u_spec, res.u_params);
  const int q_id = graph.add_net(q_spec, res.q_params);
  loss::LossBindings bindings;
  const loss::GraphLoss gl = loss::emit_loss(graph, u_id, q_id, prob, batches, g_phi, lap_g_phi,
                                             rule, cfg.lambda, cfg.scheme, &bindings);

  AdamState adam_u = AdamState::init(static_cast<Eigen::Index>(res.u_params.count()));
  AdamState adam_q = AdamState::init(static_cast<Eigen::Index>(res.q_params.count()));
  adam_u.tau = cfg.lr0;
  adam_q.tau = cfg.lr0;

  net::ParamSet best_u = res.u_params, best_q = res.q_params;  // last good checkpoint

  auto emit_checkpoint = [&](const std::string& name) {
    if (out_dir.empty()) return;
    net::save_checkpoint(out_dir + "/" + name, u_spec, res.u_params, q_spec, res.q_params);
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.resample == Resample::kPerEpoch && epoch > 1) {
      const loss::Batches fresh =
          sample_sets(prob, cfg, util::derive_seed(sets_seed, static_cast<std::uint64_t>(epoch)), eps);
      batches.interior = fresh.interior;
      batches.boundary = fresh.boundary;
      batches.initial = fresh.initial;
      // data locations are fixed measurements; only PDE-side sets are redrawn
      loss::rebind_pde_batches(graph, bindings, prob, batches);
    }

    graph.forward();
    const double total = graph.value(gl.total);
    if (!std::isfinite(total) || total > 1e12) {
      res.u_params = best_u;
      res.q_params = best_q;
      res.diverged = true;
      res.epochs_run = epoch - 1;
      emit_checkpoint("checkpoint.json");
      if (!out_dir.empty()) write_log(out_dir, res.log);
      return res;
    }

    const double lr = scheduled_lr(cfg, epoch);
    auto grads = graph.backward(gl.total);
    // Algorithm-1 order: eta first, then theta
    adam_step(adam_q, res.q_params, grads[static_cast<std::size_t>(q_id)], lr);
    if (cfg.strict_alternation) {
      graph.forward();
      grads = graph.backward(gl.total);
    }
    adam_step(adam_u, res.u_params, grads[static_cast<std::size_t>(u_id)], lr);

    if (epoch % cfg.log_every == 0 || epoch == 1 || epoch == cfg.epochs) {
      LogRow row;
      row.epoch = epoch;
      row.lr = lr;
      row.breakdown = gl.snapshot(graph, cfg.lambda, cfg.scheme);
      if (cfg.metrics_every > 0 && cfg.test_metrics &&
          (epoch % cfg.metrics_every == 0 || epoch == cfg.epochs)) {
        const auto [re_q, re_u] = cfg.test_metrics(res.u_params, res.q_params);
        row.re_q = re_q;
        row.re_u = re_u;
      }
      res.log.push_back(row);
    }
    if (cfg.checkpoint_every > 0 && epoch % cfg.checkpoint_every == 0) {
      best_u = res.u_params;
      best_q = res.q_params;
      emit_checkpoint("checkpoint.json");
    }
    res.epochs_run = epoch;
  }

  emit_checkpoint("checkpoint.json");
  if (!out_dir.empty()) write_log(out_dir, res.log);
  return res;
}

}  // namespace invpot::train
