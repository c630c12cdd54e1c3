// SPDX-License-Identifier: Apache-2.0
//
// Training driver: sampling of the four collocation sets, Adam with bias
// correction, the staircase learning-rate schedule, and the epoch loop that
// alternates the q-network and u-network updates.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "invpot/loss.hpp"

namespace invpot::train {

struct AdamState {
  Eigen::VectorXd m, V;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double tau = 1e-3;   // base learning rate
  double fuzz = 1e-8;  // divisor guard

  static AdamState init(Eigen::Index n);
};

// One Adam update (the five-formula form with bias correction), in place.
// `lr` is the scheduled learning rate for this step. Throws NumericError on
// non-finite gradients.
void adam_step(AdamState& state, Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);
void adam_step(AdamState& state, net::ParamSet& params, const net::ParamSet& grad, double lr);

enum class Resample { kOnce, kPerEpoch };

struct TrainConfig {
  int epochs = 10000;
  // collocation counts; n_sb defaults to 256 * (faces of the box)
  int n_int = 256, n_sb = 0, n_tb = 256, n_d = 256;
  double lambda = 1e-2;
  double delta = 0.0;
  double c_eps = 1.0;       // eps = c_eps * delta^{1/3}
  bool relative_noise = false;
  int data_grid_nodes = 0;  // 0 -> problem default (200^2 / 60^3)
  std::uint64_t seed = 1;
  double lr0 = 1e-3;
  int lr_period = 20000;  // tau / 10 every lr_period epochs
  loss::Scheme scheme = loss::Scheme::kSobolev;
  Resample resample = Resample::kOnce;
  bool strict_alternation = false;  // recompute grad_theta after the eta update
  int log_every = 50;
  int checkpoint_every = 1000;
  int metrics_every = 0;  // 0 = no periodic test metrics
  // optional test-metric hook (returns {Re_q, Re_u}), wired up by the CLI
  std::function<std::pair<double, double>(const net::ParamSet&, const net::ParamSet&)>
      test_metrics;
};

double scheduled_lr(const TrainConfig& cfg, int epoch);  // tau0 * 10^{-floor(epoch/period)}

// Uniform collocation sampling: interior on Omega x (0,T], boundary on the
// box faces weighted by face measure with t in (0,T], initial/data in Omega,
// and the Lap-of-data batch in the eps-interior Omega_eps. Deterministic for
// a given seed.
loss::Batches sample_sets(const problem::Problem& prob, const TrainConfig& cfg,
                          std::uint64_t seed, double eps);

struct LogRow {
  int epoch = 0;
  double lr = 0.0;
  loss::LossBreakdown breakdown;
  double re_q = -1.0, re_u = -1.0;  // negative = not evaluated this epoch
};

struct RunResult {
  net::NetworkSpec u_spec, q_spec;
  net::ParamSet u_params, q_params;
  std::vector<LogRow> log;
  int epochs_run = 0;
  bool diverged = false;
};

std::string log_csv_header();
std::string log_csv_row(const LogRow& row);

// Full training run. When `out_dir` is nonempty, writes training_log.csv,
// periodic checkpoint.json and final checkpoint.json there.
RunResult run(const problem::Problem& prob, const net::NetworkSpec& u_spec,
              const net::NetworkSpec& q_spec, const TrainConfig& cfg,
              const std::string& out_dir = "");

}  // namespace invpot::train
