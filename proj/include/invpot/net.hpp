// SPDX-License-Identifier: Apache-2.0
//
// Fully connected tanh networks u_theta(x,t) and q_eta(x): evaluation,
// input-derivative jets (value, u_t, u_tt, per-axis second derivatives and
// the mixed d^3/(dt dx_i^2) terms) by forward propagation of truncated
// Taylor coefficients, and exact parameter gradients by a reverse pass over
// the recorded coefficient computation.

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "invpot/taylor.hpp"

namespace invpot::net {

enum class Activation { kTanh };

struct NetworkSpec {
  int input_dim = 0;
  int output_dim = 1;
  std::vector<int> widths;  // hidden widths d_1..d_{K-1}
  Activation activation = Activation::kTanh;
  bool has_time = false;  // last input coordinate is t

  int spatial_dim() const { return has_time ? input_dim - 1 : input_dim; }
  int layer_count() const { return static_cast<int>(widths.size()) + 1; }
  void validate() const;
};

NetworkSpec make_spec(int spatial_dim, bool has_time, int hidden_layers, int width);

struct ParamSet {
  std::vector<Eigen::MatrixXd> weights;  // W_k: d_k x d_{k-1}
  std::vector<Eigen::VectorXd> biases;   // b_k: d_k

  std::size_t count() const;
  void set_zero();
  Eigen::VectorXd flatten() const;  // per layer: W row-major, then b
  void unflatten(const Eigen::VectorXd& flat);
  bool all_finite() const;
};

ParamSet zero_params(const NetworkSpec& spec);
// Xavier-uniform initialization, U(+-sqrt(6/(fan_in+fan_out))), seeded.
ParamSet init_params(const NetworkSpec& spec, std::uint64_t seed);

struct Jet {
  double value = 0.0;
  double dt = 0.0;
  double dtt = 0.0;
  Eigen::VectorXd dx;      // first derivatives, length spatial_dim
  Eigen::VectorXd dxx;     // pure second derivatives (Hessian diagonal)
  Eigen::VectorXd dt_dxx;  // d^3 / (dt dx_i^2)

  double laplacian() const { return dxx.sum(); }
  double dt_laplacian() const { return dt_dxx.sum(); }
  bool all_finite() const;
};

// Adjoint seed mirroring Jet; fields not requested stay zero.
struct JetAdjoint {
  double value = 0.0;
  double dt = 0.0;
  double dtt = 0.0;
  Eigen::VectorXd dx, dxx, dt_dxx;

  explicit JetAdjoint(int spatial_dim)
      : dx(Eigen::VectorXd::Zero(spatial_dim)),
        dxx(Eigen::VectorXd::Zero(spatial_dim)),
        dt_dxx(Eigen::VectorXd::Zero(spatial_dim)) {}
};

double forward(const NetworkSpec& spec, const ParamSet& params, std::span<const double> point);
Jet forward_jet(const NetworkSpec& spec, const ParamSet& params, std::span<const double> point);

// Which derivative fields a batch needs; picks the cheapest coefficient algebra.
enum class JetMode : std::uint8_t {
  kValueOnly,    // plain evaluation
  kTimeOnly,     // value, dt, dtt        (spatial boundary)
  kSpatialOnly,  // value, dx, dxx        (initial / data points)
  kFull,         // everything            (interior)
};

// Recorded forward state for one point, reusable across epochs.
// backward() accumulates d(sum_fields seed*field)/d(params) into a gradient.
class PointTape {
 public:
  PointTape() = default;

  const Jet& jet() const { return jet_; }

  // internal storage, managed by JetEvaluator
  struct Pass7 {
    std::vector<taylor::Tay7> pre, act;
  };
  struct Pass3s {
    std::vector<taylor::Tay3s> pre, act;
  };
  struct Pass3t {
    std::vector<taylor::Tay3t> pre, act;
  };
  std::vector<Pass7> full;        // one per spatial direction
  std::vector<Pass3s> spatial;    // one per spatial direction
  Pass3t timeonly;
  std::vector<double> pre_s, act_s;  // scalar pass
  std::vector<double> point;
  JetMode mode = JetMode::kValueOnly;
  Jet jet_;
};

class JetEvaluator {
 public:
  JetEvaluator(const NetworkSpec& spec, const ParamSet& params);

  const NetworkSpec& spec() const { return spec_; }

  // Evaluates at `point` and records intermediates into `tape`.
  const Jet& evaluate(std::span<const double> point, JetMode mode, PointTape& tape) const;

  // Reverse pass for the recorded point; accumulates into `grad`.
  void backward(const PointTape& tape, const JetAdjoint& seed, ParamSet& grad) const;

 private:
  const NetworkSpec& spec_;
  const ParamSet& params_;
};

// Checkpoint round-trip (JSON, exact double round-trip).
std::string to_checkpoint_json(const NetworkSpec& spec, const ParamSet& params);
std::pair<NetworkSpec, ParamSet> from_checkpoint_json(const std::string& json_text);
void save_checkpoint(const std::string& path, const NetworkSpec& u_spec, const ParamSet& u,
                     const NetworkSpec& q_spec, const ParamSet& q);
std::pair<std::pair<NetworkSpec, ParamSet>, std::pair<NetworkSpec, ParamSet>> load_checkpoint(
    const std::string& path);

struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace invpot::net
