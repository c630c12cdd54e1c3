// SPDX-License-Identifier: Apache-2.0

#include "invpot/net.hpp"

#include <fstream>
#include <random>

#include "json.hpp"

namespace invpot::net {

using taylor::Tay3s;
using taylor::Tay3t;
using taylor::Tay7;

void NetworkSpec::validate() const {
  if (input_dim < 1) throw ShapeError("network input_dim must be >= 1");
  if (output_dim != 1) throw ShapeError("only scalar outputs are supported");
  for (int w : widths)
    if (w < 1) throw ShapeError("hidden widths must be >= 1");
  if (has_time && input_dim < 2) throw ShapeError("time-dependent network needs a spatial input");
}

NetworkSpec make_spec(int spatial_dim, bool has_time, int hidden_layers, int width) {
  NetworkSpec s;
  s.input_dim = spatial_dim + (has_time ? 1 : 0);
  s.has_time = has_time;
  s.widths.assign(static_cast<std::size_t>(hidden_layers), width);
  s.validate();
  return s;
}

std::size_t ParamSet::count() const {
  std::size_t n = 0;
  for (std::size_t k = 0; k < weights.size(); ++k)
    n += static_cast<std::size_t>(weights[k].size()) + static_cast<std::size_t>(biases[k].size());
  return n;
}

void ParamSet::set_zero() {
  for (auto& W : weights) W.setZero();
  for (auto& b : biases) b.setZero();
}

Eigen::VectorXd ParamSet::flatten() const {
  Eigen::VectorXd flat(count());
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const auto& W = weights[k];
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) flat[at++] = W(i, j);
    for (Eigen::Index i = 0; i < biases[k].size(); ++i) flat[at++] = biases[k][i];
  }
  return flat;
}

void ParamSet::unflatten(const Eigen::VectorXd& flat) {
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    auto& W = weights[k];
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = flat[at++];
    for (Eigen::Index i = 0; i < biases[k].size(); ++i) biases[k][i] = flat[at++];
  }
  if (at != flat.size()) throw ShapeError("flat parameter vector has wrong length");
}

bool ParamSet::all_finite() const {
  for (const auto& W : weights)
    if (!W.allFinite()) return false;
  for (const auto& b : biases)
    if (!b.allFinite()) return false;
  return true;
}

ParamSet zero_params(const NetworkSpec& spec) {
  spec.validate();
  ParamSet p;
  int prev = spec.input_dim;
  for (int w : spec.widths) {
    p.weights.emplace_back(Eigen::MatrixXd::Zero(w, prev));
    p.biases.emplace_back(Eigen::VectorXd::Zero(w));
    prev = w;
  }
  p.weights.emplace_back(Eigen::MatrixXd::Zero(spec.output_dim, prev));
  p.biases.emplace_back(Eigen::VectorXd::Zero(spec.output_dim));
  return p;
}

ParamSet init_params(const NetworkSpec& spec, std::uint64_t seed) {
  ParamSet p = zero_params(spec);
  std::mt19937_64 rng(seed);
  auto uniform01 = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  for (std::size_t k = 0; k < p.weights.size(); ++k) {
    auto& W = p.weights[k];
    const double lim = std::sqrt(6.0 / static_cast<double>(W.rows() + W.cols()));
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j) W(i, j) = (2.0 * uniform01() - 1.0) * lim;
    // biases stay zero
  }
  return p;
}

bool Jet::all_finite() const {
  return std::isfinite(value) && std::isfinite(dt) && std::isfinite(dtt) && dx.allFinite() &&
         dxx.allFinite() && dt_dxx.allFinite();
}

namespace {

void check_shapes(const NetworkSpec& spec, const ParamSet& ps) {
  const std::size_t layers = spec.widths.size() + 1;
  if (ps.weights.size() != layers || ps.biases.size() != layers)
    throw ShapeError("parameter set does not match network depth");
  int prev = spec.input_dim;
  for (std::size_t k = 0; k < spec.widths.size(); ++k) {
    if (ps.weights[k].rows() != spec.widths[k] || ps.weights[k].cols() != prev ||
        ps.biases[k].size() != spec.widths[k])
      throw ShapeError("parameter set does not match layer " + std::to_string(k));
    prev = spec.widths[k];
  }
  if (ps.weights.back().rows() != spec.output_dim || ps.weights.back().cols() != prev ||
      ps.biases.back().size() != spec.output_dim)
    throw ShapeError("parameter set does not match output layer");
}

// Seeds the input coefficient vector for one pass. `dir` is the spatial
// direction carried in the s slot (ignored for Tay3t / scalar passes).
template <class P>
void seed_input(const NetworkSpec& spec, std::span<const double> pt, int dir, std::vector<P>& in);

template <>
void seed_input<Tay7>(const NetworkSpec& spec, std::span<const double> pt, int dir,
                      std::vector<Tay7>& in) {
  in.assign(pt.size(), Tay7{});
  for (std::size_t j = 0; j < pt.size(); ++j) in[j].c[0] = pt[j];
  in[static_cast<std::size_t>(dir)].c[1] = 1.0;
  if (spec.has_time) in[pt.size() - 1].c[3] = 1.0;
}

template <>
void seed_input<Tay3s>(const NetworkSpec&, std::span<const double> pt, int dir,
                       std::vector<Tay3s>& in) {
  in.assign(pt.size(), Tay3s{});
  for (std::size_t j = 0; j < pt.size(); ++j) in[j].c[0] = pt[j];
  in[static_cast<std::size_t>(dir)].c[1] = 1.0;
}

template <>
void seed_input<Tay3t>(const NetworkSpec& spec, std::span<const double> pt, int,
                       std::vector<Tay3t>& in) {
  in.assign(pt.size(), Tay3t{});
  for (std::size_t j = 0; j < pt.size(); ++j) in[j].c[0] = pt[j];
  if (spec.has_time) in[pt.size() - 1].c[1] = 1.0;
}

template <>
void seed_input<double>(const NetworkSpec&, std::span<const double> pt, int,
                        std::vector<double>& in) {
  in.assign(pt.begin(), pt.end());
}

// Forward through all layers with a fixed accumulation order; `pre`/`act`
// hold the hidden-layer intermediates flattened layer by layer.
template <class P>
P forward_impl(const NetworkSpec& spec, const ParamSet& ps, const std::vector<P>& input,
               std::vector<P>& pre, std::vector<P>& act) {
  std::size_t total = 0;
  for (int w : spec.widths) total += static_cast<std::size_t>(w);
  pre.resize(total);
  act.resize(total);

  const P* prev = input.data();
  std::size_t off = 0;
  for (std::size_t k = 0; k < spec.widths.size(); ++k) {
    const auto& W = ps.weights[k];
    const auto& b = ps.biases[k];
    const int rows = static_cast<int>(W.rows());
    const int cols = static_cast<int>(W.cols());
    for (int i = 0; i < rows; ++i) {
      P acc = taylor::constant<P>(b[i]);
      for (int j = 0; j < cols; ++j) taylor::axpy(acc, W(i, j), prev[j]);
      pre[off + i] = acc;
      act[off + i] = taylor::tanh_poly(acc);
    }
    prev = act.data() + off;
    off += static_cast<std::size_t>(rows);
  }
  const auto& WK = ps.weights.back();
  P out = taylor::constant<P>(ps.biases.back()[0]);
  for (int j = 0; j < WK.cols(); ++j) taylor::axpy(out, WK(0, j), prev[j]);
  return out;
}

// Reverse pass mirroring forward_impl. Accumulates into `grad`.
template <class P>
void backward_impl(const NetworkSpec& spec, const ParamSet& ps, const std::vector<P>& input,
                   const std::vector<P>& pre, const std::vector<P>& act, const P& out_bar,
                   ParamSet& grad) {
  thread_local std::vector<P> zbar, abar;
  thread_local std::vector<std::size_t> off;
  off.assign(spec.widths.size(), 0);
  for (std::size_t k = 1; k < spec.widths.size(); ++k)
    off[k] = off[k - 1] + static_cast<std::size_t>(spec.widths[k - 1]);

  // output layer
  const auto& WK = ps.weights.back();
  auto& gWK = grad.weights.back();
  const P* zlast = spec.widths.empty() ? input.data() : act.data() + off[spec.widths.size() - 1];
  for (int j = 0; j < WK.cols(); ++j) gWK(0, j) += taylor::dot(out_bar, zlast[j]);
  grad.biases.back()[0] += taylor::value_of(out_bar);
  if (spec.widths.empty()) return;
  zbar.assign(static_cast<std::size_t>(spec.widths.back()), P{});
  for (int j = 0; j < WK.cols(); ++j) taylor::axpy(zbar[static_cast<std::size_t>(j)], WK(0, j), out_bar);

  for (std::size_t k = spec.widths.size(); k-- > 0;) {
    const int rows = spec.widths[k];
    const P* prev = (k == 0) ? input.data() : act.data() + off[k - 1];
    const int cols = (k == 0) ? spec.input_dim : spec.widths[k - 1];
    const auto& W = ps.weights[k];
    auto& gW = grad.weights[k];
    auto& gb = grad.biases[k];

    abar.assign(static_cast<std::size_t>(rows), P{});
    for (int i = 0; i < rows; ++i) {
      const P sp = taylor::tanh_prime_poly(pre[off[k] + static_cast<std::size_t>(i)]);
      taylor::mul_adjoint(abar[static_cast<std::size_t>(i)], zbar[static_cast<std::size_t>(i)], sp);
      gb[i] += taylor::value_of(abar[static_cast<std::size_t>(i)]);
      for (int j = 0; j < cols; ++j)
        gW(i, j) += taylor::dot(abar[static_cast<std::size_t>(i)], prev[j]);
    }
    if (k > 0) {
      zbar.assign(static_cast<std::size_t>(cols), P{});
      for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
          taylor::axpy(zbar[static_cast<std::size_t>(j)], W(i, j), abar[static_cast<std::size_t>(i)]);
    }
  }
}

}  // namespace

double forward(const NetworkSpec& spec, const ParamSet& params, std::span<const double> point) {
  spec.validate();
  check_shapes(spec, params);
  if (static_cast<int>(point.size()) != spec.input_dim)
    throw ShapeError("point dimension does not match network input");
  thread_local std::vector<double> in, pre, act;
  seed_input<double>(spec, point, 0, in);
  return forward_impl<double>(spec, params, in, pre, act);
}

JetEvaluator::JetEvaluator(const NetworkSpec& spec, const ParamSet& params)
    : spec_(spec), params_(params) {
  spec_.validate();
  check_shapes(spec_, params_);
}

const Jet& JetEvaluator::evaluate(std::span<const double> point, JetMode mode,
                                  PointTape& tape) const {
  if (static_cast<int>(point.size()) != spec_.input_dim)
    throw ShapeError("point dimension does not match network input");
  const int d = spec_.spatial_dim();
  tape.point.assign(point.begin(), point.end());
  tape.mode = mode;
  Jet& jet = tape.jet_;
  jet.value = jet.dt = jet.dtt = 0.0;
  if (jet.dx.size() != d) {
    jet.dx.resize(d);
    jet.dxx.resize(d);
    jet.dt_dxx.resize(d);
  }
  jet.dx.setZero();
  jet.dxx.setZero();
  jet.dt_dxx.setZero();

  thread_local std::vector<Tay7> in7;
  thread_local std::vector<Tay3s> in3s;
  thread_local std::vector<Tay3t> in3t;
  thread_local std::vector<double> ins;

  switch (mode) {
    case JetMode::kValueOnly: {
      seed_input<double>(spec_, point, 0, ins);
      tape.pre_s.clear();
      tape.act_s.clear();
      jet.value = forward_impl<double>(spec_, params_, ins, tape.pre_s, tape.act_s);
      break;
    }
    case JetMode::kTimeOnly: {
      seed_input<Tay3t>(spec_, point, 0, in3t);
      const Tay3t out = forward_impl<Tay3t>(spec_, params_, in3t, tape.timeonly.pre, tape.timeonly.act);
      jet.value = out.c[0];
      jet.dt = out.c[1];
      jet.dtt = 2.0 * out.c[2];
      break;
    }
    case JetMode::kSpatialOnly: {
      tape.spatial.resize(static_cast<std::size_t>(d));
      for (int dir = 0; dir < d; ++dir) {
        seed_input<Tay3s>(spec_, point, dir, in3s);
        auto& pass = tape.spatial[static_cast<std::size_t>(dir)];
        const Tay3s out = forward_impl<Tay3s>(spec_, params_, in3s, pass.pre, pass.act);
        if (dir == 0) jet.value = out.c[0];
        jet.dx[dir] = out.c[1];
        jet.dxx[dir] = 2.0 * out.c[2];
      }
      break;
    }
    case JetMode::kFull: {
      tape.full.resize(static_cast<std::size_t>(d));
      for (int dir = 0; dir < d; ++dir) {
        seed_input<Tay7>(spec_, point, dir, in7);
        auto& pass = tape.full[static_cast<std::size_t>(dir)];
        const Tay7 out = forward_impl<Tay7>(spec_, params_, in7, pass.pre, pass.act);
        if (dir == 0) {
          jet.value = out.c[0];
          jet.dt = out.c[3];
          jet.dtt = 2.0 * out.c[6];
        }
        jet.dx[dir] = out.c[1];
        jet.dxx[dir] = 2.0 * out.c[2];
        jet.dt_dxx[dir] = 2.0 * out.c[5];
      }
      break;
    }
  }
  return jet;
}

void JetEvaluator::backward(const PointTape& tape, const JetAdjoint& seed, ParamSet& grad) const {
  const int d = spec_.spatial_dim();
  std::span<const double> point(tape.point);

  thread_local std::vector<Tay7> in7;
  thread_local std::vector<Tay3s> in3s;
  thread_local std::vector<Tay3t> in3t;
  thread_local std::vector<double> ins;

  switch (tape.mode) {
    case JetMode::kValueOnly: {
      if (seed.value == 0.0) return;
      seed_input<double>(spec_, point, 0, ins);
      backward_impl<double>(spec_, params_, ins, tape.pre_s, tape.act_s, seed.value, grad);
      break;
    }
    case JetMode::kTimeOnly: {
      Tay3t out_bar{};
      out_bar.c[0] = seed.value;
      out_bar.c[1] = seed.dt;
      out_bar.c[2] = 2.0 * seed.dtt;
      seed_input<Tay3t>(spec_, point, 0, in3t);
      backward_impl<Tay3t>(spec_, params_, in3t, tape.timeonly.pre, tape.timeonly.act, out_bar, grad);
      break;
    }
    case JetMode::kSpatialOnly: {
      for (int dir = 0; dir < d; ++dir) {
        Tay3s out_bar{};
        if (dir == 0) out_bar.c[0] = seed.value;
        out_bar.c[1] = seed.dx[dir];
        out_bar.c[2] = 2.0 * seed.dxx[dir];
        seed_input<Tay3s>(spec_, point, dir, in3s);
        const auto& pass = tape.spatial[static_cast<std::size_t>(dir)];
        backward_impl<Tay3s>(spec_, params_, in3s, pass.pre, pass.act, out_bar, grad);
      }
      break;
    }
    case JetMode::kFull: {
      for (int dir = 0; dir < d; ++dir) {
        Tay7 out_bar{};
        if (dir == 0) {
          out_bar.c[0] = seed.value;
          out_bar.c[3] = seed.dt;
          out_bar.c[6] = 2.0 * seed.dtt;
        }
        out_bar.c[1] = seed.dx[dir];
        out_bar.c[2] = 2.0 * seed.dxx[dir];
        out_bar.c[5] = 2.0 * seed.dt_dxx[dir];
        seed_input<Tay7>(spec_, point, dir, in7);
        const auto& pass = tape.full[static_cast<std::size_t>(dir)];
        backward_impl<Tay7>(spec_, params_, in7, pass.pre, pass.act, out_bar, grad);
      }
      break;
    }
  }
}

Jet forward_jet(const NetworkSpec& spec, const ParamSet& params, std::span<const double> point) {
  JetEvaluator ev(spec, params);
  PointTape tape;
  return ev.evaluate(point, spec.has_time ? JetMode::kFull : JetMode::kSpatialOnly, tape);
}

// ---- checkpoints -----------------------------------------------------------

namespace {

nlohmann::json net_to_json(const NetworkSpec& spec, const ParamSet& params) {
  nlohmann::json j;
  j["input_dim"] = spec.input_dim;
  j["output_dim"] = spec.output_dim;
  j["widths"] = spec.widths;
  j["has_time"] = spec.has_time;
  j["activation"] = "tanh";
  auto& jw = j["weights"] = nlohmann::json::array();
  auto& jb = j["biases"] = nlohmann::json::array();
  for (std::size_t k = 0; k < params.weights.size(); ++k) {
    std::vector<double> w(static_cast<std::size_t>(params.weights[k].size()));
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < params.weights[k].rows(); ++i)
      for (Eigen::Index jj = 0; jj < params.weights[k].cols(); ++jj)
        w[static_cast<std::size_t>(at++)] = params.weights[k](i, jj);
    jw.push_back(w);
    jb.push_back(std::vector<double>(params.biases[k].data(),
                                     params.biases[k].data() + params.biases[k].size()));
  }
  return j;
}

std::pair<NetworkSpec, ParamSet> net_from_json(const nlohmann::json& j) {
  NetworkSpec spec;
  spec.input_dim = j.at("input_dim").get<int>();
  spec.output_dim = j.at("output_dim").get<int>();
  spec.widths = j.at("widths").get<std::vector<int>>();
  spec.has_time = j.at("has_time").get<bool>();
  if (j.at("activation").get<std::string>() != "tanh")
    throw ShapeError("unknown activation in checkpoint");
  spec.validate();
  ParamSet p = zero_params(spec);
  const auto& jw = j.at("weights");
  const auto& jb = j.at("biases");
  if (jw.size() != p.weights.size() || jb.size() != p.biases.size())
    throw ShapeError("checkpoint layer count mismatch");
  for (std::size_t k = 0; k < p.weights.size(); ++k) {
    const auto w = jw[k].get<std::vector<double>>();
    if (w.size() != static_cast<std::size_t>(p.weights[k].size()))
      throw ShapeError("checkpoint weight size mismatch");
    Eigen::Index at = 0;
    for (Eigen::Index i = 0; i < p.weights[k].rows(); ++i)
      for (Eigen::Index jj = 0; jj < p.weights[k].cols(); ++jj)
        p.weights[k](i, jj) = w[static_cast<std::size_t>(at++)];
    const auto b = jb[k].get<std::vector<double>>();
    if (b.size() != static_cast<std::size_t>(p.biases[k].size()))
      throw ShapeError("checkpoint bias size mismatch");
    for (std::size_t i = 0; i < b.size(); ++i) p.biases[k][static_cast<Eigen::Index>(i)] = b[i];
  }
  return {spec, p};
}

}  // namespace

std::string to_checkpoint_json(const NetworkSpec& spec, const ParamSet& params) {
  return net_to_json(spec, params).dump();
}

std::pair<NetworkSpec, ParamSet> from_checkpoint_json(const std::string& json_text) {
  return net_from_json(nlohmann::json::parse(json_text));
}

void save_checkpoint(const std::string& path, const NetworkSpec& u_spec, const ParamSet& u,
                     const NetworkSpec& q_spec, const ParamSet& q) {
  nlohmann::json j;
  j["format"] = "invpot-checkpoint-v1";
  j["u"] = net_to_json(u_spec, u);
  j["q"] = net_to_json(q_spec, q);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump(1) << "\n";
}

std::pair<std::pair<NetworkSpec, ParamSet>, std::pair<NetworkSpec, ParamSet>> load_checkpoint(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "invpot-checkpoint-v1")
    throw std::runtime_error("unrecognized checkpoint format in " + path);
  return {net_from_json(j.at("u")), net_from_json(j.at("q"))};
}

}  // namespace invpot::net
