#pragma once

#include "a2p/common.hpp"
#include "a2p/nn/graph.hpp"

#include <Eigen/Dense>

#include <vector>

namespace a2p::nn {

enum class Activation { Tanh, Relu };

/// Dense MLP parameters: one weight matrix (out x in) and bias per layer,
/// hidden activations applied everywhere except the last (linear) layer.
struct MlpParams {
  std::vector<int> layer_sizes;  // e.g. {3, 64, 64, 2}
  std::vector<Mat> weights;
  std::vector<Vec> biases;
  Activation hidden_act = Activation::Tanh;

  int in_size() const { return layer_sizes.front(); }
  int out_size() const { return layer_sizes.back(); }
  int n_layers() const { return static_cast<int>(weights.size()); }

  bool all_finite() const {
    for (const auto& w : weights)
      if (!w.allFinite()) return false;
    for (const auto& b : biases)
      if (!b.allFinite()) return false;
    return true;
  }
};

/// Uniform +-1/sqrt(fan_in) init, zero biases.
inline MlpParams make_mlp(const std::vector<int>& layer_sizes, Rng& rng,
                          Activation act = Activation::Tanh) {
  if (layer_sizes.size() < 2) throw ConfigError("make_mlp: need at least 2 layer sizes");
  MlpParams p;
  p.layer_sizes = layer_sizes;
  p.hidden_act = act;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    const int in = layer_sizes[i];
    const int out = layer_sizes[i + 1];
    if (in <= 0 || out <= 0) throw ConfigError("make_mlp: layer sizes must be positive");
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    Mat w(out, in);
    for (int c = 0; c < in; ++c)
      for (int r = 0; r < out; ++r) w(r, c) = rng.uniform(-bound, bound);
    p.weights.push_back(std::move(w));
    p.biases.push_back(Vec::Zero(out));
  }
  return p;
}

inline MlpParams zero_mlp(const std::vector<int>& layer_sizes,
                          Activation act = Activation::Tanh) {
  MlpParams p;
  p.layer_sizes = layer_sizes;
  p.hidden_act = act;
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    p.weights.push_back(Mat::Zero(layer_sizes[i + 1], layer_sizes[i]));
    p.biases.push_back(Vec::Zero(layer_sizes[i + 1]));
  }
  return p;
}

inline Mat apply_act(const Mat& x, Activation act) {
  return act == Activation::Tanh ? Mat(x.array().tanh().matrix()) : Mat(x.cwiseMax(0.0));
}

/// Plain batched forward pass, no tape. Columns are batch entries.
inline Mat forward(const MlpParams& p, const Eigen::Ref<const Mat>& input) {
  if (input.rows() != p.in_size()) {
    throw ConfigError("forward: input rows " + std::to_string(input.rows()) +
                      " != first layer in-size " + std::to_string(p.in_size()));
  }
  Mat h = input;
  for (int i = 0; i < p.n_layers(); ++i) {
    h = (p.weights[i] * h).colwise() + p.biases[i];
    if (i + 1 < p.n_layers()) h = apply_act(h, p.hidden_act);
  }
  return h;
}

inline Vec forward(const MlpParams& p, const Eigen::Ref<const Vec>& input) {
  return forward(p, Mat(input)).col(0);
}

// ---------------------------------------------------------------------------
// Squashed-Gaussian policy head
// ---------------------------------------------------------------------------

constexpr double kLogStdMin = -20.0;
constexpr double kLogStdMax = 2.0;
constexpr double kHalfLog2Pi = 0.9189385332046727;  // log(2*pi)/2

/// Policy networks emit 2n rows: means on top, log-stds (clamped) below.
struct GaussianHead {
  Vec mean;
  Vec log_std;
};

inline GaussianHead policy_head(const MlpParams& p, const Eigen::Ref<const Vec>& obs) {
  if (p.out_size() % 2 != 0) throw ConfigError("policy_head: output size must be even");
  const Vec out = forward(p, obs);
  const int n = p.out_size() / 2;
  GaussianHead h;
  h.mean = out.head(n);
  h.log_std = out.tail(n).unaryExpr([](double x) { return clamp(x, kLogStdMin, kLogStdMax); });
  return h;
}

/// Deterministic action: tanh of the Gaussian mean.
inline Vec mean_action(const GaussianHead& h) {
  return h.mean.array().tanh().matrix();
}

/// log(1 - tanh(u)^2) evaluated without cancellation.
inline double log1m_tanh_sq(double u) {
  return 2.0 * (std::log(2.0) - u - a2p::softplus(-2.0 * u));
}

struct ActionSample {
  Vec action;
  double log_prob = 0.0;
};

/// Reparameterized draw a = tanh(mean + exp(log_std) * noise) with the tanh
/// change-of-variables correction folded into log_prob. Components end up
/// strictly inside (-1, 1).
inline ActionSample sample_action(const GaussianHead& head, const Eigen::Ref<const Vec>& noise) {
  if (noise.size() != head.mean.size()) {
    throw ConfigError("sample_action: noise dimension mismatch");
  }
  const int n = static_cast<int>(head.mean.size());
  ActionSample s;
  s.action = Vec(n);
  s.log_prob = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = head.mean[i] + std::exp(head.log_std[i]) * noise[i];
    s.action[i] = std::tanh(u);
    s.log_prob += -0.5 * noise[i] * noise[i] - head.log_std[i] - kHalfLog2Pi -
                  log1m_tanh_sq(u);
  }
  return s;
}

/// Density of the squashed policy at a given action (used by oracles and the
/// temperature bookkeeping): change of variables through atanh.
inline double log_prob_of_action(const GaussianHead& head, const Eigen::Ref<const Vec>& action) {
  double lp = 0.0;
  for (int i = 0; i < action.size(); ++i) {
    const double u = std::atanh(clamp(action[i], -1.0 + 1e-12, 1.0 - 1e-12));
    const double sd = std::exp(head.log_std[i]);
    const double z = (u - head.mean[i]) / sd;
    lp += -0.5 * z * z - head.log_std[i] - kHalfLog2Pi - log1m_tanh_sq(u);
  }
  return lp;
}

// ---------------------------------------------------------------------------
// Graph builders
// ---------------------------------------------------------------------------

/// Parameter leaves of one MLP on a graph.
struct MlpRefs {
  std::vector<Graph::Ref> weights;
  std::vector<Graph::Ref> biases;
  Activation hidden_act = Activation::Tanh;
};

inline MlpRefs push_params(Graph& g, const MlpParams& p) {
  MlpRefs r;
  r.hidden_act = p.hidden_act;
  for (int i = 0; i < p.n_layers(); ++i) {
    r.weights.push_back(g.leaf(p.weights[i]));
    r.biases.push_back(g.leaf(p.biases[i]));
  }
  return r;
}

/// Same forward pass as `forward`, recorded on the tape.
inline Graph::Ref mlp_forward(Graph& g, const MlpRefs& p, Graph::Ref x) {
  Graph::Ref h = x;
  const int n = static_cast<int>(p.weights.size());
  for (int i = 0; i < n; ++i) {
    h = g.affine(p.weights[i], p.biases[i], h);
    if (i + 1 < n) h = (p.hidden_act == Activation::Tanh) ? g.tanh(h) : g.relu(h);
  }
  return h;
}

struct PolicyNodes {
  Graph::Ref action;    // (act_dim x B), tanh-squashed
  Graph::Ref log_prob;  // (1 x B)
};

/// Reparameterized policy sample on the tape; `noise` is a constant
/// (act_dim x B) matrix of standard normals shared by value and gradient.
inline PolicyNodes policy_sample(Graph& g, const MlpRefs& p, Graph::Ref obs, const Mat& noise) {
  Graph::Ref out = mlp_forward(g, p, obs);
  const int act_dim = static_cast<int>(noise.rows());
  Graph::Ref mean = g.rows(out, 0, act_dim);
  Graph::Ref log_std = g.clamp(g.rows(out, act_dim, act_dim), kLogStdMin, kLogStdMax);
  Graph::Ref noise_c = g.constant(noise);
  Graph::Ref u = g.add(mean, g.mul(g.exp(log_std), noise_c));
  Graph::Ref action = g.tanh(u);

  // log pi = sum_i [ -noise^2/2 - log_std - log(2*pi)/2 - log(1 - tanh(u)^2) ]
  // with the last term as 2*(log2 - u - softplus(-2u)).
  Graph::Ref gauss = g.shift(g.scale(g.constant(noise.cwiseProduct(noise)), -0.5),
                             -kHalfLog2Pi);
  Graph::Ref corr = g.scale(
      g.shift(g.sub(g.scale(g.softplus(g.scale(u, -2.0)), -1.0), u), std::log(2.0)), 2.0);
  Graph::Ref per_dim = g.sub(g.sub(gauss, log_std), corr);
  return PolicyNodes{action, g.colsum(per_dim)};
}

/// Gradient arrays congruent with MlpParams, copied off the tape.
struct MlpGrads {
  std::vector<Mat> weights;
  std::vector<Vec> biases;

  bool all_finite() const {
    for (const auto& w : weights)
      if (!w.allFinite()) return false;
    for (const auto& b : biases)
      if (!b.allFinite()) return false;
    return true;
  }
};

inline MlpGrads collect_grads(const Graph& g, const MlpRefs& refs) {
  MlpGrads out;
  for (std::size_t i = 0; i < refs.weights.size(); ++i) {
    out.weights.push_back(g.gradient(refs.weights[i]));
    out.biases.push_back(g.gradient(refs.biases[i]).col(0));
  }
  return out;
}

}  // namespace a2p::nn
