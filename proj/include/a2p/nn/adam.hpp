#pragma once

#include "a2p/common.hpp"
#include "a2p/nn/mlp.hpp"

#include <vector>

namespace a2p::nn {

/// Adaptive-moment optimizer state for one MLP (plus a scalar variant below).
struct OptState {
  long step_count = 0;
  std::vector<Mat> m_w, v_w;
  std::vector<Vec> m_b, v_b;
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double numerical_floor = 1e-8;
};

inline OptState make_opt(const MlpParams& p, double learning_rate = 3e-4) {
  OptState o;
  o.learning_rate = learning_rate;
  for (int i = 0; i < p.n_layers(); ++i) {
    o.m_w.push_back(Mat::Zero(p.weights[i].rows(), p.weights[i].cols()));
    o.v_w.push_back(Mat::Zero(p.weights[i].rows(), p.weights[i].cols()));
    o.m_b.push_back(Vec::Zero(p.biases[i].size()));
    o.v_b.push_back(Vec::Zero(p.biases[i].size()));
  }
  return o;
}

namespace detail {
template <class Arr>
void adam_update(Arr& param, const Arr& grad, Arr& m, Arr& v, double lr, double b1,
                 double b2, double floor, long t) {
  m = b1 * m + (1.0 - b1) * grad;
  v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t));
  param.array() -=
      lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + floor);
}
}  // namespace detail

/// One optimizer step. A non-finite gradient aborts before touching anything.
inline void optimizer_step(MlpParams& params, const MlpGrads& grads, OptState& opt) {
  if (grads.weights.size() != params.weights.size()) {
    throw ConfigError("optimizer_step: gradient/parameter layer count mismatch");
  }
  if (!grads.all_finite()) {
    throw NumericalFault("optimizer_step: non-finite gradient, step aborted");
  }
  const long t = opt.step_count + 1;
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    detail::adam_update(params.weights[i], grads.weights[i], opt.m_w[i], opt.v_w[i],
                        opt.learning_rate, opt.beta1, opt.beta2, opt.numerical_floor, t);
    detail::adam_update(params.biases[i], grads.biases[i], opt.m_b[i], opt.v_b[i],
                        opt.learning_rate, opt.beta1, opt.beta2, opt.numerical_floor, t);
  }
  opt.step_count = t;
}

/// Adam on a single scalar (the temperature's log-alpha).
struct ScalarOpt {
  long step_count = 0;
  double m = 0.0, v = 0.0;
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double numerical_floor = 1e-8;
};

inline void optimizer_step(double& param, double grad, ScalarOpt& opt) {
  if (!std::isfinite(grad)) {
    throw NumericalFault("optimizer_step: non-finite scalar gradient, step aborted");
  }
  const long t = opt.step_count + 1;
  opt.m = opt.beta1 * opt.m + (1.0 - opt.beta1) * grad;
  opt.v = opt.beta2 * opt.v + (1.0 - opt.beta2) * grad * grad;
  const double mhat = opt.m / (1.0 - std::pow(opt.beta1, static_cast<double>(t)));
  const double vhat = opt.v / (1.0 - std::pow(opt.beta2, static_cast<double>(t)));
  param -= opt.learning_rate * mhat / (std::sqrt(vhat) + opt.numerical_floor);
  opt.step_count = t;
}

}  // namespace a2p::nn
