#pragma once

#include "a2p/common.hpp"

#include <Eigen/Dense>

namespace a2p::adapt {

/// Online controller for the adversarial mixing coefficient. It watches the
/// Euclidean distance between the protagonist's and the adversary's actions,
/// keeps an exponential moving average of it, and nudges epsilon by a
/// sigmoid-scaled signal whenever the distance moves off that average.
struct AdaptState {
  double epsilon = 0.1;   // mixing weight, clamped to [0, 1]
  double d_avg = 0.0;     // moving-average action distance
  double beta = 0.5;      // momentum of the distance average
  double c = 0.01;        // step size of the epsilon update
  long update_count = 0;

  // `centered_sigmoid` replaces sgn(x)*sigmoid(|x|) with 2*sigmoid(x)-1,
  // removing the jump at x = 0. `sign_flip` negates the signal, shrinking
  // epsilon when the adversary closes in instead of growing it.
  bool centered_sigmoid = false;
  bool sign_flip = false;
};

/// Euclidean distance between an action pair.
inline double action_distance(const Eigen::Ref<const Vec>& a,
                              const Eigen::Ref<const Vec>& a_bar) {
  if (a.size() != a_bar.size()) {
    throw ConfigError("action_distance: dimension mismatch (" +
                      std::to_string(a.size()) + " vs " + std::to_string(a_bar.size()) + ")");
  }
  return (a - a_bar).norm();
}

/// The signal that drives the epsilon update: positive when the new distance
/// dropped below the running average.
inline double perf_signal(const AdaptState& s, double d) {
  const double delta = s.d_avg - d;
  double b = s.centered_sigmoid ? 2.0 * sigmoid(delta) - 1.0
                                : sgn(delta) * sigmoid(std::fabs(delta));
  if (s.sign_flip) b = -b;
  return b;
}

/// One controller step: compute the signal from the incoming distance, move
/// epsilon by c * b (clamped), then fold the distance into the average.
inline AdaptState update_coefficient(const AdaptState& s, double d) {
  if (!(d >= 0.0) || !std::isfinite(d)) {
    throw ConfigError("update_coefficient: distance must be finite and >= 0");
  }
  AdaptState out = s;
  const double b = perf_signal(s, d);
  out.epsilon = clamp(s.epsilon + s.c * b, 0.0, 1.0);
  out.d_avg = s.beta * s.d_avg + (1.0 - s.beta) * d;
  out.update_count = s.update_count + 1;
  return out;
}

/// Convex combination (1 - eps) * a + eps * a_bar, the action that actually
/// reaches the environment.
inline Vec mix_actions(double epsilon, const Eigen::Ref<const Vec>& a,
                       const Eigen::Ref<const Vec>& a_bar) {
  if (a.size() != a_bar.size()) {
    throw ConfigError("mix_actions: dimension mismatch (" +
                      std::to_string(a.size()) + " vs " + std::to_string(a_bar.size()) + ")");
  }
  return (1.0 - epsilon) * a + epsilon * a_bar;
}

}  // namespace a2p::adapt
