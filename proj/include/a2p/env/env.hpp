#pragma once

#include "a2p/common.hpp"

#include <Eigen/Dense>

#include <sstream>
#include <string>

namespace a2p::env {

enum class EnvId { Pendulum, PointMass };

inline std::string to_string(EnvId id) {
  return id == EnvId::Pendulum ? "pendulum" : "pointmass";
}

inline EnvId env_from_string(const std::string& s) {
  if (s == "pendulum") return EnvId::Pendulum;
  if (s == "pointmass") return EnvId::PointMass;
  throw ConfigError("unknown env id '" + s + "' (expected pendulum|pointmass)");
}

/// A perturbable environment variant. mass_rel and friction_rel scale the
/// nominal mass and damping; (1.0, 1.0) is the training environment.
struct EnvParams {
  EnvId id = EnvId::Pendulum;
  double mass_rel = 1.0;
  double friction_rel = 1.0;
  double dt = 0.05;
  int horizon = 200;
};

inline EnvParams make_params(EnvId id) {
  EnvParams p;
  p.id = id;
  p.dt = 0.05;
  p.horizon = (id == EnvId::Pendulum) ? 200 : 150;
  return p;
}

inline EnvParams with_params(const EnvParams& base, double mass_rel, double friction_rel) {
  if (!(mass_rel > 0.0)) throw ConfigError("with_params: mass_rel must be > 0");
  if (!(friction_rel >= 0.0)) throw ConfigError("with_params: friction_rel must be >= 0");
  EnvParams p = base;
  p.mass_rel = mass_rel;
  p.friction_rel = friction_rel;
  return p;
}

/// Generalized coordinates and velocities.
///   pendulum:  (theta, theta_dot), theta wrapped to (-pi, pi], |theta_dot| <= 8
///   pointmass: (px, py, vx, vy), |v| <= 10 per component
struct EnvState {
  Vec coords;
  int step_index = 0;
};

struct StepResult {
  EnvState next_state;
  double reward = 0.0;
  bool done = false;
};

inline int action_dim(EnvId id) { return id == EnvId::Pendulum ? 1 : 2; }
inline int obs_dim(EnvId id) { return id == EnvId::Pendulum ? 3 : 4; }

// Pendulum constants (gym-style swing-up, torque-limited).
namespace pendulum {
constexpr double kGravity = 10.0;
constexpr double kLength = 1.0;
constexpr double kNominalMass = 1.0;
constexpr double kNominalDamping = 0.1;
constexpr double kMaxSpeed = 8.0;
constexpr double kMaxTorque = 2.0;
}  // namespace pendulum

namespace pointmass {
constexpr double kNominalMass = 1.0;
constexpr double kNominalDamping = 0.5;
constexpr double kMaxForce = 1.0;
constexpr double kMaxSpeed = 10.0;
constexpr double kGoalX = 0.8;
constexpr double kGoalY = 0.8;
}  // namespace pointmass

/// Initial-state distribution:
///   pendulum:  theta ~ U(-pi, pi], theta_dot ~ U[-1, 1]
///   pointmass: p ~ U([0, 0.2]^2), v = 0
inline EnvState reset(const EnvParams& params, std::uint64_t seed) {
  Rng rng(seed);
  EnvState s;
  s.step_index = 0;
  if (params.id == EnvId::Pendulum) {
    s.coords = Vec(2);
    s.coords[0] = wrap_angle(rng.uniform(-M_PI, M_PI));
    s.coords[1] = rng.uniform(-1.0, 1.0);
  } else {
    s.coords = Vec(4);
    s.coords[0] = rng.uniform(0.0, 0.2);
    s.coords[1] = rng.uniform(0.0, 0.2);
    s.coords[2] = 0.0;
    s.coords[3] = 0.0;
  }
  return s;
}

/// What the policy sees. Angles are encoded as (cos, sin) so the wrap point
/// is not a discontinuity for the network.
inline Vec observation(const EnvParams& params, const EnvState& s) {
  if (params.id == EnvId::Pendulum) {
    Vec o(3);
    o << std::cos(s.coords[0]), std::sin(s.coords[0]), s.coords[1];
    return o;
  }
  return s.coords;
}

/// Semi-implicit Euler step (velocity first). Reward is evaluated on the
/// incoming state and the applied action.
inline StepResult step(const EnvState& state, const EnvParams& params,
                       const Eigen::Ref<const Vec>& action) {
  StepResult res;
  res.next_state.step_index = state.step_index + 1;
  if (params.id == EnvId::Pendulum) {
    if (action.size() != 1) throw ConfigError("pendulum step: action must be 1-D");
    const double theta = state.coords[0];
    const double theta_dot = state.coords[1];
    const double u = pendulum::kMaxTorque * action[0];
    const double m = pendulum::kNominalMass * params.mass_rel;
    const double kf = pendulum::kNominalDamping * params.friction_rel;
    const double l = pendulum::kLength;
    const double g = pendulum::kGravity;

    res.reward = -(wrap_angle(theta) * wrap_angle(theta) + 0.1 * theta_dot * theta_dot +
                   0.001 * u * u);

    const double theta_ddot =
        (3.0 * g / (2.0 * l)) * std::sin(theta) + 3.0 * u / (m * l * l) - (kf / m) * theta_dot;
    double new_dot = clamp(theta_dot + params.dt * theta_ddot, -pendulum::kMaxSpeed,
                           pendulum::kMaxSpeed);
    double new_theta = wrap_angle(theta + params.dt * new_dot);
    res.next_state.coords = Vec(2);
    res.next_state.coords << new_theta, new_dot;
  } else {
    if (action.size() != 2) throw ConfigError("pointmass step: action must be 2-D");
    const double m = pointmass::kNominalMass * params.mass_rel;
    const double c = pointmass::kNominalDamping * params.friction_rel;
    const Eigen::Vector2d p = state.coords.head<2>();
    const Eigen::Vector2d v = state.coords.tail<2>();
    const Eigen::Vector2d goal(pointmass::kGoalX, pointmass::kGoalY);
    const Eigen::Vector2d force = pointmass::kMaxForce * action;

    res.reward = -(p - goal).norm() - 0.01 * action.squaredNorm();

    Eigen::Vector2d new_v = v + params.dt * (force - c * v) / m;
    new_v = new_v.cwiseMax(-pointmass::kMaxSpeed).cwiseMin(pointmass::kMaxSpeed);
    const Eigen::Vector2d new_p = p + params.dt * new_v;
    res.next_state.coords = Vec(4);
    res.next_state.coords << new_p[0], new_p[1], new_v[0], new_v[1];
  }
  if (!res.next_state.coords.allFinite()) {
    throw NumericalFault("env step produced a non-finite state (check dt)");
  }
  res.done = res.next_state.step_index >= params.horizon;
  return res;
}

/// Variant encoding used in configs and result files: `env_id:mass:friction`.
inline std::string format_variant(const EnvParams& p) {
  std::ostringstream os;
  os << to_string(p.id) << ":" << p.mass_rel << ":" << p.friction_rel;
  return os.str();
}

inline EnvParams parse_variant(const std::string& text) {
  const auto c1 = text.find(':');
  const auto c2 = text.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) {
    throw ConfigError("bad variant '" + text + "' (expected env:mass:friction)");
  }
  EnvParams base = make_params(env_from_string(text.substr(0, c1)));
  double mass = 0.0, fric = 0.0;
  try {
    mass = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    fric = std::stod(text.substr(c2 + 1));
  } catch (const std::exception&) {
    throw ConfigError("bad variant '" + text + "' (non-numeric multiplier)");
  }
  return with_params(base, mass, fric);
}

}  // namespace a2p::env
