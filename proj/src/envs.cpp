#include "htspg/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "htspg/errors.hpp"

namespace htspg {

namespace {

void check_action(const EnvSpec& spec, double action) {
  if (!std::isfinite(action) || !spec.action_interval.contains(action))
    throw ContractViolation(spec.name + ": action " + std::to_string(action) +
                            " outside [" + std::to_string(spec.action_interval.lo) +
                            ", " + std::to_string(spec.action_interval.hi) + "]");
}

void check_state(const EnvSpec& spec, const EnvState& state) {
  if (state.observation.size() != spec.observation_dim)
    throw ContractViolation(spec.name + ": state has wrong dimension");
}

StepOutcome absorb(const EnvState& state) { return {state, 0.0, true}; }

}  // namespace

// --- Mario ---------------------------------------------------------------

Mario1D::Mario1D()
    : spec_{"mario1d",
            1,
            {-kMaxSpeed, kMaxSpeed},
            {0.0},
            {1.0},
            FeatureMap::identity_with_bias(1),
            0.05,
            50} {}

EnvState Mario1D::reset(RandomStream&) const { return {{kStart}, false}; }

StepOutcome Mario1D::step(const EnvState& state, double action) const {
  check_state(spec_, state);
  check_action(spec_, action);
  if (state.terminal) return absorb(state);

  const double s = state.observation[0];
  const bool coin = s + action < 0.0;
  const double next = std::min(1.0, std::max(0.0, s + action));
  return {{{next}, coin}, coin ? 1.0 : 0.0, coin};
}

// --- Pathological mountain car -------------------------------------------

PathologicalMountainCar::PathologicalMountainCar()
    : spec_{"pmc",
            1,
            {-1.0, 1.0},
            {kLeftBound},
            {kRightBound},
            FeatureMap::polynomial_with_bias(1, 2, {0.25}),
            0.5,
            200} {}

EnvState PathologicalMountainCar::reset(RandomStream& rng) const {
  return {{rng.uniform()}, false};
}

StepOutcome PathologicalMountainCar::step(const EnvState& state,
                                          double action) const {
  check_state(spec_, state);
  check_action(spec_, action);
  if (state.terminal) return absorb(state);

  const double next =
      std::clamp(state.observation[0] + action * kDt, kLeftBound, kRightBound);
  double reward = -action * action;
  bool terminal = false;
  if (in_high_goal(next)) {
    reward += kHighReward;
    terminal = true;
  } else if (in_low_goal(next)) {
    reward += kLowReward;
    terminal = true;
  }
  return {{{next}, terminal}, reward, terminal};
}

// --- Sparse pendulum -----------------------------------------------------

SparsePendulum::SparsePendulum()
    : spec_{"sparse_pendulum",
            3,
            {-kMaxTorque, kMaxTorque},
            {-1.0, -1.0, -kMaxSpeed},
            {1.0, 1.0, kMaxSpeed},
            FeatureMap::rbf_grid(3, 3, 0.5, {1.0, 1.0, 1.0 / kMaxSpeed}),
            1.0,
            200} {}

EnvState SparsePendulum::make_state(double angle, double angular_velocity) {
  return {{std::cos(angle), std::sin(angle), angular_velocity}, false};
}

double SparsePendulum::angle(const EnvState& state) {
  return std::atan2(state.observation[1], state.observation[0]);
}

EnvState SparsePendulum::reset(RandomStream& rng) const {
  const double th = std::numbers::pi * (2.0 * rng.uniform() - 1.0);
  const double thdot = 2.0 * rng.uniform() - 1.0;
  return make_state(th, thdot);
}

StepOutcome SparsePendulum::step(const EnvState& state, double action) const {
  check_state(spec_, state);
  check_action(spec_, action);
  if (state.terminal) return absorb(state);

  const double th = angle(state);
  const double thdot = state.observation[2];
  constexpr double band = kRewardBandDegrees * std::numbers::pi / 180.0;
  const double reward = std::abs(th) <= band ? 1.0 : 0.0;

  double next_thdot =
      thdot + (3.0 * kGravity / (2.0 * kLength) * std::sin(th) +
               3.0 / (kMass * kLength * kLength) * action) *
                  kDt;
  next_thdot = std::clamp(next_thdot, -kMaxSpeed, kMaxSpeed);
  const double next_th = th + next_thdot * kDt;
  return {make_state(next_th, next_thdot), reward, false};
}

// --- Registry ------------------------------------------------------------

std::unique_ptr<Environment> make_environment(std::string_view name) {
  if (name == "mario1d") return std::make_unique<Mario1D>();
  if (name == "pmc") return std::make_unique<PathologicalMountainCar>();
  if (name == "sparse_pendulum") return std::make_unique<SparsePendulum>();
  throw ConfigError("unknown environment '" + std::string(name) +
                    "' (mario1d | pmc | sparse_pendulum)");
}

const std::vector<std::string>& environment_names() {
  static const std::vector<std::string> names{"mario1d", "pmc", "sparse_pendulum"};
  return names;
}

}  // namespace htspg
