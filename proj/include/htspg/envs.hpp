#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "htspg/features.hpp"
#include "htspg/policy.hpp"
#include "htspg/random.hpp"

namespace htspg {

struct EnvState {
  std::vector<double> observation;
  bool terminal = false;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

struct StepOutcome {
  EnvState next_state;
  double reward = 0.0;
  bool terminal = false;  // always equals next_state.terminal
};

struct EnvSpec {
  std::string name;
  std::size_t observation_dim;
  ActionInterval action_interval;
  std::vector<double> observation_low;
  std::vector<double> observation_high;
  FeatureMap default_feature_map;
  double default_sigma;
  int max_episode_steps;
};

// Episodic dynamics. Implementations hold no mutable state: the episode state
// is threaded through reset()/step() by the caller, so one instance may be
// shared by any number of concurrent rollouts.
//
// step() requires an action already clipped into spec().action_interval and
// throws ContractViolation otherwise. Stepping a terminal state is absorbing:
// the observation is unchanged and the reward is zero.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual EnvState reset(RandomStream& rng) const = 0;
  virtual StepOutcome step(const EnvState& state, double action) const = 0;
};

// Coin at the left edge of [0, 1]; reward 1 (and episode end) exactly when
// s + a < 0.
class Mario1D final : public Environment {
 public:
  static constexpr double kStart = 0.9;
  static constexpr double kMaxSpeed = 0.1;

  Mario1D();
  const EnvSpec& spec() const override { return spec_; }
  EnvState reset(RandomStream& rng) const override;
  StepOutcome step(const EnvState& state, double action) const override;

 private:
  EnvSpec spec_;
};

// Pathological mountain car: a kinematic 1-D track with a 10-unit goal near
// the start and a 500-unit goal far to the left, and an energy cost a^2 per
// step. Goals are bands of half-width kGoalHalfWidth; entering one ends the
// episode.
class PathologicalMountainCar final : public Environment {
 public:
  static constexpr double kLeftBound = -4.0;
  static constexpr double kRightBound = 3.709;
  static constexpr double kHighGoal = -4.0;
  static constexpr double kHighReward = 500.0;
  static constexpr double kLowGoal = 2.667;
  static constexpr double kLowReward = 10.0;
  static constexpr double kGoalHalfWidth = 0.05;
  static constexpr double kDt = 0.1;

  PathologicalMountainCar();
  const EnvSpec& spec() const override { return spec_; }
  EnvState reset(RandomStream& rng) const override;
  StepOutcome step(const EnvState& state, double action) const override;

  static bool in_high_goal(double s) { return std::abs(s - kHighGoal) <= kGoalHalfWidth; }
  static bool in_low_goal(double s) { return std::abs(s - kLowGoal) <= kGoalHalfWidth; }

 private:
  EnvSpec spec_;
};

// Classic torque-driven pendulum (angle 0 is upright) with reward 1 only
// while the pole is within kRewardBandDegrees of upright. Observation is
// [cos angle, sin angle, angular velocity]. Never terminal.
class SparsePendulum final : public Environment {
 public:
  static constexpr double kGravity = 10.0;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kDt = 0.05;
  static constexpr double kMaxSpeed = 8.0;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kRewardBandDegrees = 2.0;

  SparsePendulum();
  const EnvSpec& spec() const override { return spec_; }
  EnvState reset(RandomStream& rng) const override;
  StepOutcome step(const EnvState& state, double action) const override;

  static EnvState make_state(double angle, double angular_velocity);
  static double angle(const EnvState& state);

 private:
  EnvSpec spec_;
};

// "mario1d" | "pmc" | "sparse_pendulum"; throws ConfigError otherwise.
std::unique_ptr<Environment> make_environment(std::string_view name);
const std::vector<std::string>& environment_names();

}  // namespace htspg
