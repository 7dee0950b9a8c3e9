#pragma once

// Torque-level plant contract shared by the built-in surrogate and the
// external simulation bridge.

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "gaitforge/joints.hpp"

namespace gaitforge {

using Vec3 = std::array<double, 3>;

struct PlantState {
  double time = 0.0;
  Vec3 pelvis_pos{};
  Vec3 pelvis_vel{};
  Vec3 torso_angles{};  // roll, pitch, yaw
  Vec3 torso_rates{};
  JointVector q{};
  JointVector qd{};
  JointVector torque{};  // last applied joint torques
  Stance stance = Stance::kRight;
  Vec3 stance_foot{};
  Vec3 swing_foot{};
  double stance_foot_yaw = 0.0;
  Vec3 push_force{};  // force active during the last substep
};

struct SubstepCommand {
  JointVector torque{};
  double torso_roll_torque = 0.0;   // regulation feed-forward, roll channel
  double torso_pitch_torque = 0.0;  // regulation feed-forward, pitch channel
};

// Called once per inner substep with the latest available state.
using SubstepController = std::function<SubstepCommand(const PlantState&, int substep)>;

struct PushEvent {
  double start = 0.0;
  double duration = 0.1;
  double fx = 0.0;
  double fy = 0.0;
};

class Plant {
 public:
  virtual ~Plant() = default;

  virtual const PlantState& reset(std::uint64_t seed) = 0;
  virtual const PlantState& advance(const SubstepController& controller, int substeps,
                                    double dt) = 0;
  // Swaps stance and swing; the new stance foot is planted where the swing
  // foot currently is.
  virtual const PlantState& switch_stance() = 0;
  virtual void add_push(const PushEvent& event) = 0;
  virtual const PlantState& state() const = 0;
};

}  // namespace gaitforge
