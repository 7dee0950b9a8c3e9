#pragma once

// Foot placement, torso and ankle regulation.

#include <numbers>

namespace gaitforge {

struct SpeedSample {
  double v_now = 0.0;
  double v_prev = 0.0;
  double v_desired = 0.0;
};

struct TorsoState {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
  double roll_rate = 0.0;
  double pitch_rate = 0.0;
  double yaw_rate = 0.0;
  double desired_roll = 0.0;
  double desired_pitch = 0.0;
};

// Swing hip offset for one direction (pitch for longitudinal, roll for
// lateral speed).
inline double foot_placement(const SpeedSample& s, double kp, double kd) {
  return kp * (s.v_now - s.v_desired) + kd * (s.v_now - s.v_prev);
}

inline double torso_torque(double angle, double rate, double desired_angle,
                           double desired_rate, double kp, double kd) {
  return kp * (angle - desired_angle) + kd * (rate - desired_rate);
}

// 13 deg foot geometry + 50 deg.
inline constexpr double kDefaultFlatFootOffset = (13.0 + 50.0) * std::numbers::pi / 180.0;

inline double swing_ankle_reference(double torso_pitch,
                                    double offset = kDefaultFlatFootOffset) {
  return torso_pitch - offset;
}

}  // namespace gaitforge
