#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace gaitforge {

inline constexpr int kNumJoints = 10;
inline constexpr int kJointsPerLeg = 5;
inline constexpr int kLearnedJoints = 8;

using JointVector = std::array<double, kNumJoints>;

// Physical joint order. Roll and yaw share one world-aligned sign convention
// on both legs (positive roll swings the foot towards +y), so the lateral
// mirror negates them.
enum Joint : int {
  kRightHipRoll = 0,
  kRightHipYaw,
  kRightHipPitch,
  kRightKnee,
  kRightAnkle,
  kLeftHipRoll,
  kLeftHipYaw,
  kLeftHipPitch,
  kLeftKnee,
  kLeftAnkle,
};

// Per-leg joint type; also the index into the five shared derivative gains.
enum JointType : int { kHipRoll = 0, kHipYaw, kHipPitch, kKnee, kAnkle };

enum class Stance : std::uint8_t { kRight, kLeft };

inline constexpr Stance other(Stance s) {
  return s == Stance::kRight ? Stance::kLeft : Stance::kRight;
}

inline constexpr std::string_view to_string(Stance s) {
  return s == Stance::kRight ? "right" : "left";
}

inline constexpr int leg_offset(bool right) { return right ? 0 : kJointsPerLeg; }

inline constexpr int joint_index(Stance stance, bool stance_leg, JointType type) {
  const bool right = (stance == Stance::kRight) == stance_leg;
  return leg_offset(right) + type;
}

inline constexpr JointType joint_type(int joint) {
  return static_cast<JointType>(joint % kJointsPerLeg);
}

inline constexpr std::array<std::string_view, kNumJoints> kJointNames = {
    "right_hip_roll", "right_hip_yaw", "right_hip_pitch", "right_knee", "right_ankle",
    "left_hip_roll",  "left_hip_yaw",  "left_hip_pitch",  "left_knee",  "left_ankle"};

// Decoder order of the eight learned joints, expressed for the reference
// (right) stance: stance leg roll/yaw/pitch/knee, then swing leg.
inline constexpr std::array<std::string_view, kLearnedJoints> kDecoderJointNames = {
    "stance_hip_roll", "stance_hip_yaw", "stance_hip_pitch", "stance_knee",
    "swing_hip_roll",  "swing_hip_yaw",  "swing_hip_pitch",  "swing_knee"};

inline constexpr std::array<int, kLearnedJoints> kDecoderColumns = {
    kRightHipRoll, kRightHipYaw, kRightHipPitch, kRightKnee,
    kLeftHipRoll,  kLeftHipYaw,  kLeftHipPitch,  kLeftKnee};

}  // namespace gaitforge
