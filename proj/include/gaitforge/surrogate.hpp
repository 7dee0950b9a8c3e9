#pragma once

// Deterministic reduced-order 3D biped: damped joint double integrators,
// kinematic legs, a linear inverted pendulum about the stance foot and a
// second-order torso.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gaitforge/errors.hpp"
#include "gaitforge/joints.hpp"
#include "gaitforge/plant.hpp"
#include "gaitforge/regulators.hpp"

namespace gaitforge {

struct SurrogateConfig {
  double gravity = 9.81;
  double lip_height = 0.95;
  double pelvis_mass = 31.0;
  double thigh_length = 0.5;
  double shin_length = 0.5;
  double hip_half_width = 0.07;
  double nominal_height = 0.95;
  // Per joint type: hip roll, hip yaw, hip pitch, knee, ankle.
  std::array<double, kJointsPerLeg> joint_inertia = {0.3, 0.3, 0.3, 0.3, 0.05};
  std::array<double, kJointsPerLeg> joint_damping = {1.0, 1.0, 1.0, 1.0, 0.2};
  std::array<double, kJointsPerLeg> joint_lower = {-0.5, -0.5, -1.2, 0.05, -2.5};
  std::array<double, kJointsPerLeg> joint_upper = {0.5, 0.5, 1.2, 2.0, 0.3};
  double torso_inertia = 1.5;
  double torso_gravity_stiffness = 30.0;
  double torso_lean_gain = 20.0;
  double torso_damping = 2.0;
  double joint_jitter = 0.01;
  bool jitter = true;
};

inline double leg_length(double thigh, double shin, double knee) {
  return std::sqrt(thigh * thigh + shin * shin + 2.0 * thigh * shin * std::cos(knee));
}

// Knee flexion that yields the requested hip-to-foot distance.
inline double knee_for_length(double thigh, double shin, double length) {
  const double c = (length * length - thigh * thigh - shin * shin) / (2.0 * thigh * shin);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

inline JointVector nominal_stand(const SurrogateConfig& cfg) {
  JointVector q{};
  const double knee = knee_for_length(cfg.thigh_length, cfg.shin_length, cfg.nominal_height);
  for (bool right : {true, false}) {
    const int o = leg_offset(right);
    q[o + kKnee] = knee;
    q[o + kAnkle] = -kDefaultFlatFootOffset;
  }
  return q;
}

class SurrogateBiped final : public Plant {
 public:
  explicit SurrogateBiped(SurrogateConfig cfg = {}) : cfg_(cfg) {
    if (!(cfg_.lip_height > 0.0) || !(cfg_.pelvis_mass > 0.0) || !(cfg_.torso_inertia > 0.0)) {
      throw Error(ErrorKind::kConfig, "surrogate heights, masses and inertias must be positive");
    }
    for (int t = 0; t < kJointsPerLeg; ++t) {
      if (!(cfg_.joint_inertia[t] > 0.0) || cfg_.joint_damping[t] < 0.0 ||
          !(cfg_.joint_lower[t] < cfg_.joint_upper[t])) {
        throw Error(ErrorKind::kConfig, "invalid joint parameters");
      }
    }
    reset(0);
  }

  const SurrogateConfig& config() const { return cfg_; }

  const PlantState& reset(std::uint64_t seed) override {
    s_ = PlantState{};
    pushes_.clear();
    s_.q = nominal_stand(cfg_);
    if (cfg_.jitter) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(-cfg_.joint_jitter, cfg_.joint_jitter);
      for (auto& q : s_.q) q = u(rng);
      const JointVector nominal = nominal_stand(cfg_);
      for (int j = 0; j < kNumJoints; ++j) s_.q[j] += nominal[j];
    }
    clamp_joints();
    s_.stance = Stance::kRight;
    s_.stance_foot = foot_position(true);
    s_.stance_foot[2] = 0.0;
    s_.stance_foot_yaw = 0.0;
    update_height();
    s_.swing_foot = foot_position(false);
    return s_;
  }

  const PlantState& advance(const SubstepController& controller, int substeps,
                            double dt) override {
    for (int i = 0; i < substeps; ++i) {
      const SubstepCommand cmd = controller(s_, i);
      integrate(cmd, dt);
    }
    return s_;
  }

  const PlantState& switch_stance() override {
    const bool new_right = s_.stance == Stance::kLeft;
    Vec3 foot = foot_position(new_right);
    foot[2] = 0.0;
    s_.stance = other(s_.stance);
    s_.stance_foot = foot;
    s_.stance_foot_yaw = s_.torso_angles[2] + s_.q[leg_offset(new_right) + kHipYaw];
    update_height();
    s_.swing_foot = foot_position(!new_right);
    return s_;
  }

  void add_push(const PushEvent& event) override { pushes_.push_back(event); }

  const PlantState& state() const override { return s_; }

  // Foot position from the leg's joint angles, relative to the current pelvis.
  Vec3 foot_position(bool right) const {
    const int o = leg_offset(right);
    const double side = right ? -1.0 : 1.0;
    const double yaw = s_.torso_angles[2];
    const double len = leg_length(cfg_.thigh_length, cfg_.shin_length, s_.q[o + kKnee]);
    const double roll = s_.q[o + kHipRoll];
    const double pitch = s_.q[o + kHipPitch];
    const double heading = yaw + s_.q[o + kHipYaw];
    const double fx = len * std::sin(pitch);
    const double fy = len * std::cos(pitch) * std::sin(roll);
    const double fz = -len * std::cos(pitch) * std::cos(roll);
    const double hx = s_.pelvis_pos[0] - std::sin(yaw) * side * cfg_.hip_half_width;
    const double hy = s_.pelvis_pos[1] + std::cos(yaw) * side * cfg_.hip_half_width;
    return {hx + std::cos(heading) * fx - std::sin(heading) * fy,
            hy + std::sin(heading) * fx + std::cos(heading) * fy, s_.pelvis_pos[2] + fz};
  }

 private:
  Vec3 active_push(double t) const {
    Vec3 f{};
    for (const auto& p : pushes_) {
      if (t >= p.start && t < p.start + p.duration) {
        f[0] += p.fx;
        f[1] += p.fy;
      }
    }
    return f;
  }

  void clamp_joints() {
    for (int j = 0; j < kNumJoints; ++j) {
      const int t = joint_type(j);
      if (s_.q[j] < cfg_.joint_lower[t]) {
        s_.q[j] = cfg_.joint_lower[t];
        s_.qd[j] = std::max(s_.qd[j], 0.0);
      } else if (s_.q[j] > cfg_.joint_upper[t]) {
        s_.q[j] = cfg_.joint_upper[t];
        s_.qd[j] = std::min(s_.qd[j], 0.0);
      }
    }
  }

  // Pelvis height from the stance leg length and the horizontal hip-to-foot
  // offset; floored just above the ground so it stays positive.
  void update_height() {
    const bool right = s_.stance == Stance::kRight;
    const double side = right ? -1.0 : 1.0;
    const double yaw = s_.torso_angles[2];
    const double hx = s_.pelvis_pos[0] - std::sin(yaw) * side * cfg_.hip_half_width;
    const double hy = s_.pelvis_pos[1] + std::cos(yaw) * side * cfg_.hip_half_width;
    const double dx = hx - s_.stance_foot[0];
    const double dy = hy - s_.stance_foot[1];
    const double len =
        leg_length(cfg_.thigh_length, cfg_.shin_length, s_.q[leg_offset(right) + kKnee]);
    s_.pelvis_pos[2] = std::sqrt(std::max(len * len - dx * dx - dy * dy, 1e-6));
  }

  void integrate(const SubstepCommand& cmd, double dt) {
    // Joints: semi-implicit Euler on I qdd = u - c qd.
    const int stance_yaw = leg_offset(s_.stance == Stance::kRight) + kHipYaw;
    for (int j = 0; j < kNumJoints; ++j) {
      const int t = joint_type(j);
      const double u = cmd.torque[j];
      s_.torque[j] = u;
      const double acc = (u - cfg_.joint_damping[t] * s_.qd[j]) / cfg_.joint_inertia[t];
      s_.qd[j] += acc * dt;
      s_.q[j] += s_.qd[j] * dt;
    }
    clamp_joints();

    // Horizontal CoM: LIP about the stance foot plus external push.
    const Vec3 force = active_push(s_.time);
    s_.push_force = force;
    const double w2 = cfg_.gravity / cfg_.lip_height;
    const Vec3& c = s_.pelvis_pos;
    const double ax = w2 * (c[0] - s_.stance_foot[0]) + force[0] / cfg_.pelvis_mass;
    const double ay = w2 * (c[1] - s_.stance_foot[1]) + force[1] / cfg_.pelvis_mass;
    s_.pelvis_vel[0] += ax * dt;
    s_.pelvis_vel[1] += ay * dt;
    s_.pelvis_pos[0] += s_.pelvis_vel[0] * dt;
    s_.pelvis_pos[1] += s_.pelvis_vel[1] * dt;

    // Torso roll/pitch: gravity-unstable rotor, leaning with the CoM offset,
    // opposed by the regulation torque. Yaw follows the stance hip yaw.
    const double off_x = c[0] - s_.stance_foot[0];
    const double off_y = c[1] - s_.stance_foot[1];
    auto& ang = s_.torso_angles;
    auto& rate = s_.torso_rates;
    const double roll_acc = (cfg_.torso_gravity_stiffness * ang[0] -
                             cfg_.torso_lean_gain * off_y - cmd.torso_roll_torque -
                             cfg_.torso_damping * rate[0]) /
                            cfg_.torso_inertia;
    const double pitch_acc = (cfg_.torso_gravity_stiffness * ang[1] +
                              cfg_.torso_lean_gain * off_x - cmd.torso_pitch_torque -
                              cfg_.torso_damping * rate[1]) /
                             cfg_.torso_inertia;
    rate[0] += roll_acc * dt;
    rate[1] += pitch_acc * dt;
    rate[2] = -s_.qd[stance_yaw];
    ang[0] += rate[0] * dt;
    ang[1] += rate[1] * dt;
    ang[2] += rate[2] * dt;

    const double z_before = s_.pelvis_pos[2];
    update_height();
    s_.pelvis_vel[2] = (s_.pelvis_pos[2] - z_before) / dt;
    s_.swing_foot = foot_position(s_.stance != Stance::kRight);
    s_.time += dt;
  }

  SurrogateConfig cfg_;
  PlantState s_;
  std::vector<PushEvent> pushes_;
};

}  // namespace gaitforge
