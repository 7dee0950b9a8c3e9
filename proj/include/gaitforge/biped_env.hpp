#pragma once

// Episode contract (reset / step / apply_push) around a torque-level plant:
// per-tick action decoding, Bezier tracking with foot placement offsets,
// ankle references, joint PD plus torso feed-forward, rewards and
// termination.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "gaitforge/action_decoder.hpp"
#include "gaitforge/errors.hpp"
#include "gaitforge/gait_kernel.hpp"
#include "gaitforge/joints.hpp"
#include "gaitforge/plant.hpp"
#include "gaitforge/policy_net.hpp"
#include "gaitforge/regulators.hpp"
#include "gaitforge/reward.hpp"

namespace gaitforge {

struct CommandBox {
  double vx_min = -0.5;
  double vx_max = 1.0;
  double vy_min = -0.3;
  double vy_max = 0.3;

  bool contains(double vx, double vy) const {
    return vx >= vx_min && vx <= vx_max && vy >= vy_min && vy <= vy_max;
  }
};

struct EnvConfig {
  double control_dt = 0.001;
  int substeps = 2;
  double step_duration = kDefaultStepDuration;
  int max_ticks = 10000;
  // Fixed joint stiffness per joint type; damping comes from the policy.
  std::array<double, kJointsPerLeg> joint_kp = {400.0, 400.0, 400.0, 400.0, 60.0};
  std::array<double, kJointsPerLeg> torque_limit = {112.0, 112.0, 198.0, 198.0, 45.0};
  double flat_foot_offset = kDefaultFlatFootOffset;
  double desired_roll = 0.0;
  double desired_pitch = 0.0;
  double pz_desired = 0.95;
  double foot_length = 0.16;
  double foot_width = 0.04;
  // Swing hip roll that lateral foot placement is measured from, as abduction
  // of either leg.
  double nominal_hip_abduction = 0.0;
  Vec3 com_offset{};
  CommandBox command;
  TerminationLimits termination;

  int step_ticks() const { return static_cast<int>(std::lround(step_duration / control_dt)); }

  void validate() const {
    if (!(control_dt > 0.0) || substeps < 1 || !(step_duration > 0.0) || max_ticks < 0 ||
        step_ticks() < 2) {
      throw Error(ErrorKind::kConfig, "invalid environment timing");
    }
    for (int t = 0; t < kJointsPerLeg; ++t) {
      if (joint_kp[t] < 0.0 || !(torque_limit[t] > 0.0)) {
        throw Error(ErrorKind::kConfig, "invalid joint gains or torque limits");
      }
    }
    if (!(pz_desired > 0.0) || !(foot_length > 0.0) || !(foot_width > 0.0)) {
      throw Error(ErrorKind::kConfig, "invalid reward geometry");
    }
    if (!(command.vx_min <= command.vx_max) || !(command.vy_min <= command.vy_max)) {
      throw Error(ErrorKind::kConfig, "empty command box");
    }
  }
};

struct StepResult {
  Observation observation;
  RewardVector reward;
  bool terminated = false;
  bool truncated = false;
  RewardInputs aux;
  double time = 0.0;
  double tau = 0.0;
  Stance stance = Stance::kRight;
  int step_index = 0;
};

class BipedEnv {
 public:
  BipedEnv(EnvConfig cfg, ActionDecoder decoder, std::unique_ptr<Plant> plant)
      : cfg_(cfg), decoder_(std::move(decoder)), plant_(std::move(plant)) {
    cfg_.validate();
    if (!plant_) throw Error(ErrorKind::kConfig, "environment needs a plant");
  }

  const EnvConfig& config() const { return cfg_; }
  const ActionDecoder& decoder() const { return decoder_; }
  Plant& plant() { return *plant_; }
  const PlantState& plant_state() const { return plant_->state(); }

  Observation reset(std::uint64_t seed, double vx_desired, double vy_desired) {
    if (!cfg_.command.contains(vx_desired, vy_desired)) {
      throw Error(ErrorKind::kCommand, "desired velocity outside the command box");
    }
    vx_d_ = vx_desired;
    vy_d_ = vy_desired;
    plant_->reset(seed);
    tick_ = 0;
    step_start_tick_ = 0;
    step_index_ = 0;
    terminated_ = false;
    started_ = true;
    fp_refreshed_ = false;
    delta_pitch_ = delta_roll_ = 0.0;
    vx_prev_ = vy_prev_ = 0.0;
    const auto& s = plant_->state();
    positions_.assign(1, {s.pelvis_pos[0], s.pelvis_pos[1]});
    anchors_ = decoder_.anchors(s.q, s.stance);
    swing_roll_start_ = s.q[joint_index(s.stance, false, kHipRoll)];
    roll_offset_ = 0.0;
    obs_ = make_observation();
    return obs_;
  }

  void apply_push(const PushEvent& event) {
    if (!started_ || terminated_) throw Error(ErrorKind::kState, "no running episode");
    if (!(event.duration > 0.0)) throw Error(ErrorKind::kConfig, "push duration must be positive");
    plant_->add_push(event);
  }

  StepResult step(std::span<const double> raw_action) {
    if (!started_) throw Error(ErrorKind::kState, "step before reset");
    if (terminated_ || tick_ >= cfg_.max_ticks) {
      throw Error(ErrorKind::kState, "episode already finished");
    }
    gait_ = decoder_.decode(raw_action, anchors_);
    const PhaseClock clock{step_start_tick_ * cfg_.control_dt, cfg_.step_duration};
    const double t = tick_ * cfg_.control_dt;

    if (!fp_refreshed_ && phase(clock, t) >= 0.5) refresh_foot_placement(t, clock.t_start);

    const double dt_sub = cfg_.control_dt / cfg_.substeps;
    plant_->advance(
        [&](const PlantState& s, int sub) {
          const double tau = phase(clock, t + sub * dt_sub);
          return control(s, tau);
        },
        cfg_.substeps, dt_sub);

    ++tick_;
    const auto& s = plant_->state();
    positions_.push_back({s.pelvis_pos[0], s.pelvis_pos[1]});

    StepResult r;
    r.time = tick_ * cfg_.control_dt;
    r.tau = phase(clock, r.time);
    r.stance = s.stance;
    r.step_index = step_index_;
    if (tick_ - step_start_tick_ >= cfg_.step_ticks()) switch_stance();

    obs_ = make_observation();
    r.observation = obs_;
    r.aux = reward_inputs();
    r.reward = compute_rewards(r.aux);
    const auto& ps = plant_->state();
    terminated_ = terminated(
        {ps.torso_angles[2], ps.torso_angles[1], ps.torso_angles[0], ps.pelvis_pos[2],
         r.aux.feet_distance},
        cfg_.termination);
    r.terminated = terminated_;
    r.truncated = !terminated_ && tick_ >= cfg_.max_ticks;
    return r;
  }

  bool done() const { return terminated_ || tick_ >= cfg_.max_ticks; }
  bool is_terminated() const { return terminated_; }
  int ticks() const { return tick_; }
  int step_index() const { return step_index_; }
  double time() const { return tick_ * cfg_.control_dt; }
  const Observation& observation() const { return obs_; }
  const GaitParameters& gait() const { return gait_; }
  double delta_pitch() const { return delta_pitch_; }
  double delta_roll() const { return delta_roll_; }

  // Average pelvis velocity over the trailing step-length window.
  std::array<double, 2> window_velocity() const {
    const int w = std::min(tick_, cfg_.step_ticks());
    if (w == 0) return {0.0, 0.0};
    const auto& now = positions_[tick_];
    const auto& then = positions_[tick_ - w];
    const double span = w * cfg_.control_dt;
    return {(now[0] - then[0]) / span, (now[1] - then[1]) / span};
  }

 private:
  void refresh_foot_placement(double t, double t_start) {
    const auto& start = positions_[step_start_tick_];
    const auto& now = positions_[tick_];
    const double elapsed = t - t_start;
    const double vx = (now[0] - start[0]) / elapsed;
    const double vy = (now[1] - start[1]) / elapsed;
    delta_pitch_ = foot_placement({vx, vx_prev_, vx_d_}, gait_.kfp[0], gait_.kfp[1]);
    delta_roll_ = foot_placement({vy, vy_prev_, vy_d_}, gait_.kfp[2], gait_.kfp[3]);
    // Lateral offsets replace the previous one instead of riding on the
    // anchored endpoint; otherwise the sway bias of vy narrows every step.
    const Stance st = plant_->state().stance;
    const double nominal = st == Stance::kRight ? cfg_.nominal_hip_abduction
                                                : -cfg_.nominal_hip_abduction;
    roll_offset_ = nominal + delta_roll_ - swing_roll_start_;
    vx_prev_ = vx;
    vy_prev_ = vy;
    fp_refreshed_ = true;
  }

  void switch_stance() {
    plant_->switch_stance();
    step_start_tick_ = tick_;
    ++step_index_;
    fp_refreshed_ = false;
    delta_pitch_ = delta_roll_ = roll_offset_ = 0.0;
    const auto& s = plant_->state();
    anchors_ = decoder_.anchors(s.q, s.stance);
    swing_roll_start_ = s.q[joint_index(s.stance, false, kHipRoll)];
  }

  SubstepCommand control(const PlantState& s, double tau) const {
    SubstepCommand cmd;
    const Stance st = s.stance;
    const int swing_pitch = joint_index(st, false, kHipPitch);
    const int swing_roll = joint_index(st, false, kHipRoll);
    for (int j = 0; j < kNumJoints; ++j) {
      const int type = joint_type(j);
      double q_des = 0.0, qd_des = 0.0;
      switch (gait_.kind(st, j)) {
        case ColumnKind::kPassive:
          cmd.torque[j] = 0.0;
          continue;
        case ColumnKind::kKinematic:
          q_des = swing_ankle_reference(s.torso_angles[1], cfg_.flat_foot_offset);
          qd_des = s.torso_rates[1];
          break;
        case ColumnKind::kBezier: {
          const BezierCurve c = gait_.curve(st, j);
          q_des = bezier_eval(c, tau);
          qd_des = bezier_deriv(c, tau, cfg_.step_duration);
          if (j == swing_pitch) q_des += delta_pitch_;
          if (j == swing_roll) q_des += roll_offset_;
          break;
        }
      }
      cmd.torque[j] = cfg_.joint_kp[type] * (q_des - s.q[j]) + gait_.kd[type] * (qd_des - s.qd[j]);
    }
    cmd.torso_roll_torque = torso_torque(s.torso_angles[0], s.torso_rates[0], cfg_.desired_roll,
                                         0.0, gait_.kt[0], gait_.kt[1]);
    cmd.torso_pitch_torque = torso_torque(s.torso_angles[1], s.torso_rates[1],
                                          cfg_.desired_pitch, 0.0, gait_.kt[2], gait_.kt[3]);
    cmd.torque[joint_index(st, true, kHipRoll)] += cmd.torso_roll_torque;
    cmd.torque[joint_index(st, true, kHipPitch)] += cmd.torso_pitch_torque;
    for (int j = 0; j < kNumJoints; ++j) {
      const double lim = cfg_.torque_limit[joint_type(j)];
      cmd.torque[j] = std::clamp(cmd.torque[j], -lim, lim);
    }
    return cmd;
  }

  Observation make_observation() const {
    const auto& s = plant_->state();
    const auto v = window_velocity();
    Observation o;
    o.vx_desired = vx_d_;
    o.vy_desired = vy_d_;
    o.vx_avg = v[0];
    o.vy_avg = v[1];
    o.vx_err = v[0] - vx_d_;
    o.vy_err = v[1] - vy_d_;
    o.roll = s.torso_angles[0];
    o.pitch = s.torso_angles[1];
    o.yaw = s.torso_angles[2];
    o.roll_rate = s.torso_rates[0];
    o.pitch_rate = s.torso_rates[1];
    o.yaw_rate = s.torso_rates[2];
    return o;
  }

  RewardInputs reward_inputs() const {
    const auto& s = plant_->state();
    RewardInputs in;
    in.vx_avg = obs_.vx_avg;
    in.vy_avg = obs_.vy_avg;
    in.vx_desired = vx_d_;
    in.vy_desired = vy_d_;
    in.pz = s.pelvis_pos[2];
    in.pz_desired = cfg_.pz_desired;
    for (int j = 0; j < kNumJoints; ++j) {
      in.u_norm[j] = s.torque[j] / cfg_.torque_limit[joint_type(j)];
    }
    in.com_xy = {s.pelvis_pos[0] + cfg_.com_offset[0], s.pelvis_pos[1] + cfg_.com_offset[1]};
    in.support_polygon = footprint(s.stance_foot, s.stance_foot_yaw);
    const Vec2 c = polygon_center(in.support_polygon);
    in.com_distance = std::hypot(in.com_xy.x - c.x, in.com_xy.y - c.y);
    in.roll = s.torso_angles[0];
    in.pitch = s.torso_angles[1];
    in.yaw = s.torso_angles[2];
    in.roll_rate = s.torso_rates[0];
    in.pitch_rate = s.torso_rates[1];
    in.yaw_rate = s.torso_rates[2];
    in.feet_distance =
        std::hypot(s.stance_foot[0] - s.swing_foot[0], s.stance_foot[1] - s.swing_foot[1]);
    return in;
  }

  std::vector<Vec2> footprint(const Vec3& foot, double yaw) const {
    const double hl = 0.5 * cfg_.foot_length, hw = 0.5 * cfg_.foot_width;
    const double c = std::cos(yaw), s = std::sin(yaw);
    std::vector<Vec2> poly;
    for (auto [lx, ly] : {std::pair{hl, hw}, {-hl, hw}, {-hl, -hw}, {hl, -hw}}) {
      poly.push_back({foot[0] + c * lx - s * ly, foot[1] + s * lx + c * ly});
    }
    return poly;
  }

  EnvConfig cfg_;
  ActionDecoder decoder_;
  std::unique_ptr<Plant> plant_;

  double vx_d_ = 0.0, vy_d_ = 0.0;
  int tick_ = 0;
  int step_start_tick_ = 0;
  int step_index_ = 0;
  bool started_ = false;
  bool terminated_ = false;
  bool fp_refreshed_ = false;
  double delta_pitch_ = 0.0, delta_roll_ = 0.0;
  double roll_offset_ = 0.0;
  double swing_roll_start_ = 0.0;
  double vx_prev_ = 0.0, vy_prev_ = 0.0;
  std::array<double, kLearnedJoints> anchors_{};
  std::vector<std::array<double, 2>> positions_;
  GaitParameters gait_;
  Observation obs_;
};

}  // namespace gaitforge
