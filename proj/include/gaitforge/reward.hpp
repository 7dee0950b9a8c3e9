#pragma once

// Eight clamped reward components, their weighted total and the early
// termination predicate.

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "gaitforge/errors.hpp"
#include "gaitforge/joints.hpp"

namespace gaitforge {

inline constexpr int kNumRewards = 8;

enum RewardIndex : int { kRVx = 0, kRVy, kRHeight, kREnergy, kRCom, kRAng, kRAngVel, kRFeet };

inline constexpr std::array<const char*, kNumRewards> kRewardNames = {
    "r_vx", "r_vy", "r_h", "r_u", "r_com", "r_ang", "r_angvel", "r_fd"};

inline constexpr std::array<double, kNumRewards> kRewardWeights = {0.8, 0.2, 0.1, 0.01,
                                                                   0.1, 0.5, 0.5, 5.0};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct RewardInputs {
  double vx_avg = 0.0, vy_avg = 0.0;
  double vx_desired = 0.0, vy_desired = 0.0;
  double pz = 0.0, pz_desired = 0.0;
  JointVector u_norm{};
  Vec2 com_xy;
  std::vector<Vec2> support_polygon;
  double com_distance = 0.0;  // CoM to polygon centre
  double roll = 0.0, pitch = 0.0, yaw = 0.0;
  double roll_rate = 0.0, pitch_rate = 0.0, yaw_rate = 0.0;
  double feet_distance = 0.0;
};

struct RewardVector {
  std::array<double, kNumRewards> components{};
  double total = 0.0;
};

struct TerminationState {
  double yaw = 0.0, pitch = 0.0, roll = 0.0;
  double pz = 0.0;
  double feet_distance = 0.0;
};

inline double clamp_unit(double r) { return std::clamp(r, -1.0, 1.0); }

inline double reward_velocity(double v_avg, double v_desired) {
  const double e = v_avg - v_desired;
  if (std::abs(e) <= 0.1) {
    const double s = e + 1e-5;
    if (s == 0.0) return 1.0;
    return clamp_unit(1e-3 / (s * s));
  }
  return clamp_unit(-1e-3 / (e * e));
}

inline double reward_height(double pz, double pz_desired) {
  if (!(pz > 0.0) || !(pz_desired > 0.0)) {
    throw Error(ErrorKind::kDomain, "heights must be positive");
  }
  const double e = pz - pz_desired;
  if (std::abs(e) <= 0.05) {
    const double ratio = pz <= pz_desired ? pz / pz_desired : pz_desired / pz;
    return clamp_unit(ratio * ratio);
  }
  return clamp_unit(-e * e);
}

inline double reward_energy(std::span<const double> u_norm) {
  double s = 0.0;
  for (double u : u_norm) s += u * u;
  return clamp_unit(-s);
}

// Convex containment; points on an edge count as inside.
inline bool point_in_convex_polygon(Vec2 p, std::span<const Vec2> poly) {
  if (poly.size() < 3) return false;
  bool pos = false, neg = false;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % poly.size()];
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    pos |= cross > 0.0;
    neg |= cross < 0.0;
    if (pos && neg) return false;
  }
  return true;
}

inline Vec2 polygon_center(std::span<const Vec2> poly) {
  Vec2 c;
  for (const auto& v : poly) {
    c.x += v.x;
    c.y += v.y;
  }
  if (!poly.empty()) {
    c.x /= static_cast<double>(poly.size());
    c.y /= static_cast<double>(poly.size());
  }
  return c;
}

inline double reward_com_branch(bool inside, double d) {
  if (!(d >= 0.0)) throw Error(ErrorKind::kDomain, "CoM distance must be nonnegative");
  if (inside) {
    if (d == 0.0) return 1.0;
    return clamp_unit(0.01 / d);
  }
  if (d == 0.1) return -1.0;
  return clamp_unit(-100.0 / (d - 0.1));
}

inline double reward_com(Vec2 com_xy, std::span<const Vec2> polygon, double d) {
  return reward_com_branch(point_in_convex_polygon(com_xy, polygon), d);
}

struct PostureRewards {
  double angle = 0.0;
  double rate = 0.0;
};

inline PostureRewards reward_posture(double roll, double pitch, double yaw, double roll_rate,
                                     double pitch_rate, double yaw_rate) {
  return {clamp_unit(-(yaw * yaw + pitch * pitch + roll * roll)),
          clamp_unit(-(yaw_rate * yaw_rate + pitch_rate * pitch_rate + roll_rate * roll_rate))};
}

inline double reward_foot_distance(double d_feet) {
  if (d_feet > 0.4) return clamp_unit(-(d_feet - 0.4) * (d_feet - 0.4));
  if (d_feet < 0.2) return clamp_unit(-(d_feet - 0.2) * (d_feet - 0.2));
  return 0.0;
}

inline double total(std::span<const double> components) {
  if (components.size() != kNumRewards) {
    throw Error(ErrorKind::kDimension, "reward vector has 8 components");
  }
  double t = 0.0;
  for (int i = 0; i < kNumRewards; ++i) t += kRewardWeights[i] * components[i];
  return t;
}

inline RewardVector compute_rewards(const RewardInputs& in) {
  RewardVector r;
  auto& c = r.components;
  c[kRVx] = reward_velocity(in.vx_avg, in.vx_desired);
  c[kRVy] = reward_velocity(in.vy_avg, in.vy_desired);
  c[kRHeight] = reward_height(in.pz, in.pz_desired);
  c[kREnergy] = reward_energy(in.u_norm);
  c[kRCom] = reward_com(in.com_xy, in.support_polygon, in.com_distance);
  const auto posture =
      reward_posture(in.roll, in.pitch, in.yaw, in.roll_rate, in.pitch_rate, in.yaw_rate);
  c[kRAng] = posture.angle;
  c[kRAngVel] = posture.rate;
  c[kRFeet] = reward_foot_distance(in.feet_distance);
  r.total = total(c);
  return r;
}

struct TerminationLimits {
  double max_abs_angle = 0.5;
  double min_height = 0.75;
  double max_height = 1.1;
  double min_feet_distance = 0.05;
};

// Safe set is the open region |angle| < 0.5, 0.75 < pz < 1.1,
// feet_distance > 0.05; its boundary terminates.
inline bool terminated(const TerminationState& s, const TerminationLimits& lim = {}) {
  return std::abs(s.yaw) >= lim.max_abs_angle || std::abs(s.pitch) >= lim.max_abs_angle ||
         std::abs(s.roll) >= lim.max_abs_angle || s.pz <= lim.min_height ||
         s.pz >= lim.max_height || s.feet_distance <= lim.min_feet_distance ||
         !std::isfinite(s.pz);
}

}  // namespace gaitforge
