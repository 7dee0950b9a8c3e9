#pragma once

// Hand-tuned stabilizing controller expressed as a raw action, so it drives
// the same decoder/regulator/PD stack as a learned policy.

#include <algorithm>

#include "gaitforge/action_decoder.hpp"
#include "gaitforge/policy_net.hpp"

namespace gaitforge {

struct BaselineGains {
  std::array<double, kKdChannels> kd = {20.0, 20.0, 20.0, 20.0, 4.0};
  std::array<double, kKfpChannels> kfp = {0.2, 0.6, 0.25, 0.1};
  std::array<double, kKtChannels> kt = {60.0, 10.0, 60.0, 10.0};
  // Swing hip pitch shift (rad) per m/s of longitudinal speed error. The
  // placement law alone integrates through the anchor and rings slowly.
  double speed_feedback = -0.2;
};

class BaselineController {
 public:
  explicit BaselineController(const ActionBounds& bounds, BaselineGains gains = {})
      : action_{}, gains_(gains) {
    auto to_raw = [&](int ch, double value) {
      const auto& b = bounds.channels[ch];
      action_[ch] = std::clamp((value - b.min) / (b.max - b.min), 0.0, 1.0);
    };
    // Free coefficients sit at the middle of their bounds.
    for (int ch = 0; ch < kCoeffChannels; ++ch) action_[ch] = 0.5;
    for (int i = 0; i < kKdChannels; ++i) to_raw(kKdOffset + i, gains.kd[i]);
    for (int i = 0; i < kKfpChannels; ++i) to_raw(kKfpOffset + i, gains.kfp[i]);
    for (int i = 0; i < kKtChannels; ++i) to_raw(kKtOffset + i, gains.kt[i]);
    const auto& b = bounds.channels[coeff_channel(kSwingPitch, 1)];
    feedback_scale_ = gains.speed_feedback / (b.max - b.min);
  }

  RawAction operator()(const Observation& o) const {
    RawAction a = action_;
    for (int m = 1; m <= kFreeCoeffsPerJoint; ++m) {
      const int ch = coeff_channel(kSwingPitch, m);
      a[ch] = std::clamp(a[ch] + feedback_scale_ * o.vx_err, 0.0, 1.0);
    }
    return a;
  }
  // Action at zero speed error.
  const RawAction& action() const { return action_; }
  const BaselineGains& gains() const { return gains_; }

 private:
  static constexpr int kSwingPitch = 6;

  RawAction action_;
  BaselineGains gains_;
  double feedback_scale_ = 0.0;
};

}  // namespace gaitforge
