#pragma once

// Policy output decoding: bound scaling, impact/periodicity anchoring and
// left/right symmetry of the Bezier coefficient matrices.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gaitforge/errors.hpp"
#include "gaitforge/gait_kernel.hpp"
#include "gaitforge/joints.hpp"

namespace gaitforge {

inline constexpr int kFreeCoeffsPerJoint = 4;
inline constexpr int kCoeffChannels = kLearnedJoints * kFreeCoeffsPerJoint;
inline constexpr int kKdChannels = 5;
inline constexpr int kKfpChannels = 4;
inline constexpr int kKtChannels = 4;
inline constexpr int kActionSize = kCoeffChannels + kKdChannels + kKfpChannels + kKtChannels;
static_assert(kCoeffChannels == 32);
static_assert(kActionSize == 45);

inline constexpr int kKdOffset = kCoeffChannels;
inline constexpr int kKfpOffset = kKdOffset + kKdChannels;
inline constexpr int kKtOffset = kKfpOffset + kKfpChannels;

// Channel of free coefficient alpha[m] (m in 1..4) of decoder joint j.
inline constexpr int coeff_channel(int decoder_joint, int m) {
  return decoder_joint * kFreeCoeffsPerJoint + (m - 1);
}

using RawAction = std::array<double, kActionSize>;

struct ChannelBounds {
  double min = 0.0;
  double max = 1.0;
};

struct ActionBounds {
  std::array<ChannelBounds, kActionSize> channels{};
};

struct JointLimits {
  JointVector lower{};
  JointVector upper{};
};

inline void validate(const ActionBounds& bounds, const JointLimits& limits) {
  for (int i = 0; i < kActionSize; ++i) {
    const auto& b = bounds.channels[i];
    if (!std::isfinite(b.min) || !std::isfinite(b.max) || !(b.min < b.max)) {
      throw Error(ErrorKind::kConfig, "action channel " + std::to_string(i) +
                                          " requires finite min < max");
    }
  }
  for (int j = 0; j < kLearnedJoints; ++j) {
    const int col = kDecoderColumns[j];
    for (int m = 1; m <= kFreeCoeffsPerJoint; ++m) {
      const auto& b = bounds.channels[coeff_channel(j, m)];
      if (b.min < limits.lower[col] || b.max > limits.upper[col]) {
        throw Error(ErrorKind::kConfig, "coefficient bounds of " +
                                            std::string(kDecoderJointNames[j]) +
                                            " exceed the joint's mechanical range");
      }
    }
  }
}

inline std::array<double, kActionSize> scale(std::span<const double> raw,
                                             const ActionBounds& bounds) {
  if (raw.size() != kActionSize) {
    throw Error(ErrorKind::kDimension, "raw action must have 45 entries");
  }
  std::array<double, kActionSize> out{};
  for (int i = 0; i < kActionSize; ++i) {
    const double r = raw[i];
    if (!(r >= 0.0 && r <= 1.0)) {
      throw Error(ErrorKind::kDomain, "raw action entry outside [0, 1]");
    }
    const auto& b = bounds.channels[i];
    // Written so r = 1 lands on max exactly.
    out[i] = r == 1.0 ? b.max : b.min + r * (b.max - b.min);
  }
  return out;
}

class SymmetryMatrix {
 public:
  using Table = std::array<std::array<int, kNumJoints>, kNumJoints>;

  SymmetryMatrix() : SymmetryMatrix(lateral_mirror()) {}

  explicit SymmetryMatrix(const Table& t) : t_(t) {
    for (int i = 0; i < kNumJoints; ++i) {
      int row_nz = 0, col_nz = 0;
      for (int j = 0; j < kNumJoints; ++j) {
        if (t_[i][j] < -1 || t_[i][j] > 1) {
          throw Error(ErrorKind::kConfig, "symmetry entries must be -1, 0 or 1");
        }
        row_nz += t_[i][j] != 0;
        col_nz += t_[j][i] != 0;
      }
      if (row_nz != 1 || col_nz != 1) {
        throw Error(ErrorKind::kConfig,
                    "symmetry matrix needs exactly one nonzero per row and column");
      }
    }
    const auto sq = product(t_, t_);
    for (int i = 0; i < kNumJoints; ++i) {
      for (int j = 0; j < kNumJoints; ++j) {
        if (sq[i][j] != (i == j ? 1 : 0)) {
          throw Error(ErrorKind::kConfig, "symmetry matrix must be an involution");
        }
      }
    }
  }

  // Left/right joint swap with roll and yaw negated.
  static Table lateral_mirror() {
    Table t{};
    for (int type = 0; type < kJointsPerLeg; ++type) {
      const int sign = (type == kHipRoll || type == kHipYaw) ? -1 : 1;
      t[kRightHipRoll + type][kLeftHipRoll + type] = sign;
      t[kLeftHipRoll + type][kRightHipRoll + type] = sign;
    }
    return t;
  }

  static Table product(const Table& a, const Table& b) {
    Table c{};
    for (int i = 0; i < kNumJoints; ++i)
      for (int k = 0; k < kNumJoints; ++k)
        for (int j = 0; j < kNumJoints; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
  }

  const Table& table() const { return t_; }
  int operator()(int i, int j) const { return t_[i][j]; }

  // Column that row i maps to, and its sign.
  int partner(int i) const {
    for (int j = 0; j < kNumJoints; ++j)
      if (t_[i][j] != 0) return j;
    return i;
  }
  int sign(int i) const { return t_[i][partner(i)]; }

  // Row vector times T.
  JointVector apply(const JointVector& v) const {
    JointVector out{};
    for (int i = 0; i < kNumJoints; ++i) {
      const int j = partner(i);
      out[j] = t_[i][j] * v[i];
    }
    return out;
  }

 private:
  Table t_;
};

// Rows are coefficient indices, columns are joints.
using CoeffMatrix = std::array<JointVector, kBezierCoeffs>;

inline CoeffMatrix mirror(const CoeffMatrix& alpha, const SymmetryMatrix& t) {
  CoeffMatrix out{};
  for (int r = 0; r < kBezierCoeffs; ++r) {
    for (int j = 0; j < kNumJoints; ++j) {
      double acc = 0.0;
      for (int i = 0; i < kNumJoints; ++i) {
        if (t(i, j) != 0) acc += t(i, j) * alpha[r][i];
      }
      out[r][j] = acc;
    }
  }
  return out;
}

// Ankle columns are not learned: the stance ankle is passive and the swing
// ankle follows the flat-foot reference.
enum class ColumnKind : std::uint8_t { kBezier, kPassive, kKinematic };

struct GaitParameters {
  CoeffMatrix alpha_right{};
  CoeffMatrix alpha_left{};
  std::array<ColumnKind, kNumJoints> kind_right{};
  std::array<ColumnKind, kNumJoints> kind_left{};
  std::array<double, kKdChannels> kd{};
  std::array<double, kKfpChannels> kfp{};  // K_px, K_dx, K_py, K_dy
  std::array<double, kKtChannels> kt{};    // K_p,troll, K_d,troll, K_p,tpitch, K_d,tpitch

  const CoeffMatrix& alpha(Stance s) const {
    return s == Stance::kRight ? alpha_right : alpha_left;
  }
  ColumnKind kind(Stance s, int joint) const {
    return s == Stance::kRight ? kind_right[joint] : kind_left[joint];
  }
  BezierCurve curve(Stance s, int joint) const {
    BezierCurve c;
    const auto& a = alpha(s);
    for (int r = 0; r < kBezierCoeffs; ++r) c.coeffs[r] = a[r][joint];
    return c;
  }
};

// q_measured: the eight learned joints at step start, in decoder order and in
// the reference-stance frame.
inline GaitParameters assemble(std::span<const double> scaled,
                               std::span<const double> q_measured,
                               const SymmetryMatrix& t) {
  if (scaled.size() != kActionSize) {
    throw Error(ErrorKind::kDimension, "scaled action must have 45 entries");
  }
  if (q_measured.size() != kLearnedJoints) {
    throw Error(ErrorKind::kDimension, "anchor vector must hold 8 joint positions");
  }
  GaitParameters g;
  g.kind_right.fill(ColumnKind::kBezier);
  g.kind_right[kRightAnkle] = ColumnKind::kPassive;
  g.kind_right[kLeftAnkle] = ColumnKind::kKinematic;
  for (int j = 0; j < kLearnedJoints; ++j) {
    const int col = kDecoderColumns[j];
    g.alpha_right[0][col] = q_measured[j];
    g.alpha_right[kBezierDegree][col] = q_measured[j];
    for (int m = 1; m <= kFreeCoeffsPerJoint; ++m) {
      g.alpha_right[m][col] = scaled[coeff_channel(j, m)];
    }
  }
  std::copy_n(scaled.begin() + kKdOffset, kKdChannels, g.kd.begin());
  std::copy_n(scaled.begin() + kKfpOffset, kKfpChannels, g.kfp.begin());
  std::copy_n(scaled.begin() + kKtOffset, kKtChannels, g.kt.begin());

  g.alpha_left = mirror(g.alpha_right, t);
  for (int i = 0; i < kNumJoints; ++i) g.kind_left[t.partner(i)] = g.kind_right[i];
  return g;
}

class ActionDecoder {
 public:
  ActionDecoder(ActionBounds bounds, SymmetryMatrix t, const JointLimits& limits)
      : bounds_(bounds), t_(t) {
    validate(bounds_, limits);
  }

  const ActionBounds& bounds() const { return bounds_; }
  const SymmetryMatrix& symmetry() const { return t_; }

  // Physical joint positions -> decoder-order anchors in the reference frame.
  std::array<double, kLearnedJoints> anchors(const JointVector& q, Stance stance) const {
    const JointVector ref = stance == Stance::kRight ? q : t_.apply(q);
    std::array<double, kLearnedJoints> out{};
    for (int j = 0; j < kLearnedJoints; ++j) out[j] = ref[kDecoderColumns[j]];
    return out;
  }

  GaitParameters decode(std::span<const double> raw,
                        std::span<const double> q_measured) const {
    const auto scaled = scale(raw, bounds_);
    return assemble(scaled, q_measured, t_);
  }

 private:
  ActionBounds bounds_;
  SymmetryMatrix t_;
};

}  // namespace gaitforge
