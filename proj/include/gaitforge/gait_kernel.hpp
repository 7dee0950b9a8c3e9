#pragma once

// Phase variable, degree-5 Bezier virtual constraints and output residuals.

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "gaitforge/errors.hpp"

namespace gaitforge {

inline constexpr int kBezierDegree = 5;
inline constexpr int kBezierCoeffs = kBezierDegree + 1;
inline constexpr double kDefaultStepDuration = 0.35;

struct PhaseClock {
  double t_start = 0.0;
  double t_step = kDefaultStepDuration;
};

// Normalized time within a walking step. Overruns clamp to 1; the caller
// switches stance when tau reaches 1.
inline double phase(const PhaseClock& clock, double t) {
  if (!(clock.t_step > 0.0)) {
    throw Error(ErrorKind::kInvalidClock, "step duration must be positive");
  }
  if (t < clock.t_start) {
    throw Error(ErrorKind::kInvalidTime, "time precedes step start");
  }
  const double tau = (t - clock.t_start) / clock.t_step;
  return tau > 1.0 ? 1.0 : tau;
}

inline constexpr std::array<double, kBezierCoeffs> kBinomial5 = {1, 5, 10, 10, 5, 1};

// Bernstein basis values b_k(tau) = C(5,k) tau^k (1-tau)^(5-k).
inline std::array<double, kBezierCoeffs> bernstein5(double tau) {
  std::array<double, kBezierCoeffs> b{};
  const double s = 1.0 - tau;
  std::array<double, kBezierCoeffs> tp{}, sp{};
  tp[0] = 1.0;
  sp[0] = 1.0;
  for (int k = 1; k < kBezierCoeffs; ++k) {
    tp[k] = tp[k - 1] * tau;
    sp[k] = sp[k - 1] * s;
  }
  for (int k = 0; k < kBezierCoeffs; ++k) {
    b[k] = kBinomial5[k] * tp[k] * sp[kBezierDegree - k];
  }
  return b;
}

struct BezierCurve {
  std::array<double, kBezierCoeffs> coeffs{};

  double front() const { return coeffs.front(); }
  double back() const { return coeffs.back(); }
};

namespace detail {
inline void check_tau(double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorKind::kDomain, "phase outside [0, 1]");
  }
}
}  // namespace detail

inline double bezier_eval(const BezierCurve& curve, double tau) {
  detail::check_tau(tau);
  if (tau == 1.0) return curve.coeffs[kBezierDegree];
  // de Casteljau: every level is a convex combination, so the result stays
  // inside the coefficient hull.
  std::array<double, kBezierCoeffs> a = curve.coeffs;
  for (int level = kBezierDegree; level > 0; --level) {
    for (int k = 0; k < level; ++k) a[k] = a[k] + tau * (a[k + 1] - a[k]);
  }
  return a[0];
}

// d/dt of the curve: the degree-4 hodograph with coefficients
// 5 (a[k+1] - a[k]), divided by the step duration.
inline double bezier_deriv(const BezierCurve& curve, double tau, double t_step) {
  detail::check_tau(tau);
  if (!(t_step > 0.0)) {
    throw Error(ErrorKind::kInvalidClock, "step duration must be positive");
  }
  const double s = 1.0 - tau;
  constexpr std::array<double, kBezierDegree> binom4 = {1, 4, 6, 4, 1};
  double dy = 0.0;
  for (int k = 0; k < kBezierDegree; ++k) {
    const double d = kBezierDegree * (curve.coeffs[k + 1] - curve.coeffs[k]);
    dy += d * binom4[k] * std::pow(tau, k) * std::pow(s, kBezierDegree - 1 - k);
  }
  return dy / t_step;
}

struct OutputResidual {
  std::vector<double> y2;
};

inline OutputResidual residual(std::span<const double> actual,
                               std::span<const double> desired) {
  if (actual.size() != desired.size()) {
    throw Error(ErrorKind::kDimension, "residual operands differ in length");
  }
  OutputResidual r;
  r.y2.resize(actual.size());
  for (std::size_t i = 0; i < actual.size(); ++i) r.y2[i] = actual[i] - desired[i];
  return r;
}

}  // namespace gaitforge
