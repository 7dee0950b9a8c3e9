#pragma once

// 12 -> 4x32 ReLU -> 45 sigmoid policy over a flat parameter vector.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "gaitforge/action_decoder.hpp"
#include "gaitforge/errors.hpp"

namespace gaitforge {

inline constexpr int kObservationSize = 12;

struct Observation {
  double vx_desired = 0.0;
  double vy_desired = 0.0;
  double vx_avg = 0.0;
  double vy_avg = 0.0;
  double vx_err = 0.0;
  double vy_err = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
  double roll_rate = 0.0;
  double pitch_rate = 0.0;
  double yaw_rate = 0.0;

  std::array<double, kObservationSize> to_array() const {
    return {vx_desired, vy_desired, vx_avg, vy_avg, vx_err,   vy_err,
            roll,       pitch,      yaw,    roll_rate, pitch_rate, yaw_rate};
  }
};

struct NormalizationSpec {
  std::array<double, kObservationSize> center{};
  std::array<double, kObservationSize> half_range{};

  static NormalizationSpec defaults() {
    NormalizationSpec s;
    s.half_range = {1.5, 1.5, 1.5, 1.5, 1.0, 1.0, 0.5, 0.5, 0.5, 2.0, 2.0, 2.0};
    return s;
  }

  void validate() const {
    for (int i = 0; i < kObservationSize; ++i) {
      if (!std::isfinite(center[i]) || !(half_range[i] > 0.0) ||
          !std::isfinite(half_range[i])) {
        throw Error(ErrorKind::kConfig, "normalization half ranges must be positive");
      }
    }
  }
};

inline std::array<double, kObservationSize> normalize(const Observation& obs,
                                                      const NormalizationSpec& spec) {
  const auto raw = obs.to_array();
  std::array<double, kObservationSize> out{};
  for (int i = 0; i < kObservationSize; ++i) {
    if (!std::isfinite(raw[i])) {
      throw Error(ErrorKind::kObservation, "non-finite observation channel " +
                                               std::to_string(i));
    }
    const double n = (raw[i] - spec.center[i]) / (2.0 * spec.half_range[i]);
    out[i] = std::clamp(n, -0.5, 0.5);
  }
  return out;
}

struct Architecture {
  int input = kObservationSize;
  std::vector<int> hidden = {32, 32, 32, 32};
  int output = kActionSize;

  std::vector<int> widths() const {
    std::vector<int> w;
    w.push_back(input);
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(output);
    return w;
  }

  std::size_t param_count() const {
    const auto w = widths();
    std::size_t n = 0;
    for (std::size_t l = 1; l < w.size(); ++l) {
      n += static_cast<std::size_t>(w[l]) * w[l - 1] + w[l];
    }
    return n;
  }

  bool operator==(const Architecture&) const = default;
};

struct PolicyParams {
  std::vector<double> flat;
  Architecture arch;
};

// Logistic function kept strictly inside (0, 1) where double rounding would
// otherwise saturate it.
inline double sigmoid(double x) {
  const double y = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  constexpr double lo = std::numeric_limits<double>::min();
  const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(y, lo, hi);
}

class PolicyNet {
 public:
  explicit PolicyNet(Architecture arch = {}) : arch_(std::move(arch)) {
    widths_ = arch_.widths();
    std::size_t widest = 0;
    for (int w : widths_) widest = std::max<std::size_t>(widest, w);
    a_.resize(widest);
    b_.resize(widest);
  }

  const Architecture& arch() const { return arch_; }
  std::size_t param_count() const { return arch_.param_count(); }

  // Reuses internal scratch buffers; one instance per thread.
  void forward(std::span<const double> params, std::span<const double> input,
               std::span<double> output) {
    if (params.size() != param_count()) {
      throw Error(ErrorKind::kParameter, "expected " + std::to_string(param_count()) +
                                             " parameters, got " +
                                             std::to_string(params.size()));
    }
    if (input.size() != static_cast<std::size_t>(arch_.input) ||
        output.size() != static_cast<std::size_t>(arch_.output)) {
      throw Error(ErrorKind::kDimension, "policy input/output size mismatch");
    }
    std::copy(input.begin(), input.end(), a_.begin());
    const double* p = params.data();
    const std::size_t layers = widths_.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
      const int n_in = widths_[l];
      const int n_out = widths_[l + 1];
      const double* w = p;
      const double* bias = p + static_cast<std::size_t>(n_in) * n_out;
      for (int o = 0; o < n_out; ++o) {
        const double* row = w + static_cast<std::size_t>(o) * n_in;
        double acc = bias[o];
        for (int i = 0; i < n_in; ++i) acc += row[i] * a_[i];
        b_[o] = acc;
      }
      p = bias + n_out;
      if (l + 1 < layers) {
        for (int o = 0; o < n_out; ++o) a_[o] = b_[o] > 0.0 ? b_[o] : 0.0;
      } else {
        for (int o = 0; o < n_out; ++o) output[o] = sigmoid(b_[o]);
      }
    }
  }

  // Pre-sigmoid outputs; used to check piecewise affinity.
  void logits(std::span<const double> params, std::span<const double> input,
              std::span<double> output) {
    forward(params, input, output);
    std::copy_n(b_.begin(), arch_.output, output.begin());
  }

 private:
  Architecture arch_;
  std::vector<int> widths_;
  std::vector<double> a_;
  std::vector<double> b_;
};

inline RawAction forward(const PolicyParams& params,
                         std::span<const double> normalized) {
  PolicyNet net(params.arch);
  if (params.arch.output != kActionSize) {
    throw Error(ErrorKind::kDimension, "policy output must have 45 channels");
  }
  RawAction out{};
  net.forward(params.flat, normalized, out);
  return out;
}

// Weights uniform in +-1/sqrt(fan_in), biases zero.
inline PolicyParams init_params(std::uint64_t seed, Architecture arch = {}) {
  PolicyParams p;
  p.arch = std::move(arch);
  p.flat.assign(p.arch.param_count(), 0.0);
  std::mt19937_64 rng(seed);
  const auto w = p.arch.widths();
  std::size_t at = 0;
  for (std::size_t l = 1; l < w.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(w[l - 1]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    const std::size_t n_w = static_cast<std::size_t>(w[l]) * w[l - 1];
    for (std::size_t i = 0; i < n_w; ++i) p.flat[at + i] = dist(rng);
    at += n_w + w[l];
  }
  return p;
}

}  // namespace gaitforge
