#pragma once

// Run configuration: a single JSON document with an embedded default for
// every field. Unknown keys are rejected.

#include <array>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaitforge/action_decoder.hpp"
#include "gaitforge/biped_env.hpp"
#include "gaitforge/es_trainer.hpp"
#include "gaitforge/policy_net.hpp"
#include "gaitforge/surrogate.hpp"

namespace gaitforge {

struct DecoderConfig {
  // Bounds of the four free coefficients of each learned joint, decoder order.
  std::array<ChannelBounds, kLearnedJoints> coefficient = {{
      {-0.15, 0.15},  // stance hip roll
      {-0.15, 0.15},  // stance hip yaw
      {-0.4, 0.4},    // stance hip pitch
      {0.35, 0.95},   // stance knee
      {-0.15, 0.15},  // swing hip roll
      {-0.15, 0.15},  // swing hip yaw
      {-0.4, 0.4},    // swing hip pitch
      {0.35, 1.35},   // swing knee
  }};
  std::array<ChannelBounds, kKdChannels> kd = {{{1, 40}, {1, 40}, {1, 40}, {1, 40}, {0.5, 8}}};
  std::array<ChannelBounds, kKfpChannels> kfp = {{{0, 1}, {0, 1}, {0, 1}, {0, 1}}};
  std::array<ChannelBounds, kKtChannels> kt = {{{0, 120}, {0, 20}, {0, 120}, {0, 20}}};
  SymmetryMatrix::Table symmetry = SymmetryMatrix::lateral_mirror();

  ActionBounds bounds() const {
    ActionBounds b;
    for (int j = 0; j < kLearnedJoints; ++j)
      for (int m = 1; m <= kFreeCoeffsPerJoint; ++m) b.channels[coeff_channel(j, m)] = coefficient[j];
    for (int i = 0; i < kKdChannels; ++i) b.channels[kKdOffset + i] = kd[i];
    for (int i = 0; i < kKfpChannels; ++i) b.channels[kKfpOffset + i] = kfp[i];
    for (int i = 0; i < kKtChannels; ++i) b.channels[kKtOffset + i] = kt[i];
    return b;
  }
};

struct RunConfig {
  EnvConfig env;
  SurrogateConfig surrogate;
  DecoderConfig decoder;
  NormalizationSpec normalization = NormalizationSpec::defaults();
  ESConfig es;

  JointLimits joint_limits() const {
    JointLimits lim;
    for (int j = 0; j < kNumJoints; ++j) {
      lim.lower[j] = surrogate.joint_lower[joint_type(j)];
      lim.upper[j] = surrogate.joint_upper[joint_type(j)];
    }
    return lim;
  }

  ActionDecoder make_decoder() const {
    return ActionDecoder(decoder.bounds(), SymmetryMatrix(decoder.symmetry), joint_limits());
  }

  void validate() const {
    env.validate();
    normalization.validate();
    es.validate();
    make_decoder();
    SurrogateBiped check(surrogate);
  }
};

namespace config_detail {

using nlohmann::json;

inline constexpr std::array<const char*, kJointsPerLeg> kJointTypeNames = {
    "hip_roll", "hip_yaw", "hip_pitch", "knee", "ankle"};
inline constexpr std::array<const char*, kKfpChannels> kKfpNames = {"k_px", "k_dx", "k_py", "k_dy"};
inline constexpr std::array<const char*, kKtChannels> kKtNames = {"kp_roll", "kd_roll", "kp_pitch",
                                                                  "kd_pitch"};

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("expected an object");
  }

  // Reads an optional key; absent keys keep the default already in `out`.
  template <typename T>
  void field(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    read(j_.at(key), path_ + "/" + key, out);
  }

  template <typename F>
  void object(const char* key, F&& fn) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Reader sub(j_.at(key), path_ + "/" + key);
    fn(sub);
    sub.finish();
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw Error(ErrorKind::kConfig, path_ + "/" + it.key() + ": unknown key");
      }
    }
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::kConfig, (path_.empty() ? "/" : path_) + ": " + msg);
  }

 private:
  static void read(const json& v, const std::string& path, double& out) {
    if (!v.is_number()) throw Error(ErrorKind::kConfig, path + ": expected a number");
    out = v.get<double>();
  }
  static void read(const json& v, const std::string& path, int& out) {
    if (!v.is_number_integer()) throw Error(ErrorKind::kConfig, path + ": expected an integer");
    out = v.get<int>();
  }
  static void read(const json& v, const std::string& path, std::uint64_t& out) {
    if (!v.is_number_unsigned()) {
      throw Error(ErrorKind::kConfig, path + ": expected a nonnegative integer");
    }
    out = v.get<std::uint64_t>();
  }
  static void read(const json& v, const std::string& path, bool& out) {
    if (!v.is_boolean()) throw Error(ErrorKind::kConfig, path + ": expected a boolean");
    out = v.get<bool>();
  }
  static void read(const json& v, const std::string& path, ChannelBounds& out) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw Error(ErrorKind::kConfig, path + ": expected [min, max]");
    }
    out = {v[0].get<double>(), v[1].get<double>()};
  }
  template <typename T, std::size_t N>
  static void read(const json& v, const std::string& path, std::array<T, N>& out) {
    if (!v.is_array() || v.size() != N) {
      throw Error(ErrorKind::kConfig, path + ": expected an array of " + std::to_string(N));
    }
    for (std::size_t i = 0; i < N; ++i) read(v[i], path + "/" + std::to_string(i), out[i]);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename T, std::size_t N, std::size_t M>
void named(Reader& r, const std::array<const char*, M>& names, std::array<T, N>& values) {
  static_assert(N == M);
  for (std::size_t i = 0; i < N; ++i) r.field(names[i], values[i]);
}

template <typename T, std::size_t N, std::size_t M>
json named_json(const std::array<const char*, M>& names, const std::array<T, N>& values) {
  json j = json::object();
  for (std::size_t i = 0; i < N; ++i) j[names[i]] = values[i];
  return j;
}

inline json bounds_json(const ChannelBounds& b) { return json::array({b.min, b.max}); }

template <std::size_t N, std::size_t M>
json named_bounds(const std::array<const char*, M>& names,
                  const std::array<ChannelBounds, N>& values) {
  json j = json::object();
  for (std::size_t i = 0; i < N; ++i) j[names[i]] = bounds_json(values[i]);
  return j;
}

inline json command_json(const CommandBox& c) {
  return {{"vx_min", c.vx_min}, {"vx_max", c.vx_max}, {"vy_min", c.vy_min}, {"vy_max", c.vy_max}};
}

inline void read_command(Reader& r, CommandBox& c) {
  r.field("vx_min", c.vx_min);
  r.field("vx_max", c.vx_max);
  r.field("vy_min", c.vy_min);
  r.field("vy_max", c.vy_max);
}

inline std::array<const char*, kLearnedJoints> decoder_joint_names() {
  std::array<const char*, kLearnedJoints> n{};
  for (int j = 0; j < kLearnedJoints; ++j) n[j] = kDecoderJointNames[j].data();
  return n;
}

}  // namespace config_detail

inline nlohmann::json to_json(const RunConfig& c) {
  using namespace config_detail;
  json env = {
      {"control_dt", c.env.control_dt},
      {"substeps", c.env.substeps},
      {"step_duration", c.env.step_duration},
      {"max_ticks", c.env.max_ticks},
      {"joint_kp", named_json(kJointTypeNames, c.env.joint_kp)},
      {"torque_limit", named_json(kJointTypeNames, c.env.torque_limit)},
      {"flat_foot_offset", c.env.flat_foot_offset},
      {"nominal_hip_abduction", c.env.nominal_hip_abduction},
      {"desired_roll", c.env.desired_roll},
      {"desired_pitch", c.env.desired_pitch},
      {"pz_desired", c.env.pz_desired},
      {"foot_length", c.env.foot_length},
      {"foot_width", c.env.foot_width},
      {"com_offset", c.env.com_offset},
      {"command", command_json(c.env.command)},
      {"termination",
       {{"max_abs_angle", c.env.termination.max_abs_angle},
        {"min_height", c.env.termination.min_height},
        {"max_height", c.env.termination.max_height},
        {"min_feet_distance", c.env.termination.min_feet_distance}}},
  };
  const auto& s = c.surrogate;
  json sur = {
      {"gravity", s.gravity},
      {"lip_height", s.lip_height},
      {"pelvis_mass", s.pelvis_mass},
      {"thigh_length", s.thigh_length},
      {"shin_length", s.shin_length},
      {"hip_half_width", s.hip_half_width},
      {"nominal_height", s.nominal_height},
      {"joint_inertia", named_json(kJointTypeNames, s.joint_inertia)},
      {"joint_damping", named_json(kJointTypeNames, s.joint_damping)},
      {"joint_lower", named_json(kJointTypeNames, s.joint_lower)},
      {"joint_upper", named_json(kJointTypeNames, s.joint_upper)},
      {"torso_inertia", s.torso_inertia},
      {"torso_gravity_stiffness", s.torso_gravity_stiffness},
      {"torso_lean_gain", s.torso_lean_gain},
      {"torso_damping", s.torso_damping},
      {"joint_jitter", s.joint_jitter},
      {"jitter", s.jitter},
  };
  json dec = {
      {"coefficient_bounds", named_bounds(decoder_joint_names(), c.decoder.coefficient)},
      {"kd_bounds", named_bounds(kJointTypeNames, c.decoder.kd)},
      {"kfp_bounds", named_bounds(kKfpNames, c.decoder.kfp)},
      {"kt_bounds", named_bounds(kKtNames, c.decoder.kt)},
      {"symmetry", c.decoder.symmetry},
  };
  json norm = {{"center", c.normalization.center}, {"half_range", c.normalization.half_range}};
  json es = {
      {"pairs", c.es.pairs},
      {"sigma", c.es.sigma},
      {"learning_rate", c.es.learning_rate},
      {"iterations", c.es.iterations},
      {"episodes_per_candidate", c.es.episodes_per_candidate},
      {"seed", c.es.seed},
      {"checkpoint_interval", c.es.checkpoint_interval},
      {"command", command_json(c.es.command)},
  };
  return {{"env", env}, {"surrogate", sur}, {"decoder", dec}, {"normalization", norm}, {"es", es}};
}

inline RunConfig config_from_json(const nlohmann::json& j) {
  using namespace config_detail;
  RunConfig c;
  Reader root(j, "");
  root.object("env", [&](Reader& r) {
    r.field("control_dt", c.env.control_dt);
    r.field("substeps", c.env.substeps);
    r.field("step_duration", c.env.step_duration);
    r.field("max_ticks", c.env.max_ticks);
    r.object("joint_kp", [&](Reader& g) { named(g, kJointTypeNames, c.env.joint_kp); });
    r.object("torque_limit", [&](Reader& g) { named(g, kJointTypeNames, c.env.torque_limit); });
    r.field("flat_foot_offset", c.env.flat_foot_offset);
    r.field("nominal_hip_abduction", c.env.nominal_hip_abduction);
    r.field("desired_roll", c.env.desired_roll);
    r.field("desired_pitch", c.env.desired_pitch);
    r.field("pz_desired", c.env.pz_desired);
    r.field("foot_length", c.env.foot_length);
    r.field("foot_width", c.env.foot_width);
    r.field("com_offset", c.env.com_offset);
    r.object("command", [&](Reader& g) { read_command(g, c.env.command); });
    r.object("termination", [&](Reader& g) {
      g.field("max_abs_angle", c.env.termination.max_abs_angle);
      g.field("min_height", c.env.termination.min_height);
      g.field("max_height", c.env.termination.max_height);
      g.field("min_feet_distance", c.env.termination.min_feet_distance);
    });
  });
  root.object("surrogate", [&](Reader& r) {
    auto& s = c.surrogate;
    r.field("gravity", s.gravity);
    r.field("lip_height", s.lip_height);
    r.field("pelvis_mass", s.pelvis_mass);
    r.field("thigh_length", s.thigh_length);
    r.field("shin_length", s.shin_length);
    r.field("hip_half_width", s.hip_half_width);
    r.field("nominal_height", s.nominal_height);
    r.object("joint_inertia", [&](Reader& g) { named(g, kJointTypeNames, s.joint_inertia); });
    r.object("joint_damping", [&](Reader& g) { named(g, kJointTypeNames, s.joint_damping); });
    r.object("joint_lower", [&](Reader& g) { named(g, kJointTypeNames, s.joint_lower); });
    r.object("joint_upper", [&](Reader& g) { named(g, kJointTypeNames, s.joint_upper); });
    r.field("torso_inertia", s.torso_inertia);
    r.field("torso_gravity_stiffness", s.torso_gravity_stiffness);
    r.field("torso_lean_gain", s.torso_lean_gain);
    r.field("torso_damping", s.torso_damping);
    r.field("joint_jitter", s.joint_jitter);
    r.field("jitter", s.jitter);
  });
  root.object("decoder", [&](Reader& r) {
    r.object("coefficient_bounds",
             [&](Reader& g) { named(g, decoder_joint_names(), c.decoder.coefficient); });
    r.object("kd_bounds", [&](Reader& g) { named(g, kJointTypeNames, c.decoder.kd); });
    r.object("kfp_bounds", [&](Reader& g) { named(g, kKfpNames, c.decoder.kfp); });
    r.object("kt_bounds", [&](Reader& g) { named(g, kKtNames, c.decoder.kt); });
    r.field("symmetry", c.decoder.symmetry);
  });
  root.object("normalization", [&](Reader& r) {
    r.field("center", c.normalization.center);
    r.field("half_range", c.normalization.half_range);
  });
  root.object("es", [&](Reader& r) {
    r.field("pairs", c.es.pairs);
    r.field("sigma", c.es.sigma);
    r.field("learning_rate", c.es.learning_rate);
    r.field("iterations", c.es.iterations);
    r.field("episodes_per_candidate", c.es.episodes_per_candidate);
    r.field("seed", c.es.seed);
    r.field("checkpoint_interval", c.es.checkpoint_interval);
    r.object("command", [&](Reader& g) { read_command(g, c.es.command); });
  });
  root.finish();
  c.validate();
  return c;
}

// Parses text; syntax errors are reported with line and column.
inline RunConfig parse_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::kConfig, "line " + std::to_string(line) + ", column " +
                                        std::to_string(col) + ": " + e.what());
  }
  return config_from_json(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kConfig, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline std::string dump_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

}  // namespace gaitforge
