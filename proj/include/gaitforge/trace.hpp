#pragma once

// Per-tick episode traces (JSONL) and the CSV exporters built on them.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gaitforge/biped_env.hpp"

namespace gaitforge {

// FNV-1a over the little-endian bit patterns of the 45 raw outputs.
inline std::uint64_t action_digest(const RawAction& a) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : a) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xFFu;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[i] = kDigits[v & 0xFu];
  return s;
}

struct TraceAux {
  double pz = 0.0;
  double com_x = 0.0, com_y = 0.0;
  double com_distance = 0.0;
  double feet_distance = 0.0;
  JointVector u_norm{};
};

struct TraceRecord {
  double t = 0.0;
  double tau = 0.0;
  Stance stance = Stance::kRight;
  int step = 0;
  std::array<double, kObservationSize> obs{};
  std::uint64_t action_digest = 0;
  std::array<double, kNumRewards> rewards{};
  double total = 0.0;
  bool terminated = false;
  TraceAux aux;
  JointVector q{};
  JointVector qd{};
  double push_fx = 0.0, push_fy = 0.0;

  double vx_desired() const { return obs[0]; }
  double vy_desired() const { return obs[1]; }
  double vx_avg() const { return obs[2]; }
  double vy_avg() const { return obs[3]; }
};

// Call right after env.step() so the plant state matches the result.
inline TraceRecord make_record(const BipedEnv& env, const StepResult& r, const RawAction& a) {
  const auto& s = env.plant_state();
  TraceRecord rec;
  rec.t = r.time;
  rec.tau = r.tau;
  rec.stance = r.stance;
  rec.step = r.step_index;
  rec.obs = r.observation.to_array();
  rec.action_digest = action_digest(a);
  rec.rewards = r.reward.components;
  rec.total = r.reward.total;
  rec.terminated = r.terminated;
  rec.aux = {r.aux.pz, r.aux.com_xy.x, r.aux.com_xy.y, r.aux.com_distance, r.aux.feet_distance,
             r.aux.u_norm};
  rec.q = s.q;
  rec.qd = s.qd;
  rec.push_fx = s.push_force[0];
  rec.push_fy = s.push_force[1];
  return rec;
}

inline nlohmann::json to_json(const TraceRecord& r) {
  return {{"t", r.t},
          {"tau", r.tau},
          {"stance", to_string(r.stance)},
          {"step", r.step},
          {"obs", r.obs},
          {"action", hex64(r.action_digest)},
          {"rewards", r.rewards},
          {"total", r.total},
          {"terminated", r.terminated},
          {"aux",
           {{"pz", r.aux.pz},
            {"com", {r.aux.com_x, r.aux.com_y}},
            {"com_distance", r.aux.com_distance},
            {"feet_distance", r.aux.feet_distance},
            {"u_norm", r.aux.u_norm}}},
          {"q", r.q},
          {"qd", r.qd},
          {"push", {r.push_fx, r.push_fy}}};
}

namespace trace_detail {

inline const nlohmann::json& get(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorKind::kTrace, std::string("missing field ") + key);
  return *it;
}

inline double num(const nlohmann::json& j, const char* key) {
  const auto& v = get(j, key);
  if (!v.is_number()) throw Error(ErrorKind::kTrace, std::string(key) + " must be a number");
  return v.get<double>();
}

template <std::size_t N>
std::array<double, N> nums(const nlohmann::json& j, const char* key) {
  const auto& v = get(j, key);
  if (!v.is_array() || v.size() != N) {
    throw Error(ErrorKind::kTrace, std::string(key) + " must hold " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number()) throw Error(ErrorKind::kTrace, std::string(key) + " must hold numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

}  // namespace trace_detail

inline TraceRecord record_from_json(const nlohmann::json& j) {
  using namespace trace_detail;
  if (!j.is_object()) throw Error(ErrorKind::kTrace, "record must be an object");
  TraceRecord r;
  r.t = num(j, "t");
  r.tau = num(j, "tau");
  const auto& st = get(j, "stance");
  if (st == "right") {
    r.stance = Stance::kRight;
  } else if (st == "left") {
    r.stance = Stance::kLeft;
  } else {
    throw Error(ErrorKind::kTrace, "stance must be \"right\" or \"left\"");
  }
  const auto& step = get(j, "step");
  if (!step.is_number_integer()) throw Error(ErrorKind::kTrace, "step must be an integer");
  r.step = step.get<int>();
  r.obs = nums<kObservationSize>(j, "obs");
  const auto& action = get(j, "action");
  if (!action.is_string() || action.get_ref<const std::string&>().size() != 16) {
    throw Error(ErrorKind::kTrace, "action must be a 16-digit hex digest");
  }
  const auto& hex = action.get_ref<const std::string&>();
  const auto [end, ec] = std::from_chars(hex.data(), hex.data() + hex.size(), r.action_digest, 16);
  if (ec != std::errc() || end != hex.data() + hex.size()) {
    throw Error(ErrorKind::kTrace, "action must be a 16-digit hex digest");
  }
  r.rewards = nums<kNumRewards>(j, "rewards");
  r.total = num(j, "total");
  const auto& term = get(j, "terminated");
  if (!term.is_boolean()) throw Error(ErrorKind::kTrace, "terminated must be a boolean");
  r.terminated = term.get<bool>();
  const auto& aux = get(j, "aux");
  if (!aux.is_object()) throw Error(ErrorKind::kTrace, "aux must be an object");
  r.aux.pz = num(aux, "pz");
  const auto com = nums<2>(aux, "com");
  r.aux.com_x = com[0];
  r.aux.com_y = com[1];
  r.aux.com_distance = num(aux, "com_distance");
  r.aux.feet_distance = num(aux, "feet_distance");
  r.aux.u_norm = nums<kNumJoints>(aux, "u_norm");
  r.q = nums<kNumJoints>(j, "q");
  r.qd = nums<kNumJoints>(j, "qd");
  const auto push = nums<2>(j, "push");
  r.push_fx = push[0];
  r.push_fy = push[1];
  return r;
}

inline void write_record(std::ostream& os, const TraceRecord& r) { os << to_json(r).dump() << '\n'; }

// Blank lines are skipped; anything else malformed raises a trace error
// naming the line.
inline std::vector<TraceRecord> read_trace(std::istream& is) {
  std::vector<TraceRecord> out;
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back(record_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kTrace, "line " + std::to_string(n) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::kTrace, "line " + std::to_string(n) + ": " + e.what());
    }
  }
  if (is.bad()) throw Error(ErrorKind::kIo, "read failed");
  return out;
}

// ---- CSV export ---------------------------------------------------------

inline std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

enum class ExportKind { kLimitCycle, kSpeedTrack, kRewardComponents };

inline ExportKind parse_export_kind(std::string_view s) {
  if (s == "limit-cycle") return ExportKind::kLimitCycle;
  if (s == "speed-track") return ExportKind::kSpeedTrack;
  if (s == "reward-components") return ExportKind::kRewardComponents;
  throw Error(ErrorKind::kConfig, "unknown export kind: " + std::string(s));
}

inline const std::vector<int>& default_cycle_joints() {
  static const std::vector<int> j = {kRightHipPitch, kRightKnee, kLeftHipPitch, kLeftKnee};
  return j;
}

inline void export_limit_cycle(std::ostream& os, const std::vector<TraceRecord>& trace,
                               const std::vector<int>& joints = default_cycle_joints()) {
  os << "t";
  for (int j : joints) {
    if (j < 0 || j >= kNumJoints) throw Error(ErrorKind::kParameter, "joint index out of range");
    os << ',' << kJointNames[j] << "_q," << kJointNames[j] << "_qd";
  }
  os << '\n';
  for (const auto& r : trace) {
    os << fmt(r.t);
    for (int j : joints) os << ',' << fmt(r.q[j]) << ',' << fmt(r.qd[j]);
    os << '\n';
  }
}

inline void export_speed_track(std::ostream& os, const std::vector<TraceRecord>& trace) {
  os << "t,vx_avg,vx_desired,vy_avg,vy_desired\n";
  for (const auto& r : trace) {
    os << fmt(r.t) << ',' << fmt(r.vx_avg()) << ',' << fmt(r.vx_desired()) << ','
       << fmt(r.vy_avg()) << ',' << fmt(r.vy_desired()) << '\n';
  }
}

inline void export_reward_components(std::ostream& os, const std::vector<TraceRecord>& trace) {
  os << "t";
  for (const char* n : kRewardNames) os << ',' << n;
  os << ",total\n";
  for (const auto& r : trace) {
    os << fmt(r.t);
    for (double c : r.rewards) os << ',' << fmt(c);
    os << ',' << fmt(r.total) << '\n';
  }
}

inline void export_trace(std::ostream& os, const std::vector<TraceRecord>& trace, ExportKind kind) {
  switch (kind) {
    case ExportKind::kLimitCycle: export_limit_cycle(os, trace); break;
    case ExportKind::kSpeedTrack: export_speed_track(os, trace); break;
    case ExportKind::kRewardComponents: export_reward_components(os, trace); break;
  }
}

// ---- evaluation summary -------------------------------------------------

struct EvalSummary {
  int ticks = 0;
  bool fell = false;
  double mean_speed_error_x = 0.0;  // mean |v̄x - vxd|
  double mean_speed_error_y = 0.0;
  double steady_vx = 0.0;  // mean v̄x over the second half of the trace
  double episode_return = 0.0;
};

inline EvalSummary summarize(const std::vector<TraceRecord>& trace) {
  EvalSummary s;
  s.ticks = static_cast<int>(trace.size());
  if (trace.empty()) return s;
  for (const auto& r : trace) {
    s.mean_speed_error_x += std::abs(r.obs[4]);
    s.mean_speed_error_y += std::abs(r.obs[5]);
    s.episode_return += r.total;
    s.fell = s.fell || r.terminated;
  }
  s.mean_speed_error_x /= s.ticks;
  s.mean_speed_error_y /= s.ticks;
  const std::size_t from = trace.size() / 2;
  for (std::size_t i = from; i < trace.size(); ++i) s.steady_vx += trace[i].vx_avg();
  s.steady_vx /= static_cast<double>(trace.size() - from);
  return s;
}

inline nlohmann::json to_json(const EvalSummary& s) {
  return {{"ticks", s.ticks},
          {"fell", s.fell ? "yes" : "no"},
          {"mean_speed_error_x", s.mean_speed_error_x},
          {"mean_speed_error_y", s.mean_speed_error_y},
          {"steady_vx", s.steady_vx},
          {"return", s.episode_return}};
}

}  // namespace gaitforge
