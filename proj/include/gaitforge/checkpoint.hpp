#pragma once

// Versioned JSON checkpoints. Parameters are stored as shortest round-trip
// decimal strings so save -> load -> save is byte-identical.

#include <charconv>
#include <cstdio>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "gaitforge/errors.hpp"
#include "gaitforge/es_trainer.hpp"
#include "gaitforge/policy_net.hpp"

namespace gaitforge {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  int version = kCheckpointVersion;
  Architecture arch;
  std::vector<double> params;
  int iteration = 0;
  std::uint64_t seed = 0;
  IterationStats stats;
  double best_return = 0.0;
};

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorKind::kCheckpoint, "malformed number '" + s + "'");
  }
  return v;
}

inline nlohmann::json arch_to_json(const Architecture& a) {
  return {{"input", a.input}, {"hidden", a.hidden}, {"output", a.output}};
}

inline std::string to_json_string(const Checkpoint& c) {
  nlohmann::json j;
  j["version"] = c.version;
  j["arch"] = arch_to_json(c.arch);
  auto& params = j["params"] = nlohmann::json::array();
  for (double p : c.params) params.push_back(format_double(p));
  j["iteration"] = c.iteration;
  j["seed"] = std::to_string(c.seed);
  // Wall-clock time is deliberately absent so checkpoints are reproducible.
  j["stats"] = {{"mean_return", format_double(c.stats.mean_return)},
                {"max_return", format_double(c.stats.max_return)},
                {"mean_episode_ticks", format_double(c.stats.mean_episode_ticks)},
                {"best_return", format_double(c.best_return)}};
  return j.dump(1) + "\n";
}

inline Checkpoint parse_checkpoint(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kCheckpoint, std::string("unparseable checkpoint: ") + e.what());
  }
  try {
    Checkpoint c;
    c.version = j.at("version").get<int>();
    if (c.version != kCheckpointVersion) {
      throw Error(ErrorKind::kCheckpoint, "unsupported checkpoint version " +
                                              std::to_string(c.version));
    }
    const auto& a = j.at("arch");
    c.arch.input = a.at("input").get<int>();
    c.arch.hidden = a.at("hidden").get<std::vector<int>>();
    c.arch.output = a.at("output").get<int>();
    for (const auto& p : j.at("params")) c.params.push_back(parse_double(p.get<std::string>()));
    if (c.params.size() != c.arch.param_count()) {
      throw Error(ErrorKind::kCheckpoint, "parameter count does not match the architecture");
    }
    c.iteration = j.at("iteration").get<int>();
    c.seed = std::stoull(j.at("seed").get<std::string>());
    const auto& s = j.at("stats");
    c.stats.iteration = c.iteration;
    c.stats.mean_return = parse_double(s.at("mean_return").get<std::string>());
    c.stats.max_return = parse_double(s.at("max_return").get<std::string>());
    c.stats.mean_episode_ticks = parse_double(s.at("mean_episode_ticks").get<std::string>());
    c.best_return = parse_double(s.at("best_return").get<std::string>());
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kCheckpoint, std::string("malformed checkpoint: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw Error(ErrorKind::kCheckpoint, "malformed checkpoint seed");
  } catch (const std::out_of_range&) {
    throw Error(ErrorKind::kCheckpoint, "checkpoint seed out of range");
  }
}

inline void save_checkpoint(const Checkpoint& c, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp);
    out << to_json_string(c);
    if (!out) throw Error(ErrorKind::kIo, "write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw Error(ErrorKind::kIo, "cannot move checkpoint into place at " + path);
  }
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kCheckpoint, "cannot read checkpoint " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace gaitforge
