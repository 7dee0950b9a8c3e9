#pragma once

// Command-line front end. run() is callable in-process so tests can drive
// every subcommand without spawning the binary.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaitforge/bridge_plant.hpp"
#include "gaitforge/checkpoint.hpp"
#include "gaitforge/config.hpp"
#include "gaitforge/trace.hpp"
#include "gaitforge/training.hpp"

namespace gaitforge::cli {

enum Exit : int { kOk = 0, kFailure = 1, kConfigExit = 2, kIoExit = 3, kCheckpointExit = 4, kTraceExit = 5 };

inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::kConfig:
    case ErrorKind::kCommand:
    case ErrorKind::kParameter:
      return kConfigExit;
    case ErrorKind::kIo:
    case ErrorKind::kProtocol:
      return kIoExit;
    case ErrorKind::kCheckpoint: return kCheckpointExit;
    case ErrorKind::kTrace: return kTraceExit;
    default: return kFailure;
  }
}

// "start:duration:fx[:fy]"
inline PushEvent parse_push(const std::string& spec) {
  std::vector<double> v;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ':')) {
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != part.size() || !std::isfinite(x)) {
      throw Error(ErrorKind::kConfig, "bad push spec '" + spec + "'");
    }
    v.push_back(x);
  }
  if (v.size() != 3 && v.size() != 4) {
    throw Error(ErrorKind::kConfig, "push spec is start:duration:fx[:fy], got '" + spec + "'");
  }
  PushEvent e{v[0], v[1], v[2], v.size() == 4 ? v[3] : 0.0};
  if (!(e.duration > 0.0) || e.start < 0.0) throw Error(ErrorKind::kConfig, "push needs start >= 0 and duration > 0");
  return e;
}

struct TrainArgs {
  std::string config, out;
  std::optional<std::uint64_t> seed;
  int workers = 0;
};

struct EvalArgs {
  std::string checkpoint, config, trace, env = "surrogate", addr = "127.0.0.1:7787";
  double vx = 0.5, vy = 0.0, duration = 10.0;
  std::uint64_t seed = 0;
  std::vector<std::string> pushes;
};

struct ExportArgs {
  std::string trace, kind, out;
};

struct InspectArgs {
  std::string checkpoint, config;
};

inline RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : load_config(path);
}

inline int cmd_train(const TrainArgs& a, std::ostream& out) {
  RunConfig cfg = config_or_default(a.config);
  if (a.seed) cfg.es.seed = *a.seed;
  TrainOptions opt;
  opt.out_dir = a.out;
  opt.workers = a.workers > 0 ? a.workers : default_worker_count();
  opt.on_iteration = [&](const IterationStats& s) {
    out << "iter " << s.iteration << " mean " << format_double(s.mean_return) << " max "
        << format_double(s.max_return) << " ticks " << format_double(s.mean_episode_ticks) << '\n';
  };
  const Checkpoint c = train_policy(cfg, opt);
  out << "wrote " << (opt.out_dir / "final.json").string() << " after " << c.iteration
      << " iterations\n";
  return kOk;
}

inline void check_arch(const Architecture& arch) {
  if (arch.input != kObservationSize || arch.output != kActionSize) {
    throw Error(ErrorKind::kCheckpoint, "checkpoint architecture does not match 12 inputs / 45 outputs");
  }
}

inline int cmd_eval(const EvalArgs& a, std::ostream& out) {
  RunConfig cfg = config_or_default(a.config);
  const Checkpoint ck = load_checkpoint(a.checkpoint);
  check_arch(ck.arch);
  if (!(a.duration >= 0.0) || !std::isfinite(a.duration)) throw Error(ErrorKind::kConfig, "duration must be >= 0");
  std::vector<PushEvent> pushes;
  for (const auto& p : a.pushes) pushes.push_back(parse_push(p));
  const int ticks = static_cast<int>(std::llround(a.duration / cfg.env.control_dt));
  cfg.env.max_ticks = ticks;

  std::unique_ptr<Plant> plant;
  if (a.env == "surrogate") {
    plant = std::make_unique<SurrogateBiped>(cfg.surrogate);
  } else if (a.env == "bridge") {
    plant = std::make_unique<BridgePlant>(std::make_unique<TcpTransport>(wire::parse_address(a.addr)));
  } else {
    throw Error(ErrorKind::kConfig, "--env must be surrogate or bridge");
  }
  BipedEnv env(cfg.env, cfg.make_decoder(), std::move(plant));

  std::ofstream trace_file;
  if (!a.trace.empty()) {
    trace_file.open(a.trace, std::ios::binary | std::ios::trunc);
    if (!trace_file) throw Error(ErrorKind::kIo, "cannot write " + a.trace);
  }
  std::vector<TraceRecord> records;
  NetworkPolicy net(ck.params, ck.arch, cfg.normalization);
  const ActionFn policy = [&](const Observation& o) { return net(o); };
  if (ticks > 0) {
    run_episode(env, policy, a.seed, a.vx, a.vy, pushes, [&](const StepResult& r, const RawAction& act) {
      records.push_back(make_record(env, r, act));
      if (trace_file.is_open()) write_record(trace_file, records.back());
    });
  } else if (!cfg.env.command.contains(a.vx, a.vy)) {
    throw Error(ErrorKind::kCommand, "desired velocity outside the command box");
  }
  if (trace_file.is_open()) {
    trace_file.flush();
    if (!trace_file) throw Error(ErrorKind::kIo, "write failed for " + a.trace);
  }
  out << to_json(summarize(records)).dump() << '\n';
  return kOk;
}

inline int cmd_export(const ExportArgs& a, std::ostream& out) {
  const ExportKind kind = parse_export_kind(a.kind);
  std::ifstream in(a.trace, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + a.trace);
  const auto records = read_trace(in);
  if (a.out.empty()) {
    export_trace(out, records, kind);
    return kOk;
  }
  std::ofstream f(a.out, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::kIo, "cannot write " + a.out);
  export_trace(f, records, kind);
  f.flush();
  if (!f) throw Error(ErrorKind::kIo, "write failed for " + a.out);
  return kOk;
}

inline int cmd_inspect(const InspectArgs& a, std::ostream& out) {
  const RunConfig cfg = config_or_default(a.config);
  Architecture arch;
  if (!a.checkpoint.empty()) {
    const Checkpoint ck = load_checkpoint(a.checkpoint);
    arch = ck.arch;
    out << "checkpoint: version " << ck.version << ", iteration " << ck.iteration << ", seed "
        << ck.seed << ", best return " << format_double(ck.best_return) << '\n';
  }
  out << "architecture:";
  for (int w : arch.widths()) out << ' ' << w;
  out << "\nparameters: " << arch.param_count() << '\n';
  out << "action: " << kCoeffChannels << " coefficients, " << kKdChannels << " K_d, "
      << kKfpChannels << " K_fp, " << kKtChannels << " K_t\n";
  const auto b = cfg.decoder.bounds();
  for (int ch = 0; ch < kActionSize; ++ch) {
    std::string name;
    if (ch < kCoeffChannels) {
      name = std::string(kDecoderJointNames[ch / kFreeCoeffsPerJoint]) + "[" +
             std::to_string(ch % kFreeCoeffsPerJoint + 1) + "]";
    } else if (ch < kKfpOffset) {
      name = std::string("kd.") + config_detail::kJointTypeNames[ch - kKdOffset];
    } else if (ch < kKtOffset) {
      name = std::string("kfp.") + config_detail::kKfpNames[ch - kKfpOffset];
    } else {
      name = std::string("kt.") + config_detail::kKtNames[ch - kKtOffset];
    }
    out << "  " << ch << ' ' << name << " [" << format_double(b.channels[ch].min) << ", "
        << format_double(b.channels[ch].max) << "]\n";
  }
  return kOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"gaitforge: gait policy training and evaluation on a surrogate biped"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "run evolution strategies");
  train->add_option("--config", ta.config, "run configuration (JSON)");
  train->add_option("--out", ta.out, "output directory")->required();
  train->add_option("--seed", ta.seed, "override es.seed");
  train->add_option("--workers", ta.workers, "evaluation threads (default: all, capped by GAITFORGE_THREADS)");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "roll out a checkpoint");
  eval->add_option("--checkpoint", ea.checkpoint, "checkpoint file")->required();
  eval->add_option("--config", ea.config, "run configuration (JSON)");
  eval->add_option("--vx", ea.vx, "desired forward speed, m/s");
  eval->add_option("--vy", ea.vy, "desired lateral speed, m/s");
  eval->add_option("--duration", ea.duration, "seconds");
  eval->add_option("--push", ea.pushes, "start:duration:fx[:fy], repeatable");
  eval->add_option("--trace", ea.trace, "JSONL trace output");
  eval->add_option("--seed", ea.seed, "reset seed");
  eval->add_option("--env", ea.env, "surrogate or bridge");
  eval->add_option("--addr", ea.addr, "bridge address host:port");

  ExportArgs xa;
  auto* exp = app.add_subcommand("export", "trace to plot-ready CSV");
  exp->add_option("--trace", xa.trace, "JSONL trace")->required();
  exp->add_option("--kind", xa.kind, "limit-cycle, speed-track or reward-components")->required();
  exp->add_option("--out", xa.out, "CSV output (default stdout)");

  InspectArgs ia;
  auto* insp = app.add_subcommand("inspect", "print architecture, parameter count and bounds");
  insp->add_option("--checkpoint", ia.checkpoint, "checkpoint file");
  insp->add_option("--config", ia.config, "run configuration (JSON)");

  auto* cdef = app.add_subcommand("config-default", "print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kConfigExit;
  }

  try {
    if (*train) return cmd_train(ta, out);
    if (*eval) return cmd_eval(ea, out);
    if (*exp) return cmd_export(xa, out);
    if (*insp) return cmd_inspect(ia, out);
    if (*cdef) {
      out << dump_config(RunConfig{});
      return kOk;
    }
  } catch (const Error& e) {
    err << "gaitforge: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "gaitforge: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("gaitforge");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace gaitforge::cli
