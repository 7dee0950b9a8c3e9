#pragma once

// Glue between the run configuration, the environment and the ES trainer.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <atomic>
#include <iomanip>
#include <mutex>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gaitforge/checkpoint.hpp"
#include "gaitforge/config.hpp"
#include "gaitforge/rollout.hpp"
#include "gaitforge/surrogate.hpp"

namespace gaitforge {

inline BipedEnv make_surrogate_env(const RunConfig& cfg) {
  return BipedEnv(cfg.env, cfg.make_decoder(), std::make_unique<SurrogateBiped>(cfg.surrogate));
}

struct Command {
  double vx = 0.0;
  double vy = 0.0;
};

// Desired velocity for one episode, uniform over the box.
inline Command sample_command(std::uint64_t episode_seed, const CommandBox& box) {
  auto rng = keyed_rng({episode_seed, 0x636d64ULL});
  const double ux = std::generate_canonical<double, 53>(rng);
  const double uy = std::generate_canonical<double, 53>(rng);
  return {box.vx_min + (box.vx_max - box.vx_min) * ux, box.vy_min + (box.vy_max - box.vy_min) * uy};
}

inline std::uint64_t episode_seed(std::uint64_t eval_seed, int episode) {
  return keyed_seed({eval_seed, 0x657069ULL, static_cast<std::uint64_t>(episode)});
}

// Mean undiscounted return over es.episodes_per_candidate episodes.
inline CandidateResult evaluate_policy(BipedEnv& env, const RunConfig& cfg,
                                       std::span<const double> params, std::uint64_t eval_seed) {
  const Architecture arch;
  if (params.size() != arch.param_count()) {
    throw Error(ErrorKind::kParameter, "parameter vector length does not match the architecture");
  }
  NetworkPolicy net(params, arch, cfg.normalization);
  const ActionFn policy = [&](const Observation& o) { return net(o); };
  CandidateResult r;
  const int episodes = cfg.es.episodes_per_candidate;
  for (int e = 0; e < episodes; ++e) {
    const std::uint64_t s = episode_seed(eval_seed, e);
    const Command c = sample_command(s, cfg.es.command);
    const EpisodeOutcome out = run_episode(env, policy, s, c.vx, c.vy);
    r.fitness += out.episode_return / episodes;
    r.mean_ticks += static_cast<double>(out.ticks) / episodes;
  }
  return r;
}

inline CandidateResult evaluate_policy(const RunConfig& cfg, std::span<const double> params,
                                       std::uint64_t eval_seed) {
  BipedEnv env = make_surrogate_env(cfg);
  return evaluate_policy(env, cfg, params, eval_seed);
}

struct TrainOptions {
  std::filesystem::path out_dir;
  int workers = 1;
  // Called after every iteration; may be empty.
  std::function<void(const IterationStats&)> on_iteration;
};

inline std::string checkpoint_name(int iteration) {
  std::ostringstream os;
  os << "checkpoint-" << std::setw(6) << std::setfill('0') << iteration << ".json";
  return os.str();
}

inline Checkpoint make_checkpoint(const EsTrainer& trainer, const Architecture& arch) {
  Checkpoint c;
  c.arch = arch;
  c.params = trainer.params();
  c.iteration = trainer.iteration();
  c.seed = trainer.config().seed;
  c.stats = trainer.last_stats();
  c.best_return = trainer.best_return();
  return c;
}

// Runs cfg.es.iterations updates. Writes checkpoint-NNNNNN.json every
// checkpoint_interval iterations, final.json at the end, and train_log.csv.
inline Checkpoint train_policy(const RunConfig& cfg, const TrainOptions& opt) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + opt.out_dir.string() + ": " + ec.message());

  const Architecture arch;
  const int workers = std::max(1, opt.workers);
  // One environment per worker slot, reused across candidates.
  std::vector<std::unique_ptr<BipedEnv>> envs;
  std::vector<std::unique_ptr<std::mutex>> locks;
  for (int w = 0; w < workers; ++w) {
    envs.push_back(std::make_unique<BipedEnv>(make_surrogate_env(cfg)));
    locks.push_back(std::make_unique<std::mutex>());
  }
  std::atomic<int> next_env{0};
  FitnessFn fitness = [&](std::span<const double> p, std::uint64_t seed) {
    // Environment state is fully reset per episode, so which instance runs a
    // candidate never affects its result.
    const int idx = next_env++ % workers;
    std::lock_guard lock(*locks[idx]);
    return evaluate_policy(*envs[idx], cfg, p, seed);
  };

  EsTrainer trainer(cfg.es, init_params(cfg.es.seed, arch).flat, fitness, workers);

  const fs::path log_path = opt.out_dir / "train_log.csv";
  std::ofstream log(log_path);
  if (!log) throw Error(ErrorKind::kIo, "cannot write " + log_path.string());
  log << "iteration,mean_return,max_return,mean_episode_ticks,wall_seconds\n";

  for (int it = 0; it < cfg.es.iterations; ++it) {
    const IterationStats st = trainer.step();
    log << st.iteration << ',' << format_double(st.mean_return) << ','
        << format_double(st.max_return) << ',' << format_double(st.mean_episode_ticks) << ','
        << format_double(st.wall_seconds) << '\n';
    log.flush();
    if (!log) throw Error(ErrorKind::kIo, "write failed for " + log_path.string());
    if (opt.on_iteration) opt.on_iteration(st);
    if (trainer.iteration() % cfg.es.checkpoint_interval == 0) {
      save_checkpoint(make_checkpoint(trainer, arch), (opt.out_dir / checkpoint_name(trainer.iteration())).string());
    }
  }
  const Checkpoint final_ckpt = make_checkpoint(trainer, arch);
  save_checkpoint(final_ckpt, (opt.out_dir / "final.json").string());
  return final_ckpt;
}

}  // namespace gaitforge
