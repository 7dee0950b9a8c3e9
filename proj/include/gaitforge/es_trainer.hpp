#pragma once

// Evolution strategies with mirrored sampling and centered-rank shaping.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <iostream>
#include <mutex>
#include <numeric>
#include <random>
#include <span>
#include <thread>
#include <vector>

#include "gaitforge/biped_env.hpp"
#include "gaitforge/errors.hpp"

namespace gaitforge {

struct ESConfig {
  int pairs = 32;
  double sigma = 0.05;
  double learning_rate = 0.02;
  int iterations = 200;
  int episodes_per_candidate = 4;
  std::uint64_t seed = 0;
  int checkpoint_interval = 10;
  // Box the per-episode desired velocity is sampled from during training.
  CommandBox command;

  void validate() const {
    if (pairs < 1) throw Error(ErrorKind::kConfig, "es.pairs must be at least 1");
    if (!(sigma > 0.0)) throw Error(ErrorKind::kConfig, "es.sigma must be positive");
    if (!(learning_rate > 0.0)) {
      throw Error(ErrorKind::kConfig, "es.learning_rate must be positive");
    }
    if (iterations < 0) throw Error(ErrorKind::kConfig, "es.iterations must be nonnegative");
    if (episodes_per_candidate < 1) {
      throw Error(ErrorKind::kConfig, "es.episodes_per_candidate must be at least 1");
    }
    if (checkpoint_interval < 1) {
      throw Error(ErrorKind::kConfig, "es.checkpoint_interval must be at least 1");
    }
    if (!(command.vx_min <= command.vx_max) || !(command.vy_min <= command.vy_max)) {
      throw Error(ErrorKind::kConfig, "es.command is empty");
    }
  }
};

// Stream keyed by a tuple of integers; independent of call order.
inline std::mt19937_64 keyed_rng(std::initializer_list<std::uint64_t> key) {
  std::vector<std::uint32_t> words;
  for (auto k : key) {
    words.push_back(static_cast<std::uint32_t>(k));
    words.push_back(static_cast<std::uint32_t>(k >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

inline std::uint64_t keyed_seed(std::initializer_list<std::uint64_t> key) {
  return keyed_rng(key)();
}

inline std::vector<double> noise_vector(std::uint64_t run_seed, int iteration, int pair,
                                        std::size_t dim) {
  auto rng = keyed_rng({run_seed, 0x6e6f697365ULL, static_cast<std::uint64_t>(iteration),
                        static_cast<std::uint64_t>(pair)});
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> eps(dim);
  for (auto& e : eps) e = n(rng);
  return eps;
}

// Ranks mapped linearly onto [-0.5, 0.5]; ties share their mean rank.
// Non-finite entries get weight 0 and are excluded from the ranking.
inline std::vector<double> centered_ranks(std::span<const double> f) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < f.size(); ++i)
    if (std::isfinite(f[i])) idx.push_back(i);
  std::vector<double> out(f.size(), 0.0);
  const std::size_t m = idx.size();
  if (m < 2) return out;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j + 1 < m && f[idx[j + 1]] == f[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j);
    for (std::size_t k = i; k <= j; ++k) {
      out[idx[k]] = rank / static_cast<double>(m - 1) - 0.5;
    }
    i = j + 1;
  }
  return out;
}

// fitnesses[2p] belongs to params + sigma*noise[p], fitnesses[2p+1] to
// params - sigma*noise[p].
inline std::vector<double> es_update(std::span<const double> params,
                                     std::span<const double> fitnesses,
                                     const std::vector<std::vector<double>>& noises, double sigma,
                                     double learning_rate) {
  const std::size_t n = noises.size();
  if (fitnesses.size() != 2 * n) {
    throw Error(ErrorKind::kDimension, "need two fitness values per noise vector");
  }
  const auto w = centered_ranks(fitnesses);
  std::size_t finite = 0;
  for (double f : fitnesses) finite += std::isfinite(f) ? 1 : 0;
  if (finite != fitnesses.size()) {
    std::cerr << "warning: dropped " << fitnesses.size() - finite
              << " candidate(s) with non-finite fitness\n";
  }
  std::vector<double> out(params.begin(), params.end());
  if (finite < 2) return out;
  const double step = learning_rate / (static_cast<double>(finite) * sigma);
  for (std::size_t p = 0; p < n; ++p) {
    const double wp = w[2 * p] - w[2 * p + 1];
    if (wp == 0.0) continue;
    if (noises[p].size() != out.size()) {
      throw Error(ErrorKind::kDimension, "noise vector length differs from parameters");
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += step * wp * noises[p][i];
  }
  return out;
}

inline int default_worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* cap = std::getenv("GAITFORGE_THREADS")) {
    const int c = std::atoi(cap);
    if (c >= 1) n = std::min(n, c);
  }
  return n;
}

// Runs fn(0..count-1) on up to `workers` threads. Results must be written by
// index; scheduling order never influences them.
inline void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct CandidateResult {
  double fitness = 0.0;
  double mean_ticks = 0.0;
};

// Evaluates one perturbed parameter vector. Both members of a mirrored pair
// receive the same evaluation seed.
using FitnessFn = std::function<CandidateResult(std::span<const double>, std::uint64_t)>;

struct IterationStats {
  int iteration = 0;
  double mean_return = 0.0;
  double max_return = 0.0;
  double mean_episode_ticks = 0.0;
  double wall_seconds = 0.0;
};

class EsTrainer {
 public:
  EsTrainer(ESConfig cfg, std::vector<double> initial, FitnessFn fitness, int workers = 1)
      : cfg_(cfg), params_(std::move(initial)), fitness_(std::move(fitness)),
        workers_(std::max(1, workers)) {
    cfg_.validate();
  }

  const ESConfig& config() const { return cfg_; }
  const std::vector<double>& params() const { return params_; }
  int iteration() const { return iteration_; }
  double best_return() const { return best_return_; }
  const IterationStats& last_stats() const { return last_; }

  void restore(std::vector<double> params, int iteration, double best_return) {
    params_ = std::move(params);
    iteration_ = iteration;
    best_return_ = best_return;
  }

  IterationStats step() {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = cfg_.pairs;
    std::vector<std::vector<double>> noises(n);
    std::vector<CandidateResult> results(2 * n);
    parallel_for(2 * n, workers_, [&](int c) {
      const int pair = c / 2;
      const double sign = (c % 2 == 0) ? 1.0 : -1.0;
      const auto eps = noise_vector(cfg_.seed, iteration_, pair, params_.size());
      std::vector<double> cand(params_.size());
      for (std::size_t i = 0; i < cand.size(); ++i) {
        cand[i] = params_[i] + sign * cfg_.sigma * eps[i];
      }
      const std::uint64_t eval_seed =
          keyed_seed({cfg_.seed, 0x6576616cULL, static_cast<std::uint64_t>(iteration_),
                      static_cast<std::uint64_t>(pair)});
      results[c] = fitness_(cand, eval_seed);
      if (sign > 0.0) noises[pair] = eps;
    });

    std::vector<double> f(2 * n);
    IterationStats st;
    st.iteration = iteration_;
    st.max_return = -std::numeric_limits<double>::infinity();
    int finite = 0;
    for (int c = 0; c < 2 * n; ++c) {
      f[c] = results[c].fitness;
      st.mean_episode_ticks += results[c].mean_ticks / (2.0 * n);
      if (std::isfinite(f[c])) {
        st.mean_return += f[c];
        st.max_return = std::max(st.max_return, f[c]);
        ++finite;
      }
    }
    st.mean_return = finite > 0 ? st.mean_return / finite : 0.0;
    best_return_ = std::max(best_return_, st.max_return);
    params_ = es_update(params_, f, noises, cfg_.sigma, cfg_.learning_rate);
    ++iteration_;
    st.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    last_ = st;
    return st;
  }

 private:
  ESConfig cfg_;
  std::vector<double> params_;
  FitnessFn fitness_;
  int workers_;
  int iteration_ = 0;
  double best_return_ = -std::numeric_limits<double>::infinity();
  IterationStats last_;
};

}  // namespace gaitforge
