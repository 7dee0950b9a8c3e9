// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "gaitforge/gaitforge.hpp"

using namespace gaitforge;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!ok) ++failures;
}

// Runs body; an exception counts as a failure of that criterion.
void criterion(const std::string& name, const std::function<bool(std::ostringstream&)>& body) {
  std::ostringstream detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail << "exception: " << e.what();
  }
  report(name, ok, detail.str());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct ScratchDir {
  std::filesystem::path path;
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() /
           ("gaitforge-accept-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

namespace oracle {

using Big = boost::multiprecision::cpp_bin_float_50;

double clamp(const Big& x) {
  if (x > 1) return 1.0;
  if (x < -1) return -1.0;
  return static_cast<double>(x);
}

double velocity(double avg, double desired) {
  const Big e = Big(avg) - Big(desired);
  if (abs(e) <= Big(0.1)) return clamp(Big("1e-3") / ((e + Big("1e-5")) * (e + Big("1e-5"))));
  return clamp(-Big("1e-3") / (e * e));
}

double height(double pz, double pzd) {
  const Big z(pz), zd(pzd);
  if (abs(z - zd) <= Big(0.05)) {
    const Big r = z <= zd ? z / zd : zd / z;
    return clamp(r * r);
  }
  return clamp(-(z - zd) * (z - zd));
}

double energy(const JointVector& u) {
  Big s = 0;
  for (double v : u) s += Big(v) * Big(v);
  return clamp(-s);
}

bool inside(const Vec2& p, const std::vector<Vec2>& poly) {
  int left = 0, right = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    const Big c = (Big(b.x) - Big(a.x)) * (Big(p.y) - Big(a.y)) -
                  (Big(b.y) - Big(a.y)) * (Big(p.x) - Big(a.x));
    if (c > 0) ++left;
    if (c < 0) ++right;
  }
  return left == 0 || right == 0;
}

double com(const Vec2& p, const std::vector<Vec2>& poly, double d) {
  if (inside(p, poly)) return clamp(Big("0.01") / Big(d));
  return clamp(-Big(100) / (Big(d) - Big("0.1")));
}

double squares(double a, double b, double c) {
  return clamp(-(Big(a) * Big(a) + Big(b) * Big(b) + Big(c) * Big(c)));
}

double feet(double d) {
  const Big x(d);
  if (x > Big("0.4")) return clamp(-(x - Big("0.4")) * (x - Big("0.4")));
  if (x < Big("0.2")) return clamp(-(x - Big("0.2")) * (x - Big("0.2")));
  return 0.0;
}

}  // namespace oracle

std::vector<Vec2> rectangle(double cx, double cy, double len, double wid, double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  std::vector<Vec2> r;
  for (auto [a, b] : {std::pair{1, 1}, {-1, 1}, {-1, -1}, {1, -1}}) {
    const double x = 0.5 * len * a, y = 0.5 * wid * b;
    r.push_back({cx + c * x - s * y, cy + s * x + c * y});
  }
  return r;
}

CandidateResult sphere(std::span<const double> x, std::uint64_t) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return {-s, 0.0};
}

double sphere_value(const std::vector<double>& x) { return sphere(x, 0).fitness; }

}  // namespace

int main() {
  const auto t_start = std::chrono::steady_clock::now();

  criterion("parameter count", [](auto& d) {
    // 12->32, three 32->32, 32->45, each with biases.
    const std::size_t by_hand = (12 * 32 + 32) + 3 * (32 * 32 + 32) + (32 * 45 + 45);
    const Architecture arch;
    const auto n = arch.param_count();
    const auto flat = init_params(0).flat.size();
    d << "param_count " << n << ", init vector " << flat << ", expected 5069";
    return n == 5069 && flat == 5069 && by_hand == 5069;
  });

  criterion("dimensions", [](auto& d) {
    const Architecture arch;
    const auto w = arch.widths();
    d << "obs " << kObservationSize << ", action " << kActionSize << ", coefficients " << kCoeffChannels
      << ", gains " << kKdChannels << "+" << kKfpChannels << "+" << kKtChannels << ", offsets "
      << kKdOffset << "/" << kKfpOffset << "/" << kKtOffset;
    return kObservationSize == 12 && kActionSize == 45 && kCoeffChannels == 32 && kKdChannels == 5 &&
           kKfpChannels == 4 && kKtChannels == 4 && kKdOffset == 32 && kKfpOffset == 37 &&
           kKtOffset == 41 && w.front() == 12 && w.back() == 45;
  });

  criterion("bezier bound", [](auto& d) {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    int violations = 0;
    for (int i = 0; i < 1000; ++i) {
      BezierCurve c;
      for (auto& a : c.coeffs) a = u(rng);
      const auto [lo, hi] = std::minmax_element(c.coeffs.begin(), c.coeffs.end());
      for (int k = 0; k <= 100; ++k) {
        const double b = bezier_eval(c, k / 100.0);
        if (b < *lo || b > *hi) ++violations;
      }
    }
    d << "1000 curves x 101 points, " << violations << " outside [min, max] of coefficients";
    return violations == 0;
  });

  criterion("symmetry involution", [](auto& d) {
    const SymmetryMatrix t;
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    int bad = 0;
    for (int i = 0; i < 1000; ++i) {
      CoeffMatrix a{};
      for (auto& row : a)
        for (auto& v : row) v = u(rng);
      if (mirror(mirror(a, t), t) != a) ++bad;
    }
    // T * T = I as integer tables.
    bool identity = true;
    for (int i = 0; i < kNumJoints; ++i) {
      for (int j = 0; j < kNumJoints; ++j) {
        int s = 0;
        for (int k = 0; k < kNumJoints; ++k) s += t(i, k) * t(k, j);
        identity = identity && s == (i == j ? 1 : 0);
      }
    }
    d << "1000 matrices, " << bad << " not restored; T*T " << (identity ? "= I" : "!= I");
    return bad == 0 && identity;
  });

  criterion("anchoring", [](auto& d) {
    const RunConfig cfg;
    const ActionDecoder dec = cfg.make_decoder();
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> u(0.0, 1.0), q(-0.3, 0.3);
    int mismatches = 0, joints_checked = 0;
    for (int trial = 0; trial < 500; ++trial) {
      RawAction raw{};
      for (auto& r : raw) r = u(rng);
      JointVector qm{};
      for (auto& v : qm) v = q(rng);
      for (Stance st : {Stance::kRight, Stance::kLeft}) {
        const auto g = dec.decode(raw, dec.anchors(qm, st));
        int bezier = 0;
        for (int j = 0; j < kNumJoints; ++j) {
          if (g.kind(st, j) != ColumnKind::kBezier) continue;
          ++bezier;
          const auto c = g.curve(st, j);
          if (bezier_eval(c, 0.0) != qm[j] || bezier_eval(c, 1.0) != qm[j]) ++mismatches;
        }
        if (bezier != 8) ++mismatches;
        joints_checked += bezier;
      }
    }
    d << joints_checked << " joint curves over both stances, " << mismatches << " not exactly anchored";
    return mismatches == 0 && joints_checked == 500 * 2 * 8;
  });

  criterion("reward oracle and weights", [](auto& d) {
    const std::array<double, 8> expected = {0.8, 0.2, 0.1, 0.01, 0.1, 0.5, 0.5, 5};
    double worst = 0.0;
    auto track = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
    std::mt19937_64 rng(104);
    std::uniform_real_distribution<double> v(-1.5, 1.5), near(-0.12, 0.12), zd(0.8, 1.1), off(-0.15, 0.15),
        un(-0.45, 0.45), ang(-0.6, 0.6), c(-0.5, 0.5), o(-0.25, 0.25), yaw(-1, 1), fd(0.0, 1.5);
    bool contain_ok = true;
    for (int i = 0; i < 100; ++i) {
      const double vd = v(rng), va = vd + (i % 2 ? near(rng) : v(rng));
      track(reward_velocity(va, vd), oracle::velocity(va, vd));
      const double hd = zd(rng), h = hd + off(rng);
      track(reward_height(h, hd), oracle::height(h, hd));
      JointVector u{};
      for (auto& x : u) x = un(rng);
      track(reward_energy(u), oracle::energy(u));
      const double cx = c(rng), cy = c(rng);
      const auto poly = rectangle(cx, cy, 0.16, 0.04, yaw(rng));
      const double k = i % 2 ? 0.3 : 1.0;
      const Vec2 p{cx + k * o(rng) * 0.4, cy + k * o(rng) * 0.2};
      const auto ctr = polygon_center(poly);
      const double dist = std::hypot(p.x - ctr.x, p.y - ctr.y);
      contain_ok = contain_ok && point_in_convex_polygon(p, poly) == oracle::inside(p, poly);
      track(reward_com(p, poly, dist), oracle::com(p, poly, dist));
      const double r = ang(rng), pi = ang(rng), y = ang(rng);
      track(reward_posture(r, pi, y, 0, 0, 0).angle, oracle::squares(y, pi, r));
      track(reward_posture(0, 0, 0, r, pi, y).rate, oracle::squares(y, pi, r));
      const double f = fd(rng);
      track(reward_foot_distance(f), oracle::feet(f));
    }
    d << "7 terms x 100 inputs, max |error| " << worst << "; weights "
      << (kRewardWeights == expected ? "match" : "differ");
    return worst <= 1e-12 && contain_ok && kRewardWeights == expected;
  });

  criterion("reward clamp", [](auto& d) {
    std::mt19937_64 rng(105);
    std::uniform_real_distribution<double> v(-5, 5), z(0.01, 3), ang(-4, 4), rate(-30, 30), unit(-1, 1),
        dist(0, 2), pos(-2, 2);
    std::uniform_int_distribution<int> pick(0, 3);
    long out_of_range = 0;
    for (int i = 0; i < 100000; ++i) {
      RewardInputs in;
      in.vx_avg = v(rng);
      in.vy_avg = v(rng);
      in.vx_desired = v(rng);
      in.vy_desired = v(rng);
      if (pick(rng) == 0) in.vx_avg = in.vx_desired - 1e-5;
      in.pz = z(rng);
      in.pz_desired = z(rng);
      for (auto& u : in.u_norm) u = unit(rng);
      in.support_polygon = rectangle(pos(rng), pos(rng), 0.16, 0.04, ang(rng));
      in.com_xy = {pos(rng), pos(rng)};
      in.com_distance = pick(rng) == 0 ? 0.1 : dist(rng);
      in.roll = ang(rng);
      in.pitch = ang(rng);
      in.yaw = ang(rng);
      in.roll_rate = rate(rng);
      in.pitch_rate = rate(rng);
      in.yaw_rate = rate(rng);
      in.feet_distance = dist(rng);
      for (double c : compute_rewards(in).components) out_of_range += !(c >= -1.0 && c <= 1.0);
    }
    d << "1e5 fuzzed inputs, " << out_of_range << " components outside [-1, 1]";
    return out_of_range == 0;
  });

  criterion("regulators", [](auto& d) {
    const double fp = foot_placement({0.6, 0.5, 0.5}, 0.2, 0.1);
    const double t1 = torso_torque(0.05, -0.1, 0.0, 0.0, 8.0, 0.5);
    const double t2 = torso_torque(0.05, -0.1, 0.0, 0.0, 16.0, 1.0);
    const double a0 = swing_ankle_reference(0.0), a1 = swing_ankle_reference(0.1);
    const double offset = 63.0 * std::numbers::pi / 180.0;
    d << "foot placement " << fp << ", torso " << t1 << "/" << t2 << ", swing ankle " << a0 << "/" << a1;
    return std::abs(fp - 0.03) <= 1e-12 && std::abs(t1 - 0.35) <= 1e-12 && std::abs(t2 - 0.70) <= 1e-12 &&
           std::abs(a0 + offset) <= 1e-12 && std::abs(a1 - (0.1 - offset)) <= 1e-12 &&
           std::abs(a0 + 1.09956) <= 1e-5 && std::abs(a1 + 0.99956) <= 1e-5;
  });

  criterion("termination", [](auto& d) {
    const TerminationState nominal{0.0, 0.0, 0.0, 0.95, 0.3};
    int wrong = 0, rows = 0;
    for (int mask = 0; mask < 64; ++mask) {
      auto s = nominal;
      if (mask & 1) s.yaw = -0.55;
      if (mask & 2) s.pitch = 0.7;
      if (mask & 4) s.roll = -0.51;
      if (mask & 8) s.pz = 0.6;
      if (mask & 16) s.feet_distance = 0.01;
      if (mask & 32) s.pz = 1.2;
      wrong += terminated(s) != (mask != 0);
      ++rows;
    }
    auto expect = [&](TerminationState s, bool want) {
      wrong += terminated(s) != want;
      ++rows;
    };
    const double below = std::nextafter(0.5, 0.0);
    for (int field = 0; field < 3; ++field) {
      for (double sign : {1.0, -1.0}) {
        auto s = nominal;
        double* f = field == 0 ? &s.yaw : field == 1 ? &s.pitch : &s.roll;
        *f = sign * 0.5;
        expect(s, true);
        *f = sign * below;
        expect(s, false);
      }
    }
    auto s = nominal;
    s.pz = 0.75;
    expect(s, true);
    s.pz = std::nextafter(0.75, 1.0);
    expect(s, false);
    s.pz = 1.1;
    expect(s, true);
    s.pz = std::nextafter(1.1, 0.0);
    expect(s, false);
    s = nominal;
    s.feet_distance = 0.05;
    expect(s, true);
    s.feet_distance = std::nextafter(0.05, 1.0);
    expect(s, false);
    d << rows << " rows including boundaries, " << wrong << " wrong";
    return wrong == 0;
  });

  criterion("es sphere, rank invariance, mirrored noise", [](auto& d) {
    const ESConfig defaults;
    EsTrainer t(defaults, std::vector<double>(10, 1.0), sphere);
    int reached = -1;
    for (int i = 0; i < 200 && reached < 0; ++i) {
      t.step();
      if (sphere_value(t.params()) > -1e-3) reached = i + 1;
    }
    ESConfig cfg;
    cfg.pairs = 8;
    cfg.seed = 3;
    EsTrainer a(cfg, std::vector<double>(10, 1.0), sphere);
    EsTrainer b(cfg, std::vector<double>(10, 1.0), [](std::span<const double> x, std::uint64_t s) {
      auto r = sphere(x, s);
      r.fitness = 7.0 + 3.0 * std::exp(r.fitness);
      return r;
    });
    bool same = true;
    for (int i = 0; i < 20; ++i) {
      a.step();
      b.step();
      same = same && a.params() == b.params();
    }
    // Every candidate is theta +/- sigma eps for its pair's eps.
    cfg.sigma = 0.3;
    const std::vector<double> init = {0.5, -0.25, 2.0, 0.0};
    std::mutex mu;
    std::map<std::uint64_t, std::vector<std::vector<double>>> seen;
    EsTrainer m(cfg, init, [&](std::span<const double> x, std::uint64_t seed) {
      std::lock_guard lock(mu);
      seen[seed].emplace_back(x.begin(), x.end());
      return CandidateResult{x[0], 0.0};
    });
    m.step();
    bool mirrored = seen.size() == static_cast<std::size_t>(cfg.pairs);
    for (int p = 0; p < cfg.pairs && mirrored; ++p) {
      const auto eps = noise_vector(cfg.seed, 0, p, init.size());
      const auto& c = seen[keyed_seed({cfg.seed, 0x6576616cULL, 0, static_cast<std::uint64_t>(p)})];
      std::vector<double> plus(init.size()), minus(init.size());
      for (std::size_t i = 0; i < init.size(); ++i) {
        plus[i] = init[i] + cfg.sigma * eps[i];
        minus[i] = init[i] - cfg.sigma * eps[i];
      }
      mirrored = c.size() == 2 && ((c[0] == plus && c[1] == minus) || (c[0] == minus && c[1] == plus));
    }
    d << "sphere f > -1e-3 " << (reached > 0 ? "at iteration " + std::to_string(reached) : "not reached")
      << " (pairs " << defaults.pairs << ", sigma " << defaults.sigma << ", lr " << defaults.learning_rate
      << "); rank-transformed run " << (same ? "identical" : "differs") << "; mirrored pairs "
      << (mirrored ? "ok" : "broken");
    return reached > 0 && reached <= 200 && same && mirrored;
  });

  criterion("determinism", [](auto& d) {
    RunConfig cfg;
    cfg.es.pairs = 4;
    cfg.es.iterations = 10;
    cfg.es.seed = 7;
    ScratchDir a("det-a"), b("det-b"), c("det-c");
    TrainOptions opt;
    opt.workers = 1;
    opt.out_dir = a.path;
    train_policy(cfg, opt);
    opt.out_dir = b.path;
    train_policy(cfg, opt);
    opt.out_dir = c.path;
    opt.workers = 4;
    train_policy(cfg, opt);
    const auto fa = slurp(a.path / "final.json");
    const bool same_seed = !fa.empty() && fa == slurp(b.path / "final.json");
    const bool workers = fa == slurp(c.path / "final.json");
    d << "n=4, 10 iterations: repeat " << (same_seed ? "byte-identical" : "differs") << ", 1 vs 4 workers "
      << (workers ? "byte-identical" : "differs");
    return same_seed && workers;
  });

  criterion("learning", [](auto& d) {
    RunConfig cfg;
    cfg.es.seed = 42;
    cfg.es.pairs = 16;
    cfg.es.iterations = 150;
    cfg.es.sigma = 0.08;
    cfg.es.learning_rate = 0.05;
    cfg.es.episodes_per_candidate = 1;
    cfg.es.command = {0.3, 0.3, 0.0, 0.0};
    cfg.es.checkpoint_interval = 50;
    ScratchDir dir("learn");
    TrainOptions opt;
    opt.out_dir = dir.path;
    opt.workers = default_worker_count();
    std::vector<IterationStats> stats;
    opt.on_iteration = [&](const IterationStats& s) { stats.push_back(s); };
    const auto t0 = std::chrono::steady_clock::now();
    train_policy(cfg, opt);
    const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
    if (stats.size() != 150) {
      d << "expected 150 iterations, got " << stats.size();
      return false;
    }
    const auto& first = stats.front();
    const auto& last = stats.back();
    d << "return " << first.mean_return << " -> " << last.mean_return << " (x"
      << last.mean_return / first.mean_return << "), ticks " << first.mean_episode_ticks << " -> "
      << last.mean_episode_ticks << ", " << minutes << " min, " << opt.workers << " worker(s)";
    return first.mean_return > 0.0 && last.mean_return >= 3.0 * first.mean_return &&
           first.mean_episode_ticks < 1500.0 && last.mean_episode_ticks > 6000.0 && minutes < 60.0;
  });

  criterion("push recovery", [](auto& d) {
    const RunConfig cfg;
    const BaselineController base(cfg.decoder.bounds());
    const ActionFn policy = [&](const Observation& o) { return base(o); };
    bool ok = true;
    for (double fx : {25.0, -25.0}) {
      BipedEnv env = make_surrogate_env(cfg);
      std::vector<double> vbar;
      const std::vector<PushEvent> pushes = {{2.0, 0.1, fx, 0.0}};
      const auto res = run_episode(
          env, policy, 1, 0.3, 0.0, pushes,
          [&](const StepResult& r, const RawAction&) { vbar.push_back(r.observation.vx_avg); }, 8000);
      if (res.terminated || vbar.size() != 8000) {
        d << "fx " << fx << ": fell at tick " << vbar.size() << "; ";
        ok = false;
        continue;
      }
      double pre = 0.0;
      for (int k = 1300; k < 2000; ++k) pre += vbar[k];
      pre /= 700.0;
      // Last tick outside the band; recovered once the band holds to the end.
      int last_out = -1;
      double worst_after = 0.0;
      for (int k = 2000; k < 8000; ++k) {
        const double dev = std::abs(vbar[k] - pre);
        if (dev >= 0.1) last_out = k;
        if (k >= 5000) worst_after = std::max(worst_after, dev);
      }
      const double recovered_at = (last_out + 1) / 1000.0;
      d << "fx " << fx << ": steady " << pre << " m/s, back within 0.1 by t=" << std::max(recovered_at, 2.0)
        << " s, max deviation after t=5 s " << worst_after << "; ";
      ok = ok && worst_after < 0.1 && recovered_at <= 5.0;
    }
    return ok;
  });

  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << " ("
            << total << " s)" << std::endl;
  return failures == 0 ? 0 : 1;
}
