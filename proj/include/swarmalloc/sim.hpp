#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "environment.hpp"
#include "rng.hpp"

namespace swarmalloc::sim {

inline constexpr double kPi = 3.14159265358979323846;

enum class Controller { centralized, decentralized, iterative };

inline const char* controller_name(Controller c) {
  switch (c) {
    case Controller::centralized: return "centralized";
    case Controller::decentralized: return "decentralized";
    case Controller::iterative: return "iterative";
  }
  return "unknown";
}

struct MotionParams {
  double speed = 0.1;               // distance per timestep
  double turn_rate_deg = 3.0;       // in-place rotation per avoidance step
  double detect_range = 4.5;        // proximity sensor reach
  double comm_range = 7.5;          // opinion exchange radius
  double sample_gap = 1.0;          // distance travelled between ground samples
  double heading_jitter_deg = 10.0;  // random walk perturbation, applied per move
  double robot_radius = 0.5;        // sensed body radius of other robots
  double min_separation = 1.0;      // forward motion halts below this distance
  std::int64_t explore_min = 600;   // exploration deadline bounds, timesteps
  std::int64_t explore_max = 1800;
  std::int64_t round_period = 100;  // dissemination vote cadence
};

enum class RobotMode { exploring, avoiding, disseminating, done };

struct RobotState {
  double x = 0.0, y = 0.0, heading = 0.0;
  int opinion = -1;  // 1 white, 0 black, -1 not yet formed
  std::int64_t samples_white = 0;
  std::int64_t samples_total = 0;
  double distance_since_sample = 0.0;
  std::int64_t exploration_deadline = 0;
  RobotMode phase = RobotMode::exploring;
  bool avoiding = false;  // true while turning away from an obstacle

  RobotMode mode() const { return avoiding ? RobotMode::avoiding : phase; }

  /// Majority of all samples taken so far; -1 on a tie or no samples.
  int estimate() const {
    if (2 * samples_white > samples_total) return 1;
    if (2 * samples_white < samples_total) return 0;
    return -1;
  }
};

struct Vec2 {
  double x = 0.0, y = 0.0;
};

namespace detail {

inline double normalize_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  return a < 0.0 ? a + 2.0 * kPi : a;
}

inline double wall_distance(double x, double y, double dx, double dy) {
  double t = std::numeric_limits<double>::infinity();
  constexpr double eps = 1e-12;
  const double s = double(Environment::side);
  if (dx > eps) t = std::min(t, (s - x) / dx);
  else if (dx < -eps) t = std::min(t, -x / dx);
  if (dy > eps) t = std::min(t, (s - y) / dy);
  else if (dy < -eps) t = std::min(t, -y / dy);
  return t;
}

/// Another robot's body blocks the mover while its disc sits within
/// detect_range and inside the forward arc. The arc spans 135 degrees to
/// either side of the heading, widened by the angular half-size of the disc,
/// so a robot resumes motion only once a neighbour is well behind the axis of
/// travel. Range is measured to the disc edge.
inline bool robot_in_path(double px, double py, double heading,
                          const std::vector<Vec2>& others, int self,
                          double radius, double range) {
  constexpr double arc = 3.0 * kPi / 4.0;
  for (std::size_t j = 0; j < others.size(); ++j) {
    if (int(j) == self) continue;
    const double dx = others[j].x - px;
    const double dy = others[j].y - py;
    const double d = std::hypot(dx, dy);
    if (d - radius > range) continue;
    const double widen = std::asin(std::min(1.0, radius / std::max(d, radius)));
    const double off = std::fabs(std::remainder(std::atan2(dy, dx) - heading, 2.0 * kPi));
    if (off <= arc + widen) return true;
  }
  return false;
}

}  // namespace detail

/// One timestep of the motion layer. Three forward rays (45 degrees apart)
/// look for walls, and with interference on a wide forward arc looks for
/// other robot bodies; either contact inside detect_range turns the robot in
/// place instead of moving. Otherwise the heading jitters, the robot advances
/// one speed step (unless that would bring it within min_separation of
/// another robot), and the floor is sampled once per sample_gap of distance
/// covered while sampling is active.
inline void step_robot(RobotState& r, const Environment& env,
                       const std::vector<Vec2>& positions, int self,
                       bool interference, const MotionParams& mp, Rng& rng,
                       bool sampling_active) {
  r.avoiding = false;
  const double turn = mp.turn_rate_deg * kPi / 180.0;

  bool blocked = false;
  const double offsets[3] = {-kPi / 4.0, 0.0, kPi / 4.0};
  for (double off : offsets) {
    const double a = r.heading + off;
    if (detail::wall_distance(r.x, r.y, std::cos(a), std::sin(a)) <=
        mp.detect_range) {
      blocked = true;
      break;
    }
  }
  if (!blocked && interference)
    blocked = detail::robot_in_path(r.x, r.y, r.heading, positions, self,
                                    mp.robot_radius, mp.detect_range);
  if (blocked) {
    r.heading = detail::normalize_angle(r.heading + turn);
    r.avoiding = true;
    return;
  }

  if (mp.heading_jitter_deg > 0.0) {
    const double jit = mp.heading_jitter_deg * kPi / 180.0;
    r.heading = detail::normalize_angle(r.heading + rng.uniform(-jit, jit));
  }
  const double nx = r.x + mp.speed * std::cos(r.heading);
  const double ny = r.y + mp.speed * std::sin(r.heading);
  if (interference) {
    for (std::size_t j = 0; j < positions.size(); ++j) {
      if (int(j) == self) continue;
      const double ddx = nx - positions[j].x;
      const double ddy = ny - positions[j].y;
      if (ddx * ddx + ddy * ddy < mp.min_separation * mp.min_separation) {
        r.heading = detail::normalize_angle(r.heading + turn);
        r.avoiding = true;
        return;
      }
    }
  }
  r.x = nx;
  r.y = ny;
  r.distance_since_sample += mp.speed;
  if (sampling_active && r.distance_since_sample >= mp.sample_gap - 1e-9) {
    r.samples_white += env.white_at_position(r.x, r.y) ? 1 : 0;
    r.samples_total += 1;
    r.distance_since_sample = 0.0;
  }
}

struct SimOutcome {
  int decision = -1;  // 1 white, 0 black, -1 not reached
  bool correct = false;
  bool converged = false;
  std::int64_t steps = 0;
  std::vector<std::uint8_t> individual_estimates;  // opinion formed per robot
  int individual_correct = 0;
};

struct SimRun {
  Geometry geometry = Geometry::checkerboard;
  double f = 0.55;
  Controller controller = Controller::centralized;
  int n = 1;
  bool interference = false;
  std::uint64_t rng_seed = 0;
  std::int64_t max_timesteps = 50000;
  MotionParams motion;
  SimOutcome outcome;
};

/// Full collective perception run: spawn, explore, form opinions, then decide
/// by the selected controller. Everything is driven by one generator seeded
/// from rng_seed, so identical inputs reproduce identical outcomes bit for
/// bit. A run that fails to reach a decision within max_timesteps reports
/// decision -1 and converged false.
inline SimRun run_experiment(SimRun spec) {
  if (spec.n < 1) throw std::domain_error("need at least one robot");
  if (spec.max_timesteps < 1) throw std::domain_error("max_timesteps must be >= 1");
  const MotionParams& mp = spec.motion;
  if (!(mp.speed > 0.0) || !(mp.sample_gap > 0.0) || mp.explore_min < 1 ||
      mp.explore_max < mp.explore_min || mp.round_period < 1)
    throw std::domain_error("invalid motion parameters");

  Rng rng(spec.rng_seed);
  const Environment env = generate_environment(spec.geometry, spec.f, rng.next_u64());
  const int n = spec.n;

  std::vector<RobotState> bots(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    RobotState& b = bots[std::size_t(i)];
    for (int attempt = 0;; ++attempt) {
      b.x = rng.uniform(0.0, double(Environment::side));
      b.y = rng.uniform(0.0, double(Environment::side));
      if (!spec.interference || attempt > 10000) break;
      bool clear = true;
      for (int j = 0; j < i; ++j) {
        const double dx = b.x - bots[std::size_t(j)].x;
        const double dy = b.y - bots[std::size_t(j)].y;
        if (dx * dx + dy * dy < mp.min_separation * mp.min_separation) {
          clear = false;
          break;
        }
      }
      if (clear) break;
    }
    b.heading = rng.uniform(0.0, 2.0 * kPi);
    b.exploration_deadline = rng.uniform_int(mp.explore_min, mp.explore_max);
  }
  std::int64_t latest_deadline = 0;
  for (const auto& b : bots)
    latest_deadline = std::max(latest_deadline, b.exploration_deadline);

  SimOutcome out;
  out.individual_estimates.assign(std::size_t(n), 0);

  std::vector<Vec2> positions(static_cast<std::size_t>(n));
  std::vector<int> next_opinion(static_cast<std::size_t>(n));
  bool decided = false;

  for (std::int64_t t = 1; t <= spec.max_timesteps && !decided; ++t) {
    for (int i = 0; i < n; ++i)
      positions[std::size_t(i)] = {bots[std::size_t(i)].x, bots[std::size_t(i)].y};

    for (int i = 0; i < n; ++i) {
      RobotState& b = bots[std::size_t(i)];
      const bool sampling =
          b.phase == RobotMode::exploring ||
          (b.phase == RobotMode::disseminating &&
           spec.controller == Controller::iterative);
      step_robot(b, env, positions, i, spec.interference, mp, rng, sampling);
      if (b.phase == RobotMode::exploring && t >= b.exploration_deadline) {
        const int est = b.estimate();
        b.opinion = est >= 0 ? est : (rng.coin() ? 1 : 0);
        out.individual_estimates[std::size_t(i)] = std::uint8_t(b.opinion);
        b.phase = spec.controller == Controller::centralized
                      ? RobotMode::done
                      : RobotMode::disseminating;
      }
    }

    if (spec.controller == Controller::centralized) {
      if (t >= latest_deadline) {
        int white = 0;
        for (const auto& b : bots) white += b.opinion == 1 ? 1 : 0;
        out.decision = 2 * white > n ? 1
                       : 2 * white < n ? 0
                                       : (rng.coin() ? 1 : 0);
        out.converged = true;
        out.steps = t;
        decided = true;
      }
    } else if (t >= latest_deadline && t % mp.round_period == 0) {
      // Synchronous local majority round over current neighbourhoods.
      for (int i = 0; i < n; ++i) {
        const RobotState& b = bots[std::size_t(i)];
        int white = b.opinion == 1 ? 1 : 0;  // a robot hears itself
        int total = 1;
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          const double dx = b.x - bots[std::size_t(j)].x;
          const double dy = b.y - bots[std::size_t(j)].y;
          if (dx * dx + dy * dy <= mp.comm_range * mp.comm_range) {
            white += bots[std::size_t(j)].opinion == 1 ? 1 : 0;
            total += 1;
          }
        }
        if (spec.controller == Controller::iterative) {
          const int est = bots[std::size_t(i)].estimate();
          if (est >= 0) {
            white += est;
            total += 1;
          }
        }
        next_opinion[std::size_t(i)] = 2 * white > total ? 1
                                       : 2 * white < total ? 0
                                                           : (rng.coin() ? 1 : 0);
      }
      bool unanimous = true;
      for (int i = 0; i < n; ++i) {
        bots[std::size_t(i)].opinion = next_opinion[std::size_t(i)];
        unanimous = unanimous && next_opinion[std::size_t(i)] == next_opinion[0];
      }
      if (unanimous) {
        out.decision = next_opinion[0];
        out.converged = true;
        out.steps = t;
        decided = true;
        for (auto& b : bots) b.phase = RobotMode::done;
      }
    }
  }

  if (!decided) {
    out.decision = -1;
    out.converged = false;
    out.steps = spec.max_timesteps;
  }
  for (std::uint8_t e : out.individual_estimates) out.individual_correct += e == 1;
  out.correct = out.converged && out.decision == 1;
  spec.outcome = out;
  return spec;
}

struct AccuracyEstimate {
  double p = 0.0;
  double std_error = 0.0;
  std::int64_t correct = 0;
  std::int64_t total = 0;
};

/// Fraction of per-robot opinions that match the majority color, pooled over
/// repeated centralized runs. This is the single-agent accuracy fed to the
/// saturating curve family.
inline AccuracyEstimate estimate_individual_accuracy(
    Geometry g, double f, int n_robots, int repetitions, std::uint64_t master_seed,
    const MotionParams& mp = {}, bool interference = false,
    std::int64_t max_timesteps = 50000) {
  if (n_robots < 1) throw std::domain_error("need at least one robot");
  if (repetitions < 1) throw std::domain_error("need at least one repetition");
  AccuracyEstimate est;
  for (int rep = 0; rep < repetitions; ++rep) {
    SimRun run;
    run.geometry = g;
    run.f = f;
    run.controller = Controller::centralized;
    run.n = n_robots;
    run.interference = interference;
    run.rng_seed = derive_seed(master_seed, std::uint64_t(n_robots), std::uint64_t(rep));
    run.motion = mp;
    run.max_timesteps = max_timesteps;
    run = run_experiment(std::move(run));
    est.correct += run.outcome.individual_correct;
    est.total += n_robots;
  }
  est.p = double(est.correct) / double(est.total);
  est.std_error = std::sqrt(std::max(0.0, est.p * (1.0 - est.p)) / double(est.total));
  return est;
}

struct CurvePoint {
  int n = 0;
  double accuracy = 0.0;  // correct decisions over converged runs
  std::int64_t converged_runs = 0;
  std::int64_t total_runs = 0;
};

/// Collective accuracy as a function of swarm size. Non-converged runs are
/// excluded from the accuracy ratio but reported in the counts.
inline std::vector<CurvePoint> scalability_curve(
    Geometry g, double f, Controller c, const std::vector<int>& n_list,
    int repetitions, bool interference, std::uint64_t master_seed,
    const MotionParams& mp = {}, std::int64_t max_timesteps = 50000,
    std::vector<SimRun>* runs_out = nullptr) {
  if (repetitions < 1) throw std::domain_error("need at least one repetition");
  if (n_list.empty()) throw std::domain_error("need at least one swarm size");
  std::vector<CurvePoint> points;
  points.reserve(n_list.size());
  for (int n : n_list) {
    CurvePoint pt;
    pt.n = n;
    std::int64_t correct = 0;
    for (int rep = 0; rep < repetitions; ++rep) {
      SimRun run;
      run.geometry = g;
      run.f = f;
      run.controller = c;
      run.n = n;
      run.interference = interference;
      run.rng_seed = derive_seed(master_seed, std::uint64_t(n), std::uint64_t(rep));
      run.motion = mp;
      run.max_timesteps = max_timesteps;
      run = run_experiment(std::move(run));
      pt.total_runs += 1;
      if (run.outcome.converged) {
        pt.converged_runs += 1;
        correct += run.outcome.correct ? 1 : 0;
      }
      if (runs_out) runs_out->push_back(std::move(run));
    }
    pt.accuracy = pt.converged_runs > 0
                      ? double(correct) / double(pt.converged_runs)
                      : 0.0;
    points.push_back(pt);
  }
  return points;
}

}  // namespace swarmalloc::sim
