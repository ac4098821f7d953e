#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "curves.hpp"

namespace swarmalloc {

struct TaskSet {
  std::vector<ScalabilityCurve> tasks;
  double epsilon = 0.0;  // smallest relative gain still worth one more unit
};

struct Allocation {
  std::int64_t total_agents = 0;
  std::vector<std::int64_t> counts;  // one entry per task, each >= 1
  std::int64_t idle = 0;             // agents deliberately left unassigned
  double collective_performance = 1.0;
  std::vector<double> per_task_performance;
  bool scale_heterogeneous = false;  // tasks span more than one curve family
};

struct AllocStats {
  std::int64_t gain_advances = 0;  // marginal_gain_advance invocations
  std::int64_t units_assigned = 0;
};

class CapExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void validate_taskset(const TaskSet& ts) {
  if (ts.tasks.empty())
    throw std::domain_error("task set must contain at least one task");
  if (!(ts.epsilon >= 0.0)) throw std::domain_error("epsilon must be >= 0");
}

inline double collective_performance(const TaskSet& ts,
                                     const std::vector<std::int64_t>& counts) {
  validate_taskset(ts);
  if (counts.size() != ts.tasks.size())
    throw std::domain_error("counts size does not match task count");
  double prod = 1.0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    prod *= evaluate(ts.tasks[i], counts[i]);
  return prod;
}

namespace detail {

struct QueueEntry {
  double delta;
  std::int32_t task;
};

struct EntryLess {
  bool operator()(const QueueEntry& a, const QueueEntry& b) const {
    if (a.delta != b.delta) return a.delta < b.delta;
    return a.task > b.task;  // equal gains: lowest task index wins
  }
};

/// Order in which a unit greedy commits units within one task group, along
/// with prefix sums of log(1 + delta). Stops once the best remaining gain is
/// epsilon or below, or the unit budget runs out.
struct GreedyStream {
  std::vector<std::int32_t> order;
  std::vector<double> prefix_log;  // prefix_log[u] = value of the first u units
};

inline GreedyStream run_greedy(const std::vector<std::int32_t>& subset,
                               double epsilon, std::int64_t max_units,
                               std::vector<GainState>& states, AllocStats* stats) {
  GreedyStream out;
  out.prefix_log.push_back(0.0);
  if (subset.empty() || max_units <= 0) return out;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, EntryLess> pq;
  for (std::int32_t t : subset) pq.push({states[t].current_delta, t});
  double acc = 0.0;
  while (std::int64_t(out.order.size()) < max_units) {
    QueueEntry top = pq.top();
    if (!(top.delta > epsilon)) break;
    pq.pop();
    acc += std::log1p(top.delta);
    out.order.push_back(top.task);
    out.prefix_log.push_back(acc);
    states[top.task] = marginal_gain_advance(states[top.task]);
    if (stats) ++stats->gain_advances;
    pq.push({states[top.task].current_delta, top.task});
  }
  return out;
}

inline Allocation finish_allocation(std::int64_t N, const TaskSet& ts,
                                    std::vector<std::int64_t> counts) {
  Allocation a;
  a.total_agents = N;
  a.counts = std::move(counts);
  std::int64_t used = 0;
  for (std::int64_t c : a.counts) used += c;
  a.idle = N - used;
  a.per_task_performance.reserve(a.counts.size());
  double prod = 1.0;
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    const double v = evaluate(ts.tasks[i], a.counts[i]);
    a.per_task_performance.push_back(v);
    prod *= v;
  }
  a.collective_performance = prod;
  bool fam[3] = {false, false, false};
  for (const auto& d : ts.tasks) fam[int(d.family())] = true;
  a.scale_heterogeneous = (int(fam[0]) + int(fam[1]) + int(fam[2])) > 1;
  return a;
}

}  // namespace detail

/// Greedy marginal-gain allocation of N agents over the task set. Every task
/// keeps at least one agent; whenever no remaining unit clears the epsilon
/// cutoff the rest of the agents are left idle.
///
/// Saturating tasks absorb agents in pairs while the other families grow one
/// agent at a time, so the two groups are ordered independently and the exact
/// split of the budget between them is picked by scanning all pair counts.
/// For a task set drawn from a single family this reduces to the plain greedy
/// loop.
inline Allocation allocate(std::int64_t N, const TaskSet& ts,
                           AllocStats* stats = nullptr) {
  validate_taskset(ts);
  const std::int64_t T = std::int64_t(ts.tasks.size());
  if (N < T) throw std::domain_error("need at least one agent per task");

  std::vector<std::int32_t> pair_tasks, single_tasks;
  for (std::int32_t i = 0; i < T; ++i) {
    if (ts.tasks[i].family() == CurveFamily::saturating)
      pair_tasks.push_back(i);
    else
      single_tasks.push_back(i);
  }

  std::vector<GainState> states;
  states.reserve(std::size_t(T));
  for (const auto& d : ts.tasks) states.push_back(marginal_gain_init(d));

  const std::int64_t budget = N - T;
  const auto pairs =
      detail::run_greedy(pair_tasks, ts.epsilon, budget / 2, states, stats);
  const auto singles =
      detail::run_greedy(single_tasks, ts.epsilon, budget, states, stats);

  const std::int64_t mp = std::int64_t(pairs.order.size());
  const std::int64_t ms = std::int64_t(singles.order.size());
  std::int64_t best_m = 0;
  std::int64_t best_j = std::min(budget, ms);
  double best_total = singles.prefix_log[std::size_t(best_j)];
  for (std::int64_t m = 1; m <= mp; ++m) {
    const std::int64_t j = std::min(budget - 2 * m, ms);
    const double total =
        pairs.prefix_log[std::size_t(m)] + singles.prefix_log[std::size_t(j)];
    if (total > best_total) {
      best_total = total;
      best_m = m;
      best_j = j;
    }
  }

  std::vector<std::int64_t> counts(std::size_t(T), 1);
  for (std::int64_t u = 0; u < best_m; ++u)
    counts[std::size_t(pairs.order[std::size_t(u)])] += 2;
  for (std::int64_t u = 0; u < best_j; ++u)
    counts[std::size_t(singles.order[std::size_t(u)])] += 1;
  if (stats) stats->units_assigned = best_m + best_j;

  // A saturating task can still want a pair when only one budget agent is
  // left. That agent is placed on the strongest such task rather than idled;
  // the even count adds nothing but wastes nothing either. When the cutoff
  // stopped the streams instead, the remainder belongs to the idle pool.
  if (budget - 2 * best_m - best_j >= 1) {
    std::int32_t park = -1;
    double best_delta = ts.epsilon;
    for (std::int32_t t : pair_tasks) {
      if (states[std::size_t(t)].current_delta > best_delta) {
        best_delta = states[std::size_t(t)].current_delta;
        park = t;
      }
    }
    if (park >= 0) counts[std::size_t(park)] += 1;
  }

  return detail::finish_allocation(N, ts, std::move(counts));
}

inline Allocation allocate(std::int64_t N, const TaskSet& ts, AllocStats& stats) {
  return allocate(N, ts, &stats);
}

/// Number of ways to hand N agents to T tasks with every count >= 1 and no
/// idle pool: C(N-1, T-1), computed exactly.
inline std::uint64_t count_partitions(std::int64_t N, std::int64_t T) {
  if (T < 1 || N < T) throw std::domain_error("need N >= T >= 1");
  std::int64_t n = N - 1;
  std::int64_t k = T - 1;
  if (k > n - k) k = n - k;
  unsigned __int128 r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r = r * (unsigned __int128)(std::uint64_t(n - k + i));
    r /= std::uint64_t(i);
    if (r > (unsigned __int128)std::numeric_limits<std::uint64_t>::max())
      throw std::overflow_error("partition count exceeds 64-bit range");
  }
  return std::uint64_t(r);
}

struct BruteForceResult {
  Allocation best;
  // Every tied maximizer at the minimal idle count, in lexicographic order.
  std::vector<std::vector<std::int64_t>> tie_set;
};

/// Exhaustive reference search over all ordered assignments. Counts above the
/// last unit whose gain clears epsilon are never useful, so each task is
/// capped there before enumeration. Ties within 1e-12 relative are collected,
/// then reduced to the assignments wasting the fewest agents.
inline BruteForceResult brute_force(std::int64_t N, const TaskSet& ts,
                                    std::int64_t enumeration_cap = 10000000) {
  validate_taskset(ts);
  const std::int64_t T = std::int64_t(ts.tasks.size());
  if (N < T) throw std::domain_error("need at least one agent per task");

  std::uint64_t planned = 0;
  try {
    planned = count_partitions(N, T);
  } catch (const std::overflow_error&) {
    throw CapExceededError("search space larger than the enumeration cap");
  }
  if (enumeration_cap >= 0 && planned > std::uint64_t(enumeration_cap))
    throw CapExceededError("search space larger than the enumeration cap");

  const std::int64_t top = N - (T - 1);
  std::vector<std::vector<double>> val(static_cast<std::size_t>(T));
  std::vector<std::int64_t> cap(static_cast<std::size_t>(T));
  for (std::int64_t i = 0; i < T; ++i) {
    val[std::size_t(i)] = evaluate_range(ts.tasks[std::size_t(i)], top);
    const int u = ts.tasks[std::size_t(i)].unit_size();
    std::int64_t c = 1;
    while (c + u <= top) {
      const double gain = val[std::size_t(i)][std::size_t(c - 1 + u)] /
                              val[std::size_t(i)][std::size_t(c - 1)] -
                          1.0;
      if (!(gain > ts.epsilon)) break;
      c += u;
    }
    // A saturating task may also hold one extra agent beyond the last useful
    // pair; the agent adds nothing but the count is feasible.
    if (u == 2 && c + 1 <= top) c += 1;
    cap[std::size_t(i)] = c;
  }

  constexpr double kRelTol = 1e-12;
  constexpr std::size_t kTieLimit = 4096;
  double best = -1.0;
  std::vector<std::vector<std::int64_t>> ties;
  std::vector<std::int64_t> cur(std::size_t(T), 1);

  std::function<void(std::int64_t, std::int64_t, double)> walk =
      [&](std::int64_t i, std::int64_t used, double prod) {
        if (i == T) {
          if (prod > best * (1.0 + kRelTol)) {
            best = prod;
            ties.clear();
            ties.push_back(cur);
          } else if (prod >= best * (1.0 - kRelTol) && ties.size() < kTieLimit) {
            ties.push_back(cur);
          }
          return;
        }
        const std::int64_t rest = T - 1 - i;
        for (std::int64_t c = 1; c <= cap[std::size_t(i)] && used + c + rest <= N;
             ++c) {
          cur[std::size_t(i)] = c;
          walk(i + 1, used + c, prod * val[std::size_t(i)][std::size_t(c - 1)]);
        }
        cur[std::size_t(i)] = 1;
      };
  walk(0, 0, 1.0);

  std::int64_t min_idle = std::numeric_limits<std::int64_t>::max();
  for (const auto& t : ties) {
    std::int64_t used = 0;
    for (std::int64_t c : t) used += c;
    min_idle = std::min(min_idle, N - used);
  }
  std::vector<std::vector<std::int64_t>> kept;
  for (const auto& t : ties) {
    std::int64_t used = 0;
    for (std::int64_t c : t) used += c;
    if (N - used == min_idle) kept.push_back(t);
  }

  BruteForceResult out;
  out.best = detail::finish_allocation(N, ts, kept.front());
  out.tie_set = std::move(kept);
  return out;
}

struct SweepRow {
  std::int64_t N = 0;
  std::vector<std::int64_t> counts;
  std::int64_t idle = 0;
  std::vector<double> proportions;  // counts[i] / N
  double performance = 0.0;
};

inline std::vector<SweepRow> sweep(const TaskSet& ts, std::int64_t n_min,
                                   std::int64_t n_max, std::int64_t step = 1) {
  validate_taskset(ts);
  if (step < 1) throw std::domain_error("sweep step must be >= 1");
  if (n_min < std::int64_t(ts.tasks.size()))
    throw std::domain_error("sweep must start at N >= T");
  if (n_min > n_max) throw std::domain_error("sweep range is empty");
  std::vector<SweepRow> rows;
  for (std::int64_t N = n_min; N <= n_max; N += step) {
    Allocation a = allocate(N, ts);
    SweepRow row;
    row.N = N;
    row.idle = a.idle;
    row.performance = a.collective_performance;
    row.proportions.reserve(a.counts.size());
    for (std::int64_t c : a.counts)
      row.proportions.push_back(double(c) / double(N));
    row.counts = std::move(a.counts);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace swarmalloc
