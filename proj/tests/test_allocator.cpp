#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <vector>

#include <swarmalloc/allocator.hpp>
#include <swarmalloc/curves.hpp>
#include <swarmalloc/rng.hpp>

using swarmalloc::Allocation;
using swarmalloc::CurveFamily;
using swarmalloc::ScalabilityCurve;
using swarmalloc::TaskSet;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

TaskSet cjt_tasks(std::initializer_list<double> ps, double epsilon = 0.0) {
  TaskSet ts;
  for (double p : ps) ts.tasks.push_back(ScalabilityCurve::saturating(p));
  ts.epsilon = epsilon;
  return ts;
}

TaskSet linear_tasks(std::initializer_list<double> lambdas, double epsilon = 0.0) {
  TaskSet ts;
  for (double l : lambdas) ts.tasks.push_back(ScalabilityCurve::linear(l));
  ts.epsilon = epsilon;
  return ts;
}

TaskSet six_retrograde() {
  TaskSet ts;
  ts.tasks.push_back(ScalabilityCurve::retrograde(0.005, 0.0002));
  ts.tasks.push_back(ScalabilityCurve::retrograde(0.02, 0.0003));
  ts.tasks.push_back(ScalabilityCurve::retrograde(0.005, 0.0001));
  ts.tasks.push_back(ScalabilityCurve::retrograde(0.03, 0.0005));
  ts.tasks.push_back(ScalabilityCurve::retrograde(0.004, 0.0013));
  ts.tasks.push_back(ScalabilityCurve::retrograde(0.05, 0.002));
  return ts;
}

TaskSet random_taskset(swarmalloc::Rng& rng, int T, bool mixed_eps) {
  TaskSet ts;
  for (int i = 0; i < T; ++i) {
    switch (rng.uniform_int(0, 2)) {
      case 0:
        ts.tasks.push_back(ScalabilityCurve::linear(rng.uniform(0.05, 0.95)));
        break;
      case 1:
        ts.tasks.push_back(ScalabilityCurve::saturating(rng.uniform(0.505, 0.995)));
        break;
      default: {
        const double beta = rng.uniform(0.0, 0.3);
        const double alpha = beta + rng.uniform(0.0, 0.7);
        ts.tasks.push_back(
            ScalabilityCurve::retrograde(alpha, beta, rng.uniform(0.2, 3.0)));
        break;
      }
    }
  }
  ts.epsilon = mixed_eps ? rng.uniform(0.005, 0.25) : 0.0;
  return ts;
}

void check_against_oracle(std::int64_t N, const TaskSet& ts) {
  const Allocation greedy = swarmalloc::allocate(N, ts);
  const auto exhaustive = swarmalloc::brute_force(N, ts);
  INFO("N=" << N << " T=" << ts.tasks.size() << " eps=" << ts.epsilon);
  CHECK_THAT(greedy.collective_performance,
             WithinRel(exhaustive.best.collective_performance, 1e-12));
}

}  // namespace

TEST_CASE("two equal saturating tasks split an even swarm evenly") {
  const TaskSet ts = cjt_tasks({0.8069, 0.8069});
  const Allocation a = swarmalloc::allocate(30, ts);
  REQUIRE(a.counts.size() == 2);
  CHECK(a.counts[0] == 15);
  CHECK(a.counts[1] == 15);
  CHECK(a.idle == 0);
  const auto exhaustive = swarmalloc::brute_force(30, ts);
  CHECK_THAT(a.collective_performance,
             WithinRel(exhaustive.best.collective_performance, 1e-12));
}

TEST_CASE("three-task saturating instance has exactly three tied optima") {
  const TaskSet ts = cjt_tasks({0.5361, 0.7454, 0.8069});
  const auto exhaustive = swarmalloc::brute_force(30, ts);
  CHECK(exhaustive.tie_set.size() == 3);
  for (const auto& counts : exhaustive.tie_set) {
    std::int64_t used = 0;
    for (std::int64_t c : counts) used += c;
    CHECK(used == 30);  // the tied optima all keep every agent busy
  }
  const Allocation greedy = swarmalloc::allocate(30, ts);
  CHECK_THAT(greedy.collective_performance,
             WithinRel(exhaustive.best.collective_performance, 1e-12));
  const bool greedy_in_ties =
      std::find(exhaustive.tie_set.begin(), exhaustive.tie_set.end(),
                greedy.counts) != exhaustive.tie_set.end();
  CHECK(greedy_in_ties);
}

TEST_CASE("five linear tasks spread a small swarm almost evenly") {
  const TaskSet ts = linear_tasks({0.1, 0.3, 0.5, 0.7, 0.9});
  const Allocation a = swarmalloc::allocate(25, ts);
  REQUIRE(a.counts.size() == 5);
  CHECK(a.idle == 0);
  CHECK(a.counts[0] - a.counts[4] == 6);
  const auto minmax = std::minmax_element(a.counts.begin(), a.counts.end());
  CHECK(*minmax.second - *minmax.first <= 9);  // ceil(0.8 / (0.1 * 0.9))
  check_against_oracle(25, ts);
}

TEST_CASE("six retrograde tasks freeze at their peak sizes") {
  const TaskSet ts = six_retrograde();
  const std::vector<std::int64_t> peaks = {71, 57, 100, 44, 28, 22};
  for (std::size_t i = 0; i < peaks.size(); ++i)
    CHECK(swarmalloc::peak_group_size(ts.tasks[i]) == peaks[i]);

  const Allocation at321 = swarmalloc::allocate(321, ts);
  CHECK(at321.idle == 0);

  const Allocation at322 = swarmalloc::allocate(322, ts);
  CHECK(at322.idle == 0);
  CHECK(at322.counts == peaks);

  const Allocation at323 = swarmalloc::allocate(323, ts);
  CHECK(at323.idle == 1);
  CHECK(at323.counts == peaks);

  const Allocation at400 = swarmalloc::allocate(400, ts);
  CHECK(at400.idle == 78);
  CHECK(at400.counts == peaks);
  CHECK_THAT(at400.collective_performance,
             WithinRel(at322.collective_performance, 1e-12));

  const Allocation at100 = swarmalloc::allocate(100, ts);
  CHECK(at100.idle == 0);
}

TEST_CASE("pair gains outrank weaker single-agent chains") {
  // One saturating and one linear task where the pair is worth more than two
  // separate linear agents; a unit-by-unit argmax on raw deltas would pick
  // the wrong side.
  TaskSet ts;
  ts.tasks.push_back(ScalabilityCurve::saturating(0.88));
  ts.tasks.push_back(ScalabilityCurve::linear(0.92));
  const Allocation a = swarmalloc::allocate(4, ts);
  CHECK(a.counts == std::vector<std::int64_t>{1, 3});
  CHECK(a.scale_heterogeneous);
  check_against_oracle(4, ts);
}

TEST_CASE("a retrograde task cannot strand the last budget agent") {
  TaskSet ts;
  ts.tasks.push_back(ScalabilityCurve::retrograde(0.41, 0.2));
  ts.tasks.push_back(ScalabilityCurve::saturating(0.8));
  const Allocation a = swarmalloc::allocate(4, ts);
  CHECK(a.counts == std::vector<std::int64_t>{1, 3});
  CHECK_THAT(a.collective_performance, WithinRel(0.896, 1e-12));
  check_against_oracle(4, ts);
}

TEST_CASE("greedy matches exhaustive search on random task sets") {
  swarmalloc::Rng rng(0x5eedULL);
  for (int trial = 0; trial < 150; ++trial) {
    const int T = int(rng.uniform_int(1, 4));
    const std::int64_t N = rng.uniform_int(T, 18);
    const TaskSet ts = random_taskset(rng, T, false);
    check_against_oracle(N, ts);
  }
}

TEST_CASE("greedy matches exhaustive search with a nonzero cutoff") {
  swarmalloc::Rng rng(0xeb5ULL);
  for (int trial = 0; trial < 60; ++trial) {
    const int T = int(rng.uniform_int(1, 4));
    const std::int64_t N = rng.uniform_int(T, 18);
    const TaskSet ts = random_taskset(rng, T, true);
    check_against_oracle(N, ts);
  }
}

TEST_CASE("allocations conserve agents and keep tasks manned") {
  swarmalloc::Rng rng(0xc0feULL);
  for (int trial = 0; trial < 120; ++trial) {
    const int T = int(rng.uniform_int(1, 6));
    const std::int64_t N = rng.uniform_int(T, 60);
    const TaskSet ts = random_taskset(rng, T, trial % 3 == 0);
    const Allocation a = swarmalloc::allocate(N, ts);
    std::int64_t used = 0;
    int even_saturating = 0;
    for (std::size_t i = 0; i < a.counts.size(); ++i) {
      CHECK(a.counts[i] >= 1);
      used += a.counts[i];
      if (ts.tasks[i].family() == CurveFamily::saturating && a.counts[i] % 2 == 0)
        ++even_saturating;
    }
    CHECK(used + a.idle == N);
    CHECK(a.idle >= 0);
    CHECK(even_saturating <= 1);  // at most the parked leftover agent
    CHECK_THAT(a.collective_performance,
               WithinRel(swarmalloc::collective_performance(ts, a.counts), 1e-12));
  }
}

TEST_CASE("saturating and linear task sets leave no one idle at zero cutoff") {
  swarmalloc::Rng rng(0x1d1eULL);
  for (int trial = 0; trial < 60; ++trial) {
    const int T = int(rng.uniform_int(1, 5));
    TaskSet ts;
    for (int i = 0; i < T; ++i) {
      if (rng.coin())
        ts.tasks.push_back(ScalabilityCurve::linear(rng.uniform(0.05, 0.95)));
      else
        ts.tasks.push_back(ScalabilityCurve::saturating(rng.uniform(0.505, 0.995)));
    }
    const std::int64_t N = rng.uniform_int(T, 50);
    const Allocation a = swarmalloc::allocate(N, ts);
    CHECK(a.idle == 0);
  }
}

TEST_CASE("retrograde idle appears exactly when every gain is exhausted") {
  const TaskSet ts = six_retrograde();
  for (std::int64_t N : {6L, 50L, 200L, 321L, 322L}) {
    CHECK(swarmalloc::allocate(N, ts).idle == 0);
  }
  for (std::int64_t N : {323L, 360L, 1000L}) {
    const Allocation a = swarmalloc::allocate(N, ts);
    CHECK(a.idle == N - 322);
  }
}

TEST_CASE("saturating-only performance never drops as pairs arrive") {
  const TaskSet ts = cjt_tasks({0.58, 0.71, 0.9});
  double prev = swarmalloc::allocate(3, ts).collective_performance;
  for (std::int64_t N = 5; N <= 61; N += 2) {
    const double cur = swarmalloc::allocate(N, ts).collective_performance;
    CHECK(cur >= prev - 1e-15);
    prev = cur;
  }
}

TEST_CASE("no single-agent move improves a returned allocation") {
  swarmalloc::Rng rng(0xabba5eedULL);
  for (int trial = 0; trial < 80; ++trial) {
    const int T = int(rng.uniform_int(2, 8));
    const std::int64_t N = rng.uniform_int(T, 40);
    const TaskSet ts = random_taskset(rng, T, trial % 4 == 0);
    const Allocation a = swarmalloc::allocate(N, ts);
    const double base = a.collective_performance;
    for (std::size_t i = 0; i < a.counts.size(); ++i) {
      for (std::size_t j = 0; j < a.counts.size(); ++j) {
        if (i == j || a.counts[i] <= 1) continue;
        auto moved = a.counts;
        moved[i] -= 1;
        moved[j] += 1;
        CHECK(swarmalloc::collective_performance(ts, moved) <=
              base * (1.0 + 1e-12));
      }
    }
    if (ts.epsilon == 0.0 && a.idle > 0) {
      for (std::size_t j = 0; j < a.counts.size(); ++j) {
        auto moved = a.counts;
        moved[j] += 1;
        CHECK(swarmalloc::collective_performance(ts, moved) <=
              base * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("allocation is deterministic") {
  swarmalloc::Rng rng(0xdeafULL);
  const TaskSet ts = random_taskset(rng, 5, true);
  const Allocation a = swarmalloc::allocate(33, ts);
  const Allocation b = swarmalloc::allocate(33, ts);
  CHECK(a.counts == b.counts);
  CHECK(a.idle == b.idle);
  CHECK(a.collective_performance == b.collective_performance);
  CHECK(a.per_task_performance == b.per_task_performance);
}

TEST_CASE("collective performance validates its inputs") {
  const TaskSet ts = cjt_tasks({0.6, 0.6});
  CHECK_THAT(swarmalloc::collective_performance(ts, {1, 1}), WithinAbs(0.36, 1e-15));
  CHECK_THAT(swarmalloc::collective_performance(ts, {3, 3}),
             WithinAbs(0.419904, 1e-12));
  CHECK_THROWS_AS(swarmalloc::collective_performance(ts, {1}), std::domain_error);
  CHECK_THROWS_AS(swarmalloc::collective_performance(ts, {1, 0}), std::domain_error);
  TaskSet chance = cjt_tasks({0.5, 0.9});
  const double v = swarmalloc::collective_performance(chance, {1, 1});
  CHECK_THAT(v, WithinAbs(0.45, 1e-15));
}

TEST_CASE("allocate validates preconditions") {
  const TaskSet ts = cjt_tasks({0.7, 0.7});
  CHECK_THROWS_AS(swarmalloc::allocate(1, ts), std::domain_error);
  TaskSet empty;
  CHECK_THROWS_AS(swarmalloc::allocate(5, empty), std::domain_error);
  TaskSet bad = cjt_tasks({0.7});
  bad.epsilon = -0.5;
  CHECK_THROWS_AS(swarmalloc::allocate(5, bad), std::domain_error);
}

TEST_CASE("partition counting is exact") {
  CHECK(swarmalloc::count_partitions(5, 2) == 4);
  CHECK(swarmalloc::count_partitions(17, 1) == 1);
  CHECK(swarmalloc::count_partitions(17, 17) == 1);
  CHECK(swarmalloc::count_partitions(10, 3) == 36);
  CHECK(swarmalloc::count_partitions(67, 34) == 7219428434016265740ULL);
  CHECK_THROWS_AS(swarmalloc::count_partitions(300, 150), std::overflow_error);
  CHECK_THROWS_AS(swarmalloc::count_partitions(3, 4), std::domain_error);
  CHECK_THROWS_AS(swarmalloc::count_partitions(3, 0), std::domain_error);
}

TEST_CASE("exhaustive search refuses oversized instances") {
  const TaskSet ts = cjt_tasks({0.6, 0.7, 0.8});
  CHECK_THROWS_AS(swarmalloc::brute_force(20, ts, 2),
                  swarmalloc::CapExceededError);
  CHECK_NOTHROW(swarmalloc::brute_force(20, ts, 200));
}

TEST_CASE("one agent per task is the unique minimal allocation") {
  const TaskSet ts = cjt_tasks({0.55, 0.66, 0.77});
  const auto exhaustive = swarmalloc::brute_force(3, ts);
  REQUIRE(exhaustive.tie_set.size() == 1);
  CHECK(exhaustive.best.counts == std::vector<std::int64_t>{1, 1, 1});
  CHECK(exhaustive.best.idle == 0);
}

TEST_CASE("gain advances stay within the agent budget") {
  TaskSet ts;
  swarmalloc::Rng rng(0xfeedULL);
  for (int i = 0; i < 50; ++i)
    ts.tasks.push_back(ScalabilityCurve::saturating(rng.uniform(0.51, 0.99)));
  swarmalloc::AllocStats stats;
  const Allocation a = swarmalloc::allocate(20000, ts, stats);
  CHECK(stats.gain_advances <= 20000);
  CHECK(a.idle == 0);
  std::int64_t used = 0;
  for (std::int64_t c : a.counts) used += c;
  CHECK(used == 20000);
}

TEST_CASE("sweep emits one row per requested swarm size") {
  const TaskSet ts = linear_tasks({0.5});
  const auto rows = swarmalloc::sweep(ts, 3, 10, 3);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].N == 3);
  CHECK(rows[1].N == 6);
  CHECK(rows[2].N == 9);
  for (const auto& row : rows) {
    REQUIRE(row.proportions.size() == 1);
    CHECK(row.proportions[0] == 1.0);
    CHECK(row.idle == 0);
    CHECK_THAT(row.performance,
               WithinRel(double(row.N) - 0.5 * double(row.N - 1), 1e-14));
  }
  CHECK_THROWS_AS(swarmalloc::sweep(ts, 0, 5), std::domain_error);
  CHECK_THROWS_AS(swarmalloc::sweep(ts, 5, 4), std::domain_error);
  CHECK_THROWS_AS(swarmalloc::sweep(ts, 2, 8, 0), std::domain_error);
}

TEST_CASE("linear proportions flatten toward uniformity as N grows") {
  const TaskSet ts = linear_tasks({0.1, 0.3, 0.5, 0.7, 0.9});
  const Allocation small = swarmalloc::allocate(25, ts);
  const Allocation large = swarmalloc::allocate(2000, ts);
  const double spread_small =
      double(small.counts.front() - small.counts.back()) / 25.0;
  const double spread_large =
      double(large.counts.front() - large.counts.back()) / 2000.0;
  CHECK(large.counts.front() - large.counts.back() <= 9);
  CHECK(large.counts.front() - large.counts.back() >= 7);
  CHECK(spread_large < spread_small);
}

TEST_CASE("family mix is reported") {
  CHECK_FALSE(swarmalloc::allocate(10, cjt_tasks({0.6, 0.7})).scale_heterogeneous);
  TaskSet mixed;
  mixed.tasks.push_back(ScalabilityCurve::linear(0.5));
  mixed.tasks.push_back(ScalabilityCurve::retrograde(0.1, 0.01));
  CHECK(swarmalloc::allocate(10, mixed).scale_heterogeneous);
}
