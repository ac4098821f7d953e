#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "allocator.hpp"
#include "curves.hpp"
#include "sim.hpp"
#include "usl_fit.hpp"

namespace swarmalloc::io {

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form, so identical values always serialize to
/// identical bytes.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline TaskSet parse_taskset(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("tasks") || !j.at("tasks").is_array() ||
      j.at("tasks").empty())
    throw SchemaError("task set requires a non-empty tasks array");
  TaskSet ts;
  for (const auto& t : j.at("tasks")) {
    if (!t.is_object() || !t.contains("type") || !t.at("type").is_string())
      throw SchemaError("every task entry requires a string type");
    const std::string type = t.at("type").get<std::string>();
    const auto num = [&t](const char* key) {
      if (!t.contains(key) || !t.at(key).is_number())
        throw SchemaError(std::string("task field missing or not numeric: ") + key);
      return t.at(key).get<double>();
    };
    if (type == "linear") {
      ts.tasks.push_back(ScalabilityCurve::linear(num("lambda")));
    } else if (type == "cjt") {
      ts.tasks.push_back(ScalabilityCurve::saturating(num("p")));
    } else if (type == "usl") {
      const double k = t.contains("k") ? num("k") : 1.0;
      ts.tasks.push_back(ScalabilityCurve::retrograde(num("alpha"), num("beta"), k));
    } else {
      throw SchemaError("unknown task type: " + type);
    }
  }
  if (j.contains("epsilon")) {
    if (!j.at("epsilon").is_number())
      throw SchemaError("epsilon must be numeric");
    ts.epsilon = j.at("epsilon").get<double>();
  }
  return ts;
}

inline nlohmann::json taskset_to_json(const TaskSet& ts) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& d : ts.tasks) {
    nlohmann::json t;
    switch (d.family()) {
      case CurveFamily::linear:
        t["type"] = "linear";
        t["lambda"] = d.lambda();
        break;
      case CurveFamily::saturating:
        t["type"] = "cjt";
        t["p"] = d.p();
        break;
      case CurveFamily::retrograde:
        t["type"] = "usl";
        t["alpha"] = d.alpha();
        t["beta"] = d.beta();
        t["k"] = d.scale();
        break;
    }
    tasks.push_back(std::move(t));
  }
  return nlohmann::json{{"tasks", std::move(tasks)}, {"epsilon", ts.epsilon}};
}

inline nlohmann::json allocation_to_json(const Allocation& a) {
  nlohmann::json j;
  j["N"] = a.total_agents;
  j["counts"] = a.counts;
  j["idle"] = a.idle;
  j["performance"] = a.collective_performance;
  j["per_task"] = a.per_task_performance;
  if (a.scale_heterogeneous) j["scale_heterogeneous"] = true;
  return j;
}

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw std::domain_error("sweep produced no rows");
  const std::size_t T = rows.front().counts.size();
  std::string s = "N";
  for (std::size_t i = 1; i <= T; ++i) s += ",n_" + std::to_string(i);
  s += ",idle";
  for (std::size_t i = 1; i <= T; ++i) s += ",prop_" + std::to_string(i);
  s += ",performance\n";
  for (const auto& row : rows) {
    s += std::to_string(row.N);
    for (std::int64_t c : row.counts) s += "," + std::to_string(c);
    s += "," + std::to_string(row.idle);
    for (double p : row.proportions) s += "," + format_double(p);
    s += "," + format_double(row.performance) + "\n";
  }
  return s;
}

/// Per-task C(n) table for n = 1..n_max.
inline std::string curves_to_csv(const TaskSet& ts, std::int64_t n_max) {
  validate_taskset(ts);
  if (n_max < 1) throw std::domain_error("curve table needs n_max >= 1");
  std::vector<std::vector<double>> cols;
  cols.reserve(ts.tasks.size());
  for (const auto& d : ts.tasks) cols.push_back(evaluate_range(d, n_max));
  std::string s = "n";
  for (std::size_t i = 1; i <= ts.tasks.size(); ++i) s += ",task_" + std::to_string(i);
  s += "\n";
  for (std::int64_t n = 1; n <= n_max; ++n) {
    s += std::to_string(n);
    for (const auto& col : cols) s += "," + format_double(col[std::size_t(n - 1)]);
    s += "\n";
  }
  return s;
}

inline std::string sim_csv_header() {
  return "geometry,f,controller,interference,n,rep,seed,decision,correct,steps,"
         "individual_correct_count,individual_total\n";
}

inline std::string sim_csv_row(const sim::SimRun& run, int rep) {
  std::string s;
  s += sim::geometry_name(run.geometry);
  s += "," + format_double(run.f);
  s += ",";
  s += sim::controller_name(run.controller);
  s += std::string(",") + (run.interference ? "1" : "0");
  s += "," + std::to_string(run.n);
  s += "," + std::to_string(rep);
  s += "," + std::to_string(run.rng_seed);
  s += "," + std::to_string(run.outcome.decision);
  s += std::string(",") + (run.outcome.correct ? "1" : "0");
  s += "," + std::to_string(run.outcome.steps);
  s += "," + std::to_string(run.outcome.individual_correct);
  s += "," + std::to_string(run.n);
  s += "\n";
  return s;
}

inline nlohmann::json fit_to_json(const FitResult& fit) {
  return nlohmann::json{{"alpha", fit.alpha},     {"beta", fit.beta},
                        {"k", fit.k},             {"rmse", fit.rmse},
                        {"n_points", fit.n_points}, {"converged", fit.converged},
                        {"iterations", fit.iterations}};
}

/// Two-column n,performance table; a non-numeric first line is treated as a
/// header and skipped.
inline std::vector<FitPoint> parse_fit_csv(std::istream& in) {
  std::vector<FitPoint> pts;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw SchemaError("fit input rows need two comma separated columns");
    const std::string a = line.substr(0, comma);
    const std::string b = line.substr(comma + 1);
    double n = 0.0, y = 0.0;
    const auto ra = std::from_chars(a.data(), a.data() + a.size(), n);
    const auto rb = std::from_chars(b.data(), b.data() + b.size(), y);
    const bool ok = ra.ec == std::errc() && ra.ptr == a.data() + a.size() &&
                    rb.ec == std::errc() && rb.ptr == b.data() + b.size();
    if (!ok) {
      if (first) {
        first = false;
        continue;  // header row
      }
      throw SchemaError("fit input row is not numeric: " + line);
    }
    first = false;
    pts.push_back({n, y});
  }
  if (pts.empty()) throw SchemaError("fit input contains no data rows");
  return pts;
}

inline sim::Geometry parse_geometry(const std::string& name) {
  if (name == "checkerboard") return sim::Geometry::checkerboard;
  if (name == "striped") return sim::Geometry::striped;
  if (name == "four_rectangles") return sim::Geometry::four_rectangles;
  if (name == "halved") return sim::Geometry::halved;
  throw SchemaError("unknown geometry: " + name);
}

inline sim::Controller parse_controller(const std::string& name) {
  if (name == "centralized") return sim::Controller::centralized;
  if (name == "decentralized") return sim::Controller::decentralized;
  if (name == "iterative") return sim::Controller::iterative;
  throw SchemaError("unknown controller: " + name);
}

struct SimConfig {
  sim::Geometry geometry = sim::Geometry::checkerboard;
  double f = 0.55;
  sim::Controller controller = sim::Controller::centralized;
  std::vector<int> n_list = {1};
  int repetitions = 1;
  bool interference = false;
  bool has_seed = false;
  std::uint64_t master_seed = 0;
  std::int64_t max_timesteps = 50000;
  sim::MotionParams motion;
};

inline SimConfig parse_sim_config(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("simulation config must be an object");
  SimConfig cfg;
  const auto num = [&j](const char* key, double fallback, bool* present = nullptr) {
    if (!j.contains(key)) {
      if (present) *present = false;
      return fallback;
    }
    if (!j.at(key).is_number())
      throw SchemaError(std::string("config field must be numeric: ") + key);
    if (present) *present = true;
    return j.at(key).get<double>();
  };
  if (j.contains("geometry")) {
    if (!j.at("geometry").is_string()) throw SchemaError("geometry must be a string");
    cfg.geometry = parse_geometry(j.at("geometry").get<std::string>());
  }
  if (j.contains("controller")) {
    if (!j.at("controller").is_string())
      throw SchemaError("controller must be a string");
    cfg.controller = parse_controller(j.at("controller").get<std::string>());
  }
  cfg.f = num("f", cfg.f);
  if (j.contains("n_list")) {
    if (!j.at("n_list").is_array() || j.at("n_list").empty())
      throw SchemaError("n_list must be a non-empty array");
    cfg.n_list.clear();
    for (const auto& v : j.at("n_list")) {
      if (!v.is_number_integer()) throw SchemaError("n_list entries must be integers");
      cfg.n_list.push_back(v.get<int>());
    }
  } else if (j.contains("n")) {
    if (!j.at("n").is_number_integer()) throw SchemaError("n must be an integer");
    cfg.n_list = {j.at("n").get<int>()};
  }
  cfg.repetitions = int(num("repetitions", double(cfg.repetitions)));
  if (j.contains("interference")) {
    if (!j.at("interference").is_boolean())
      throw SchemaError("interference must be a boolean");
    cfg.interference = j.at("interference").get<bool>();
  }
  if (j.contains("master_seed")) {
    if (!j.at("master_seed").is_number_integer())
      throw SchemaError("master_seed must be an integer");
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    cfg.has_seed = true;
  }
  cfg.max_timesteps = std::int64_t(num("max_timesteps", double(cfg.max_timesteps)));
  if (j.contains("motion")) {
    const auto& m = j.at("motion");
    if (!m.is_object()) throw SchemaError("motion must be an object");
    const auto mnum = [&m](const char* key, double fallback) {
      if (!m.contains(key)) return fallback;
      if (!m.at(key).is_number())
        throw SchemaError(std::string("motion field must be numeric: ") + key);
      return m.at(key).get<double>();
    };
    auto& mp = cfg.motion;
    mp.speed = mnum("speed", mp.speed);
    mp.turn_rate_deg = mnum("turn_rate_deg", mp.turn_rate_deg);
    mp.detect_range = mnum("detect_range", mp.detect_range);
    mp.comm_range = mnum("comm_range", mp.comm_range);
    mp.sample_gap = mnum("sample_gap", mp.sample_gap);
    mp.heading_jitter_deg = mnum("heading_jitter_deg", mp.heading_jitter_deg);
    mp.robot_radius = mnum("robot_radius", mp.robot_radius);
    mp.min_separation = mnum("min_separation", mp.min_separation);
    mp.explore_min = std::int64_t(mnum("explore_min", double(mp.explore_min)));
    mp.explore_max = std::int64_t(mnum("explore_max", double(mp.explore_max)));
    mp.round_period = std::int64_t(mnum("round_period", double(mp.round_period)));
  }
  return cfg;
}

}  // namespace swarmalloc::io
