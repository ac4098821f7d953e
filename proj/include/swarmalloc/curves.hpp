#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace swarmalloc {

enum class CurveFamily { linear, saturating, retrograde };

/// Parametric speedup profile C(n): the expected performance of one task when
/// n agents work on it together.
///
///   linear       C(n) = n - lambda*(n-1)                      0 < lambda < 1
///   saturating   C(n) = majority-vote success probability of n voters, each
///                independently correct with probability p     0.5 <= p <= 1
///   retrograde   C(n) = k*n / (1 + alpha*(n-1) + beta*n*(n-1))
///                alpha >= beta >= 0, k > 0
///
/// All three have non-increasing relative gains (the retrograde family up to
/// its peak), which is what the greedy allocator relies on.
class ScalabilityCurve {
 public:
  static ScalabilityCurve linear(double lambda) {
    if (!(lambda > 0.0) || !(lambda < 1.0))
      throw std::domain_error("linear curve requires 0 < lambda < 1");
    return ScalabilityCurve(CurveFamily::linear, lambda, 0.0, 1.0);
  }

  static ScalabilityCurve saturating(double p) {
    if (!(p >= 0.5) || !(p <= 1.0))
      throw std::domain_error("saturating curve requires 0.5 <= p <= 1");
    return ScalabilityCurve(CurveFamily::saturating, p, 0.0, 1.0);
  }

  static ScalabilityCurve retrograde(double alpha, double beta, double scale = 1.0) {
    if (!(alpha >= 0.0)) throw std::domain_error("retrograde curve requires alpha >= 0");
    if (!(beta >= 0.0)) throw std::domain_error("retrograde curve requires beta >= 0");
    if (!(alpha >= beta))
      throw std::domain_error("retrograde curve requires alpha >= beta");
    if (!(scale > 0.0)) throw std::domain_error("retrograde curve requires k > 0");
    return ScalabilityCurve(CurveFamily::retrograde, alpha, beta, scale);
  }

  CurveFamily family() const { return family_; }

  double lambda() const { require(CurveFamily::linear); return a_; }
  double p() const { require(CurveFamily::saturating); return a_; }
  double alpha() const { require(CurveFamily::retrograde); return a_; }
  double beta() const { require(CurveFamily::retrograde); return b_; }
  double scale() const { require(CurveFamily::retrograde); return c_; }

  /// Agents consumed by one allocation unit. Saturating tasks only improve on
  /// odd group sizes, so they grow two agents at a time after the first.
  int unit_size() const { return family_ == CurveFamily::saturating ? 2 : 1; }

 private:
  ScalabilityCurve(CurveFamily f, double a, double b, double c)
      : family_(f), a_(a), b_(b), c_(c) {}

  void require(CurveFamily f) const {
    if (family_ != f) throw std::logic_error("curve family mismatch");
  }

  CurveFamily family_;
  double a_, b_, c_;
};

namespace detail {

inline void check_count(std::int64_t n) {
  if (n < 1) throw std::domain_error("group size must be >= 1");
}

inline double usl_denom(double alpha, double beta, double n) {
  return 1.0 + alpha * (n - 1.0) + beta * n * (n - 1.0);
}

/// Relative gain of the first committed pair of a saturating task.
inline double cjt_first_delta(double p) { return (2.0 * p - 1.0) * (1.0 - p); }

/// Relative gain of pair k_next given the relative gain of the previous pair.
inline double cjt_next_delta(double p, std::int64_t k_next, double delta_prev) {
  return 2.0 * (2.0 - 1.0 / double(k_next)) * p * (1.0 - p) * delta_prev /
         (1.0 + delta_prev);
}

}  // namespace detail

inline double evaluate(const ScalabilityCurve& d, std::int64_t n) {
  detail::check_count(n);
  switch (d.family()) {
    case CurveFamily::linear:
      return double(n) - d.lambda() * double(n - 1);
    case CurveFamily::saturating: {
      // Performance plateaus on even counts, so walk odd sizes pairwise.
      const double p = d.p();
      const std::int64_t pairs = (n + 1) / 2;
      double c = p;
      double delta = detail::cjt_first_delta(p);
      for (std::int64_t k = 1; k < pairs; ++k) {
        c *= 1.0 + delta;
        delta = detail::cjt_next_delta(p, k + 1, delta);
      }
      return c;
    }
    case CurveFamily::retrograde:
      return d.scale() * double(n) / detail::usl_denom(d.alpha(), d.beta(), double(n));
  }
  throw std::logic_error("unknown curve family");
}

/// C for every count 1..n_max, computed in one forward pass.
inline std::vector<double> evaluate_range(const ScalabilityCurve& d, std::int64_t n_max) {
  detail::check_count(n_max);
  std::vector<double> out;
  out.reserve(std::size_t(n_max));
  switch (d.family()) {
    case CurveFamily::linear:
      for (std::int64_t n = 1; n <= n_max; ++n)
        out.push_back(double(n) - d.lambda() * double(n - 1));
      break;
    case CurveFamily::saturating: {
      const double p = d.p();
      double c = p;
      double delta = detail::cjt_first_delta(p);
      std::int64_t k = 1;
      for (std::int64_t n = 1; n <= n_max; ++n) {
        out.push_back(c);
        if (n % 2 == 0) {
          c *= 1.0 + delta;
          delta = detail::cjt_next_delta(p, ++k, delta);
        }
      }
      break;
    }
    case CurveFamily::retrograde:
      for (std::int64_t n = 1; n <= n_max; ++n)
        out.push_back(d.scale() * double(n) /
                      detail::usl_denom(d.alpha(), d.beta(), double(n)));
      break;
  }
  return out;
}

/// Absolute improvement of committing unit number `step` after `step` units
/// are already in place: C at step+1 units minus C at step units, where one
/// unit is unit_size() agents (pairs for saturating tasks).
inline double absolute_gain(const ScalabilityCurve& d, std::int64_t step) {
  detail::check_count(step);
  switch (d.family()) {
    case CurveFamily::linear:
      return 1.0 - d.lambda();
    case CurveFamily::saturating: {
      const double p = d.p();
      double g = (2.0 * p - 1.0) * p * (1.0 - p);
      for (std::int64_t k = 2; k <= step; ++k)
        g *= 2.0 * (2.0 - 1.0 / double(k)) * p * (1.0 - p);
      return g;
    }
    case CurveFamily::retrograde:
      return evaluate(d, step + 1) - evaluate(d, step);
  }
  throw std::logic_error("unknown curve family");
}

/// Incremental tracker of the relative gain stream used by the allocator.
/// step_index counts committed units; a saturating task at step s holds
/// 2s - 1 agents, any other family holds s.
struct GainState {
  ScalabilityCurve curve;
  std::int64_t step_index;
  double current_delta;        // relative gain of committing the next unit
  double current_performance;  // C at the current step

  std::int64_t agents() const {
    return curve.family() == CurveFamily::saturating ? 2 * step_index - 1 : step_index;
  }
};

inline GainState marginal_gain_init(const ScalabilityCurve& d) {
  GainState s{d, 1, 0.0, evaluate(d, 1)};
  switch (d.family()) {
    case CurveFamily::linear:
      s.current_delta = 1.0 - d.lambda();
      break;
    case CurveFamily::saturating:
      s.current_delta = detail::cjt_first_delta(d.p());
      break;
    case CurveFamily::retrograde: {
      const double dn = detail::usl_denom(d.alpha(), d.beta(), 1.0);
      const double dn1 = detail::usl_denom(d.alpha(), d.beta(), 2.0);
      s.current_delta = 2.0 * dn / dn1 - 1.0;
      break;
    }
  }
  return s;
}

inline GainState marginal_gain_advance(const GainState& s) {
  GainState t = s;
  t.step_index = s.step_index + 1;
  t.current_performance = s.current_performance * (1.0 + s.current_delta);
  switch (s.curve.family()) {
    case CurveFamily::linear: {
      const double lam = s.curve.lambda();
      const double n = double(t.step_index);
      t.current_delta = (1.0 - lam) / (n * (1.0 - lam) + lam);
      break;
    }
    case CurveFamily::saturating:
      t.current_delta = detail::cjt_next_delta(s.curve.p(), t.step_index, s.current_delta);
      break;
    case CurveFamily::retrograde: {
      // Scale cancels, so the delta stream is invariant under k.
      const double n = double(t.step_index);
      const double dn = detail::usl_denom(s.curve.alpha(), s.curve.beta(), n);
      const double dn1 = detail::usl_denom(s.curve.alpha(), s.curve.beta(), n + 1.0);
      t.current_delta = (n + 1.0) * dn / (n * dn1) - 1.0;
      break;
    }
  }
  return t;
}

/// Group size maximizing a retrograde curve. Requires an interior peak
/// (beta > 0 and alpha < 1); ties resolve to the smaller size.
inline std::int64_t peak_group_size(const ScalabilityCurve& d) {
  if (d.family() != CurveFamily::retrograde)
    throw std::domain_error("peak group size is defined for retrograde curves only");
  const double alpha = d.alpha(), beta = d.beta();
  if (!(beta > 0.0) || !(alpha < 1.0))
    throw std::domain_error("retrograde curve has no interior peak");
  const double root = std::sqrt((1.0 - alpha) / beta);
  const std::int64_t lo = std::max<std::int64_t>(1, std::int64_t(std::floor(root)));
  return evaluate(d, lo + 1) > evaluate(d, lo) ? lo + 1 : lo;
}

}  // namespace swarmalloc
