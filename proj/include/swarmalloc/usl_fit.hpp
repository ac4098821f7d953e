#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

namespace swarmalloc {

struct FitPoint {
  double n = 1.0;
  double y = 0.0;
};

struct FitResult {
  double alpha = 0.0;
  double beta = 0.0;
  double k = 1.0;
  double rmse = 0.0;
  int n_points = 0;
  bool converged = false;
  int iterations = 0;
};

namespace detail {

struct UslParts {
  double g;   // model value divided by k
  double da;  // d(g)/d(alpha)
  double db;  // d(g)/d(beta)
};

inline UslParts usl_parts(double alpha, double beta, double n) {
  const double den = 1.0 + alpha * (n - 1.0) + beta * n * (n - 1.0);
  const double g = n / den;
  const double q = n * (n - 1.0) / (den * den);
  return {g, -q, -n * q};
}

inline bool solve3(std::array<std::array<double, 3>, 3> m, std::array<double, 3>& rhs) {
  for (int col = 0; col < 3; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[pivot][col])) pivot = r;
    if (std::fabs(m[pivot][col]) < 1e-300) return false;
    std::swap(m[col], m[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 3; ++c) m[r][c] -= f * m[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (int i = 0; i < 3; ++i) rhs[i] /= m[i][i];
  return true;
}

struct LmState {
  double alpha, beta, k;
  double ssr = 0.0;
  bool converged = false;
  int iterations = 0;
};

inline double usl_ssr(const std::vector<FitPoint>& pts, double a, double b, double k) {
  double ssr = 0.0;
  for (const auto& pt : pts) {
    const double r = k * usl_parts(a, b, pt.n).g - pt.y;
    ssr += r * r;
  }
  return ssr;
}

/// Damped least squares from one start, with the parameters kept inside
/// alpha >= 0, beta >= 0, k > 0 by clamping. Convergence is declared when the
/// gradient, projected onto the feasible directions, is negligible against
/// the loss.
inline LmState lm_fit(const std::vector<FitPoint>& pts, double a, double b, double k) {
  constexpr int kMaxIter = 500;
  constexpr double kMinScale = 1e-12;
  LmState st{a, b, k};
  st.ssr = usl_ssr(pts, a, b, k);
  double mu = 1e-3;

  for (int iter = 1; iter <= kMaxIter; ++iter) {
    st.iterations = iter;
    std::array<std::array<double, 3>, 3> jtj{};
    std::array<double, 3> jtr{};
    for (const auto& pt : pts) {
      const UslParts u = usl_parts(st.alpha, st.beta, pt.n);
      const double r = st.k * u.g - pt.y;
      const std::array<double, 3> row{st.k * u.da, st.k * u.db, u.g};
      for (int i = 0; i < 3; ++i) {
        jtr[i] += row[i] * r;
        for (int j = 0; j < 3; ++j) jtj[i][j] += row[i] * row[j];
      }
    }

    // Projected gradient: drop components that push outside the bounds.
    std::array<double, 3> grad{2.0 * jtr[0], 2.0 * jtr[1], 2.0 * jtr[2]};
    if (st.alpha <= 0.0 && grad[0] > 0.0) grad[0] = 0.0;
    if (st.beta <= 0.0 && grad[1] > 0.0) grad[1] = 0.0;
    if (st.k <= kMinScale && grad[2] > 0.0) grad[2] = 0.0;
    const double gnorm =
        std::sqrt(grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2]);
    if (gnorm <= 1e-8 * (1.0 + st.ssr)) {
      st.converged = true;
      return st;
    }

    bool stepped = false;
    while (mu <= 1e14) {
      auto m = jtj;
      for (int i = 0; i < 3; ++i) m[i][i] += mu * std::max(jtj[i][i], 1e-12);
      std::array<double, 3> delta{-jtr[0], -jtr[1], -jtr[2]};
      if (solve3(m, delta)) {
        const double a2 = std::max(0.0, st.alpha + delta[0]);
        const double b2 = std::max(0.0, st.beta + delta[1]);
        const double k2 = std::max(kMinScale, st.k + delta[2]);
        const double ssr2 = usl_ssr(pts, a2, b2, k2);
        if (ssr2 < st.ssr) {
          st.alpha = a2;
          st.beta = b2;
          st.k = k2;
          st.ssr = ssr2;
          mu = std::max(mu / 3.0, 1e-12);
          stepped = true;
          break;
        }
      }
      mu *= 2.0;
    }
    if (!stepped) return st;  // no downhill step left at any damping
  }
  return st;
}

}  // namespace detail

inline double rmse(const std::vector<FitPoint>& pts, const FitResult& fit) {
  if (pts.empty()) throw std::domain_error("rmse needs at least one point");
  return std::sqrt(detail::usl_ssr(pts, fit.alpha, fit.beta, fit.k) /
                   double(pts.size()));
}

/// Least-squares retrograde curve fit with a deterministic multi-start grid.
/// Needs at least four distinct group sizes; returns the best start by final
/// sum of squares.
inline FitResult fit_usl(const std::vector<FitPoint>& pts) {
  std::set<double> sizes;
  for (const auto& pt : pts) {
    if (!(pt.n >= 1.0)) throw std::domain_error("fit points need n >= 1");
    if (!std::isfinite(pt.y)) throw std::domain_error("fit points must be finite");
    sizes.insert(pt.n);
  }
  if (sizes.size() < 4)
    throw std::domain_error("fit needs at least 4 distinct group sizes");

  constexpr std::array<double, 5> kAlpha0 = {1e-3, 5.623e-3, 3.162e-2, 1.778e-1, 1.0};
  constexpr std::array<double, 5> kBeta0 = {1e-5, 5.623e-5, 3.162e-4, 1.778e-3, 1e-2};

  detail::LmState best{};
  bool have = false;
  for (double a0 : kAlpha0) {
    for (double b0 : kBeta0) {
      // Conditionally optimal scale for the start.
      double num = 0.0, den = 0.0;
      for (const auto& pt : pts) {
        const double g = detail::usl_parts(a0, b0, pt.n).g;
        num += g * pt.y;
        den += g * g;
      }
      const double k0 = std::max(1e-9, den > 0.0 ? num / den : 1.0);
      detail::LmState st = detail::lm_fit(pts, a0, b0, k0);
      if (!have || st.ssr < best.ssr) {
        best = st;
        have = true;
      }
    }
  }

  FitResult out;
  out.alpha = best.alpha;
  out.beta = best.beta;
  out.k = best.k;
  out.rmse = std::sqrt(best.ssr / double(pts.size()));
  out.n_points = int(pts.size());
  out.converged = best.converged;
  out.iterations = best.iterations;
  return out;
}

}  // namespace swarmalloc
