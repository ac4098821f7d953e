#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

// Direct majority-vote arithmetic used as an independent reference in tests.
// Everything here sums the binomial tail in log space and shares no code with
// the recurrences in the library.
namespace testref {

inline double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(double(n + 1)) - std::lgamma(double(k + 1)) -
         std::lgamma(double(n - k + 1));
}

// P(majority of n voters is right), each voter right with probability p;
// an exact tie counts half.
inline double majority_direct(double p, std::int64_t n) {
  if (p >= 1.0) return 1.0;
  std::vector<double> terms;
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  for (std::int64_t k = n / 2 + 1; k <= n; ++k)
    terms.push_back(log_choose(n, k) + double(k) * lp + double(n - k) * lq);
  if (n % 2 == 0)
    terms.push_back(std::log(0.5) + log_choose(n, n / 2) +
                    double(n / 2) * (lp + lq));
  const double m = *std::max_element(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return std::exp(m) * s;
}

// Absolute improvement from adding the k-th voter pair, in closed form.
inline double pair_gain_direct(double p, std::int64_t k) {
  if (p >= 1.0 || p <= 0.5) return 0.0;
  return std::exp(log_choose(2 * k - 1, k - 1) + std::log(2.0 * p - 1.0) +
                  double(k) * std::log(p * (1.0 - p)));
}

// Relative improvement from adding the k-th voter pair.
inline double pair_delta_direct(double p, std::int64_t k) {
  return pair_gain_direct(p, k) / majority_direct(p, 2 * k - 1);
}

}  // namespace testref
