#pragma once

// Test-only oracle: largest real eigenvalue of a small matrix from its
// characteristic polynomial, det(A - x I) expanded over all permutations.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace oracle {

inline double char_poly(const std::vector<std::vector<double>>& a, double x) {
  const std::size_t n = a.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double det = 0.0;
  do {
    int inversions = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (perm[i] > perm[j]) ++inversions;
    double term = inversions % 2 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) term *= a[i][perm[i]] - (i == perm[i] ? x : 0.0);
    det += term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return det;
}

/// Scans down from the max row sum (an upper bound on the Perron root) for
/// the first sign change, then bisects.
inline double largest_real_root(const std::vector<std::vector<double>>& a) {
  double hi = 0.0;
  for (const auto& row : a) hi = std::max(hi, std::accumulate(row.begin(), row.end(), 0.0));
  hi += 1.0;
  const double step = 1e-3;
  const double sign_hi = char_poly(a, hi) > 0 ? 1.0 : -1.0;
  double lo = hi;
  while (true) {
    lo = hi - step;
    if ((char_poly(a, lo) > 0 ? 1.0 : -1.0) != sign_hi) break;
    hi = lo;
    if (hi < -1.0) return NAN;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((char_poly(a, mid) > 0 ? 1.0 : -1.0) == sign_hi)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
