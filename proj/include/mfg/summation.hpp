#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

// Deterministic reductions. pairwise_sum uses a fixed halving recursion, so
// the result depends only on the operand order, never on thread count.

namespace mfg {

inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

inline double pairwise_mean(const double* x, std::size_t n) {
  return pairwise_sum(x, n) / static_cast<double>(n);
}

inline double pairwise_mean(const std::vector<double>& x) {
  return pairwise_mean(x.data(), x.size());
}

// Neumaier compensated summation; exact enough that summing a sorted array is
// permutation-invariant for our purposes.
struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + comp; }
};

inline double neumaier_sum(const double* x, std::size_t n) {
  Neumaier acc;
  for (std::size_t i = 0; i < n; ++i) acc.add(x[i]);
  return acc.value();
}

inline double neumaier_sum(const std::vector<double>& x) { return neumaier_sum(x.data(), x.size()); }

}  // namespace mfg
