#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace mfg {

// Uniform time grid on [0, T] with n_steps intervals.
struct TimeGrid {
  double T = 0.0;
  int n_steps = 0;
  std::vector<double> times;  // n_steps + 1 points, times[0] = 0, times[n_steps] = T

  static TimeGrid uniform(double T, int n_steps) {
    if (!(T > 0.0) || n_steps < 1) throw std::invalid_argument("TimeGrid: need T > 0 and n_steps >= 1");
    TimeGrid g;
    g.T = T;
    g.n_steps = n_steps;
    g.times.resize(n_steps + 1);
    const double dt = T / n_steps;
    for (int i = 0; i <= n_steps; ++i) g.times[i] = i * dt;
    g.times[n_steps] = T;
    return g;
  }

  double dt() const { return T / n_steps; }

  // Index of a grid time, or -1 if t is not on the grid (1e-9 absolute).
  int index_of(double t) const {
    const double u = t / dt();
    const int i = static_cast<int>(std::llround(u));
    if (i < 0 || i > n_steps) return -1;
    if (std::fabs(times[static_cast<std::size_t>(i)] - t) > 1e-9) return -1;
    return i;
  }

  // Spacing uniformity check for grids not built by uniform().
  void validate() const {
    if (static_cast<int>(times.size()) != n_steps + 1) throw std::invalid_argument("TimeGrid: size mismatch");
    const double h = dt();
    for (int i = 0; i <= n_steps; ++i) {
      if (std::fabs(times[static_cast<std::size_t>(i)] - i * h) > 1e-14 * T)
        throw std::invalid_argument("TimeGrid: spacing is not uniform");
    }
  }
};

}  // namespace mfg
