#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>

#include "mfg/brownian.hpp"
#include "mfg/model_lq.hpp"
#include "mfg/particles.hpp"

// Compares the OpenMP kernels against the serial reference implementations
// and verifies they agree bit for bit.

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int i = 0; i < reps; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, seconds_since(t0));
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  int n = 4000, steps = 500;
  if (argc > 1) n = std::atoi(argv[1]);
  if (argc > 2) steps = std::atoi(argv[2]);
  const mfg::ModelParams p = mfg::baseline_params();
  const mfg::LqModel model(p);
  const mfg::TimeGrid grid = mfg::TimeGrid::uniform(p.T, steps);

  std::printf("threads: %d,  n = %d,  steps = %d\n", omp_get_max_threads(), n, steps);

  mfg::BrownianBundle bundle_omp, bundle_ref;
  const double t_bundle_omp = time_best_of(3, [&] { bundle_omp = mfg::make_bundle(7, 0, grid, n); });
  const double t_bundle_ref =
      time_best_of(3, [&] { bundle_ref = mfg::ref::make_bundle(7, 0, grid, n); });
  const bool bundle_same =
      bundle_omp.idio == bundle_ref.idio && bundle_omp.common == bundle_ref.common;

  mfg::ParticlePaths nash_omp, nash_ref;
  const double t_nash_omp =
      time_best_of(3, [&] { nash_omp = mfg::simulate_nash(model, n, bundle_omp); });
  const double t_nash_ref =
      time_best_of(3, [&] { nash_ref = mfg::ref::simulate_nash(model, n, bundle_ref); });
  const bool nash_same = nash_omp.states == nash_ref.states;

  const double work = static_cast<double>(n) * steps;
  std::printf("bundle   omp %8.1f ns/draw   ref %8.1f ns/draw   speedup %.2fx   %s\n",
              1e9 * t_bundle_omp / work, 1e9 * t_bundle_ref / work, t_bundle_ref / t_bundle_omp,
              bundle_same ? "bit-identical" : "MISMATCH");
  std::printf("nash     omp %8.1f ns/step   ref %8.1f ns/step   speedup %.2fx   %s\n",
              1e9 * t_nash_omp / work, 1e9 * t_nash_ref / work, t_nash_ref / t_nash_omp,
              nash_same ? "bit-identical" : "MISMATCH");
  return bundle_same && nash_same ? 0 : 1;
}
