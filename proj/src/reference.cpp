#include <cmath>
#include <stdexcept>

#include "mfg/particles.hpp"
#include "mfg/rng.hpp"
#include "mfg/summation.hpp"

// Serial reference kernels. Plain loops, no pragmas; arithmetic matches the
// parallel kernels expression for expression so results are bit-identical.

namespace mfg::ref {

namespace {

ParticlePaths make_paths_serial(const LqModel& model, int n, const BrownianBundle& bundle,
                                SystemTag tag) {
  const double T = model.params().T;
  if (std::fabs(bundle.dt * bundle.n_steps - T) > 1e-9)
    throw std::invalid_argument("bundle grid does not span [0, T]");
  if (n < 1 || n > bundle.n_particles) throw std::invalid_argument("simulate: bad n");
  ParticlePaths P;
  P.grid = TimeGrid::uniform(T, bundle.n_steps);
  P.n_particles = n;
  P.tag = tag;
  P.seed_record = bundle.seed_record;
  P.states.resize(static_cast<std::size_t>(P.grid.n_steps + 1) * n);
  const std::uint64_t key = rng::stream_key(bundle.seed_record.base_seed,
                                            bundle.seed_record.replication_id);
  for (int i = 0; i < n; ++i) {
    P.states[i] = model.params().mu0.sample(
        rng::uniform_draw(key, static_cast<std::uint64_t>(i), rng::Stream::init, 0));
  }
  return P;
}

void sweep_serial(ParticlePaths& P, const BrownianBundle& b, const std::vector<double>& rates,
                  const double* mu_override, double sigma, double sigma0) {
  const int n = P.n_particles;
  const double dt = P.grid.dt();
  for (int j = 0; j < P.grid.n_steps; ++j) {
    const double* x = P.row(j);
    double* y = P.row(j + 1);
    const double m = mu_override ? mu_override[j] : pairwise_mean(x, n);
    const double r = rates[j];
    const double sdW = sigma0 * b.common[j];
    const double* dB = b.idio.data() + static_cast<std::size_t>(j) * b.n_particles;
    for (int i = 0; i < n; ++i) {
      y[i] = x[i] + r * (m - x[i]) * dt + sigma * dB[i] + sdW;
    }
  }
  P.check_finite();
}

}  // namespace

ParticlePaths simulate_nash(const LqModel& model, int n, const BrownianBundle& bundle) {
  ParticlePaths P = make_paths_serial(model, n, bundle, SystemTag::nash);
  std::vector<double> rates(P.grid.n_steps);
  for (int j = 0; j < P.grid.n_steps; ++j) rates[j] = model.rate_nash(P.grid.times[j], n);
  sweep_serial(P, bundle, rates, nullptr, model.params().sigma, model.params().sigma0);
  return P;
}

ParticlePaths simulate_mkv_proxy(const LqModel& model, int n, const BrownianBundle& bundle) {
  ParticlePaths P = make_paths_serial(model, n, bundle, SystemTag::mkv);
  std::vector<double> rates(P.grid.n_steps);
  for (int j = 0; j < P.grid.n_steps; ++j) rates[j] = model.rate_mkv(P.grid.times[j]);
  sweep_serial(P, bundle, rates, nullptr, model.params().sigma, model.params().sigma0);
  return P;
}

ParticlePaths simulate_hat(const LqModel& model, int n, const BrownianBundle& bundle,
                           std::span<const double> w_path) {
  if (static_cast<int>(w_path.size()) != bundle.n_steps + 1)
    throw std::invalid_argument("simulate_hat: w_path must have n_steps + 1 values");
  ParticlePaths P = make_paths_serial(model, n, bundle, SystemTag::hat);
  std::vector<double> rates(P.grid.n_steps), target(P.grid.n_steps);
  for (int j = 0; j < P.grid.n_steps; ++j) {
    rates[j] = model.rate_mkv(P.grid.times[j]);
    target[j] = model.mu_bar(w_path[j]);
  }
  sweep_serial(P, bundle, rates, target.data(), model.params().sigma, model.params().sigma0);
  return P;
}

}  // namespace mfg::ref
