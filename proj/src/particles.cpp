#include "mfg/particles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "mfg/rng.hpp"
#include "mfg/summation.hpp"

namespace mfg {

namespace {

double pow_int(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

TimeGrid grid_of(const LqModel& model, const BrownianBundle& bundle) {
  const double T = model.params().T;
  if (std::fabs(bundle.dt * bundle.n_steps - T) > 1e-9)
    throw std::invalid_argument("bundle grid does not span [0, T]");
  return TimeGrid::uniform(T, bundle.n_steps);
}

ParticlePaths make_paths(const LqModel& model, int n, const BrownianBundle& bundle, SystemTag tag) {
  if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  if (n > bundle.n_particles) throw std::invalid_argument("simulate: bundle has too few particles");
  ParticlePaths P;
  P.grid = grid_of(model, bundle);
  P.n_particles = n;
  P.tag = tag;
  P.seed_record = bundle.seed_record;
  P.states.resize(static_cast<std::size_t>(P.grid.n_steps + 1) * n);
  const auto x0 = draw_initial_states(model.params().mu0, bundle.seed_record, n);
  std::copy(x0.begin(), x0.end(), P.states.begin());
  return P;
}

// Mean-reverting Euler sweep shared by the three named systems. The target
// mean is the empirical mean of the current row unless mu_override is given.
void run_mean_revert(ParticlePaths& P, const BrownianBundle& b, const std::vector<double>& rates,
                     const double* mu_override, double sigma, double sigma0) {
  const int n = P.n_particles;
  const int S = P.grid.n_steps;
  const double dt = P.grid.dt();
  for (int j = 0; j < S; ++j) {
    const double* x = P.row(j);
    double* y = P.row(j + 1);
    const double m = mu_override ? mu_override[j] : pairwise_mean(x, n);
    const double r = rates[j];
    const double sdW = sigma0 * b.common[j];
    const double* dB = b.idio.data() + static_cast<std::size_t>(j) * b.n_particles;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      y[i] = x[i] + r * (m - x[i]) * dt + sigma * dB[i] + sdW;
    }
  }
  P.check_finite();
}

}  // namespace

void ParticlePaths::check_finite() const {
  for (const double v : states)
    if (!std::isfinite(v)) throw std::runtime_error("ParticlePaths: non-finite state");
}

double euler_step(double x, double drift, double dB, double dW, const ModelParams& p, double dt) {
  if (!std::isfinite(x) || !std::isfinite(drift) || !std::isfinite(dB) || !std::isfinite(dW))
    throw std::domain_error("euler_step: non-finite input");
  return x + drift * dt + p.sigma * dB + p.sigma0 * dW;
}

std::vector<double> draw_initial_states(const InitialLaw& law, const SeedRecord& seed, int n) {
  law.validate();
  std::vector<double> x(n);
  const std::uint64_t key = rng::stream_key(seed.base_seed, seed.replication_id);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i)
    x[i] = law.sample(rng::uniform_draw(key, static_cast<std::uint64_t>(i), rng::Stream::init, 0));
  return x;
}

ParticlePaths simulate_nash(const LqModel& model, int n, const BrownianBundle& bundle) {
  ParticlePaths P = make_paths(model, n, bundle, SystemTag::nash);
  std::vector<double> rates(P.grid.n_steps);
  for (int j = 0; j < P.grid.n_steps; ++j) rates[j] = model.rate_nash(P.grid.times[j], n);
  run_mean_revert(P, bundle, rates, nullptr, model.params().sigma, model.params().sigma0);
  return P;
}

ParticlePaths simulate_mkv_proxy(const LqModel& model, int n, const BrownianBundle& bundle) {
  ParticlePaths P = make_paths(model, n, bundle, SystemTag::mkv);
  std::vector<double> rates(P.grid.n_steps);
  for (int j = 0; j < P.grid.n_steps; ++j) rates[j] = model.rate_mkv(P.grid.times[j]);
  run_mean_revert(P, bundle, rates, nullptr, model.params().sigma, model.params().sigma0);
  return P;
}

ParticlePaths simulate_hat(const LqModel& model, int n, const BrownianBundle& bundle,
                           std::span<const double> w_path) {
  if (static_cast<int>(w_path.size()) != bundle.n_steps + 1)
    throw std::invalid_argument("simulate_hat: w_path must have n_steps + 1 values");
  ParticlePaths P = make_paths(model, n, bundle, SystemTag::hat);
  std::vector<double> rates(P.grid.n_steps), target(P.grid.n_steps);
  for (int j = 0; j < P.grid.n_steps; ++j) {
    rates[j] = model.rate_mkv(P.grid.times[j]);
    target[j] = model.mu_bar(w_path[j]);
  }
  run_mean_revert(P, bundle, rates, target.data(), model.params().sigma, model.params().sigma0);
  return P;
}

void MeanFieldDrift::probe(double T) const {
  if (!fn) throw std::invalid_argument("MeanFieldDrift: missing fn");
  if (!(declared_lipschitz > 0.0)) throw std::invalid_argument("MeanFieldDrift: missing Lipschitz bound");
  const double h = 1e-4;
  const double tol = 1.05 * declared_lipschitz + 1e-9;
  std::vector<double> feats(feature_moments.size());
  for (double t : {0.0, 0.5 * T, T}) {
    for (double x : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
      for (double base : {-1.0, 0.5, 2.0}) {
        for (auto& f : feats) f = base;
        const double dx = (fn(t, x + h, feats) - fn(t, x - h, feats)) / (2.0 * h);
        if (!std::isfinite(dx) || std::fabs(dx) > tol)
          throw std::runtime_error("MeanFieldDrift: Lipschitz probe failed in x");
        for (std::size_t k = 0; k < feats.size(); ++k) {
          feats[k] = base + h;
          const double up = fn(t, x, feats);
          feats[k] = base - h;
          const double dn = fn(t, x, feats);
          feats[k] = base;
          const double df = (up - dn) / (2.0 * h);
          if (!std::isfinite(df) || std::fabs(df) > tol)
            throw std::runtime_error("MeanFieldDrift: Lipschitz probe failed in features");
        }
      }
    }
  }
}

MeanFieldDrift lq_mean_field_drift(const LqModel& model) {
  MeanFieldDrift d;
  d.feature_moments = {1};
  const ModelParams p = model.params();
  d.fn = [p](double t, double x, std::span<const double> feats) {
    return drift_rate_mkv(t, p) * (feats[0] - x);
  };
  double rmax = 0.0;
  for (int i = 0; i <= 100; ++i) rmax = std::max(rmax, drift_rate_mkv(p.T * i / 100.0, p));
  d.declared_lipschitz = rmax;
  d.probe(p.T);
  return d;
}

ParticlePaths simulate_generic_mkv(const MeanFieldDrift& drift, const LqModel& model, int n,
                                   const BrownianBundle& bundle) {
  drift.probe(model.params().T);
  ParticlePaths P = make_paths(model, n, bundle, SystemTag::generic);
  const int S = P.grid.n_steps;
  const double dt = P.grid.dt();
  const double sigma = model.params().sigma, sigma0 = model.params().sigma0;
  std::vector<double> feats(drift.feature_moments.size());
  std::vector<double> powbuf(n);
  for (int j = 0; j < S; ++j) {
    const double* x = P.row(j);
    double* y = P.row(j + 1);
    const double t = P.grid.times[j];
    for (std::size_t k = 0; k < feats.size(); ++k) {
      const int ord = drift.feature_moments[k];
      for (int i = 0; i < n; ++i) powbuf[i] = pow_int(x[i], ord);
      feats[k] = pairwise_mean(powbuf.data(), n);
    }
    const double sdW = sigma0 * bundle.common[j];
    const double* dB = bundle.idio.data() + static_cast<std::size_t>(j) * bundle.n_particles;
    // Serial on purpose: the std::function drift is validation-only and may throw.
    for (int i = 0; i < n; ++i) {
      const double b = drift.fn(t, x[i], feats);
      if (!std::isfinite(b))
        throw std::runtime_error("simulate_generic_mkv: non-finite drift at step " +
                                 std::to_string(j) + ", particle " + std::to_string(i));
      y[i] = x[i] + b * dt + sigma * dB[i] + sdW;
    }
  }
  P.check_finite();
  return P;
}

CoupledTriple simulate_coupled_triple(const LqModel& model, int n, const BrownianBundle& bundle) {
  CoupledTriple t;
  t.nash = simulate_nash(model, n, bundle);
  t.mkv = simulate_mkv_proxy(model, n, bundle);
  const auto w = bundle.common_cumulative();
  t.hat = simulate_hat(model, n, bundle, w);
  return t;
}

void dump_paths_csv(const CoupledTriple& t, const std::string& path) {
  const ParticlePaths& a = t.nash;
  if (t.mkv.n_particles != a.n_particles || t.hat.n_particles != a.n_particles ||
      t.mkv.grid.n_steps != a.grid.n_steps || t.hat.grid.n_steps != a.grid.n_steps)
    throw std::invalid_argument("dump_paths_csv: mismatched systems");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("dump_paths_csv: cannot open " + path);
  std::fputs("step,time,particle,x_nash,x_mkv,x_hat\n", f);
  for (int j = 0; j <= a.grid.n_steps; ++j) {
    for (int i = 0; i < a.n_particles; ++i) {
      std::fprintf(f, "%d,%.17g,%d,%.17g,%.17g,%.17g\n", j, a.grid.times[j], i, a.at(j, i),
                   t.mkv.at(j, i), t.hat.at(j, i));
    }
  }
  std::fclose(f);
}

}  // namespace mfg
