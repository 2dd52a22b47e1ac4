#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mfg/brownian.hpp"
#include "mfg/grid.hpp"
#include "mfg/model_lq.hpp"

namespace mfg {

enum class SystemTag { nash, mkv, hat, generic };

struct ParticlePaths {
  TimeGrid grid;
  int n_particles = 0;
  SystemTag tag = SystemTag::generic;
  SeedRecord seed_record;
  std::vector<double> states;  // (n_steps + 1) x n_particles, row-major [step][particle]

  double at(int step, int particle) const {
    return states[static_cast<std::size_t>(step) * n_particles + particle];
  }
  const double* row(int step) const {
    return states.data() + static_cast<std::size_t>(step) * n_particles;
  }
  double* row(int step) { return states.data() + static_cast<std::size_t>(step) * n_particles; }
  void check_finite() const;
};

// One Euler step; throws on non-finite inputs.
double euler_step(double x, double drift, double dB, double dW, const ModelParams& p, double dt);

// Initial states X_0^i = F^{-1}(U_i) with U_i addressed by (seed, particle),
// so a prefix is shared across population sizes.
std::vector<double> draw_initial_states(const InitialLaw& law, const SeedRecord& seed, int n);

// n-player Nash system: dX^i = (b_bar + q + (1-1/n) phi^n_t)(mean - X^i) dt
// + sigma dB^i + sigma0 dW, with the empirical mean.
ParticlePaths simulate_nash(const LqModel& model, int n, const BrownianBundle& bundle);

// McKean-Vlasov proxy: same shape with rate b_bar + q + phi^inf_t and the
// empirical mean of the proxy population (particle-approximated limit).
ParticlePaths simulate_mkv_proxy(const LqModel& model, int n, const BrownianBundle& bundle);

// Decoupled system driven by the exact conditional mean mean0 + sigma0 W_t.
// w_path holds W at grid times (n_steps + 1 values).
ParticlePaths simulate_hat(const LqModel& model, int n, const BrownianBundle& bundle,
                           std::span<const double> w_path);

// Generic mean field drift b(t, x, m) depending on the state and a few
// empirical moments of the population.
struct MeanFieldDrift {
  std::vector<int> feature_moments;  // orders of the empirical moments fed to fn
  std::function<double(double t, double x, std::span<const double> feats)> fn;
  double declared_lipschitz = 0.0;   // bound on |d fn / d(x, feats)|, probe-checked

  // Finite-difference Lipschitz probe over a coarse grid of arguments; throws
  // if the probe exceeds 1.05 * declared_lipschitz or is non-finite.
  void probe(double T) const;
};

MeanFieldDrift lq_mean_field_drift(const LqModel& model);

ParticlePaths simulate_generic_mkv(const MeanFieldDrift& drift, const LqModel& model, int n,
                                   const BrownianBundle& bundle);

struct CoupledTriple {
  ParticlePaths nash;
  ParticlePaths mkv;
  ParticlePaths hat;
};

// All three systems on the same bundle (same dB, dW, and initial states).
CoupledTriple simulate_coupled_triple(const LqModel& model, int n, const BrownianBundle& bundle);

// CSV with header step,time,particle,x_nash,x_mkv,x_hat.
void dump_paths_csv(const CoupledTriple& t, const std::string& path);

namespace ref {
// Serial reference kernels, bit-identical to the parallel ones.
ParticlePaths simulate_nash(const LqModel& model, int n, const BrownianBundle& bundle);
ParticlePaths simulate_mkv_proxy(const LqModel& model, int n, const BrownianBundle& bundle);
ParticlePaths simulate_hat(const LqModel& model, int n, const BrownianBundle& bundle,
                           std::span<const double> w_path);
}  // namespace ref

}  // namespace mfg
