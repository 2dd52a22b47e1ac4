#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

// Linear-quadratic mean field model on the real line. The n-player Nash
// feedback and its mean field limit are both governed by the Riccati curve
// phi^n_t; everything here evaluates those curves and the explicit limit law.

namespace mfg {

// Number of players: a positive integer or the mean field limit.
struct NLabel {
  bool finite = true;
  long n = 1;

  static NLabel of(long n);
  static NLabel inf();

  double one_minus_inv() const { return finite ? 1.0 - 1.0 / static_cast<double>(n) : 1.0; }
  double one_minus_inv_sq() const {
    if (!finite) return 1.0;
    const double nd = static_cast<double>(n);
    return 1.0 - 1.0 / (nd * nd);
  }
  std::string str() const { return finite ? std::to_string(n) : "inf"; }
};

// Initial law with finite moments of every order we use.
struct InitialLaw {
  enum class Kind { gaussian, two_point };
  Kind kind = Kind::gaussian;
  double mean = 0.0;
  double var = 1.0;

  void validate() const;
  // Inverse-CDF sample from u in (0,1).
  double sample(double u) const;
  // Raw moment E[X^k], k <= 16.
  double moment(int k) const;
  // Central moment E[(X-mean)^k], k <= 16.
  double central_moment(int k) const;
};

struct ModelParams {
  double b_bar = 1.0;
  double q = 0.5;
  double eps = 1.0;
  double g_bar = 0.3;
  double sigma = 0.5;
  double sigma0 = 0.3;
  double T = 1.0;
  InitialLaw mu0;

  void validate() const;
};

void to_json(nlohmann::json& j, const ModelParams& p);
void from_json(const nlohmann::json& j, ModelParams& p);

// Baseline parameter set used throughout the experiments.
ModelParams baseline_params();

// phi^n_t in closed form; n may be the mean field label. Falls back to direct
// integration when the two Riccati roots are closer than 1e-6/T apart, where
// the closed form is 0/0.
double phi_closed_form(double t, NLabel n, const ModelParams& p);

struct RiccatiCurve {
  NLabel n_label;
  std::vector<double> grid;    // ascending times in [0, T]
  std::vector<double> values;  // phi^n at grid times
};

// Independent check: classic RK4 on the terminal value problem, integrated
// backward from phi(T) = g_bar. steps >= 100.
RiccatiCurve riccati_ode_oracle(NLabel n, const ModelParams& p, int steps);

// sup_t |(1 - 1/n) phi^n_t - phi^inf_t| over a uniform grid with grid_steps
// intervals (grid sup, not exact sup; the curves are smooth so the difference
// is O(grid_steps^-2)).
double coupling_gap(long n, const ModelParams& p, int grid_steps = 10000);

// Interaction rates multiplying (mean - x) in the drift.
double drift_rate_nash(double t, long n, const ModelParams& p);
double drift_rate_mkv(double t, const ModelParams& p);

// Value of the master field at (t, x) when the population mean is mbar.
double master_value(double t, double x, double mbar, const ModelParams& p);

// Finite mixture of Gaussians (a component may be a point mass, sd = 0).
struct GaussianComponent {
  double weight;
  double mean;
  double sd;
};

class GaussianMixtureLaw {
 public:
  explicit GaussianMixtureLaw(std::vector<GaussianComponent> comps);

  const std::vector<GaussianComponent>& components() const { return comps_; }
  double mean() const;
  double variance() const;
  double density(double x) const;
  // Raw moment <mu, x^k>, k <= 16, exact via Gaussian moment formulas.
  double moment(int k) const;
  // Central moment about the mixture mean, k <= 16.
  double central_moment(int k) const;

 private:
  std::vector<GaussianComponent> comps_;
};

// The explicitly solvable limit flow. Precomputes the decay curve
// l_t = exp(-int_0^t c(s) ds) and the variance integral int_0^t l_s^{-2} ds
// once, on a fine internal grid.
class LqModel {
 public:
  explicit LqModel(ModelParams p, int curve_steps = 4000);

  const ModelParams& params() const { return p_; }
  double phi_inf(double t) const { return phi_closed_form(t, NLabel::inf(), p_); }
  double rate_mkv(double t) const { return drift_rate_mkv(t, p_); }
  double rate_nash(double t, long n) const { return drift_rate_nash(t, n, p_); }

  double ell(double t) const;               // l_t
  double variance_integral(double t) const; // int_0^t l_s^{-2} ds

  // Conditional law mu_t given common-noise value W_t = w: a Gaussian mixture
  // with component means l_t x + (1 - l_t) mean0 + sigma0 w and common extra
  // variance sigma^2 l_t^2 int_0^t l_s^{-2} ds.
  GaussianMixtureLaw mu_t(double t, double w) const;

  // Conditional mean of mu_t: mean0 + sigma0 w (independent of t).
  double mu_bar(double w) const { return p_.mu0.mean + p_.sigma0 * w; }

 private:
  ModelParams p_;
  int steps_;
  double h_;
  std::vector<double> ell_;   // l at internal grid times
  std::vector<double> jint_;  // variance integral at internal grid times
  double curve_at(const std::vector<double>& c, double t) const;
};

// Convenience wrapper building a model on the fly.
GaussianMixtureLaw mu_t_explicit(double t, double w, const ModelParams& p);

}  // namespace mfg
