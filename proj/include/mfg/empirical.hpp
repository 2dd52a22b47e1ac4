#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mfg/model_lq.hpp"
#include "mfg/particles.hpp"

namespace mfg {

// Empirical measure on the line, with a cached sort.
class EmpiricalMeasure1D {
 public:
  explicit EmpiricalMeasure1D(std::vector<double> samples);

  const std::vector<double>& samples() const { return samples_; }
  const std::vector<double>& sorted() const;
  int size() const { return static_cast<int>(samples_.size()); }

 private:
  std::vector<double> samples_;
  mutable std::vector<double> sorted_;
};

// W_p between two empirical measures with equal sample counts, via the
// monotone rearrangement (exact in 1-D). p in {1, 2}.
double wasserstein_1d(int p, const EmpiricalMeasure1D& a, const EmpiricalMeasure1D& b);

// Raw moment <m, x^k> computed by compensated summation over the sorted
// samples, so the value is independent of sample order.
double moment(const EmpiricalMeasure1D& m, int k);

// Pathwise coupling statistics between two systems driven by the same noise:
//   mean_sq_sup = (1/n) sum_i sup_j |A_ij - B_ij|^2
//   mean_sup    = (1/n) sum_i sup_j |A_ij - B_ij|
//   w2_final    = W_2 between the time-T empirical measures
struct PathCouplingStats {
  double mean_sq_sup = 0.0;
  double mean_sup = 0.0;
  double w2_final = 0.0;
};
PathCouplingStats path_coupling_stats(const ParticlePaths& a, const ParticlePaths& b);

// Functional m -> h(<m, psi>) with an analytic value at the initial law.
struct MeasureFunctional {
  std::string label;
  std::function<double(double)> h, dh, d2h;
  std::function<double(double)> psi;
  std::function<double(const InitialLaw&)> psi_mean;
  double dh_bound = 0.0;   // declared sup |h'|
  double d2h_bound = 0.0;  // declared sup |h''|

  double value(const std::vector<double>& samples) const;
  double reference(const InitialLaw& mu0) const;
};

MeasureFunctional mean_functional();
MeasureFunctional tanh_mean_functional();
MeasureFunctional constant_functional(double c);

// E[ |h(<m_n, psi>) - h(<mu0, psi>)|^4 ]^{1/4} over M replications of n
// i.i.d. draws from mu0. Returns the estimate and its delta-method SE.
struct L4Estimate {
  double value = 0.0;
  double se = 0.0;
};
L4Estimate l4_functional_error(const MeasureFunctional& f, const InitialLaw& mu0, int n, int M,
                               std::uint64_t base_seed);

}  // namespace mfg
