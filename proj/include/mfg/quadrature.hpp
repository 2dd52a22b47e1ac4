#pragma once

#include <functional>
#include <vector>

#include "mfg/model_lq.hpp"

namespace mfg {

// Gauss-Hermite rule for integrals against exp(-x^2).
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;

  static GaussHermite make(int npoints);
  static const GaussHermite& k201();
  static const GaussHermite& k101();

  // E[f(m + s Z)] for Z standard normal.
  double gaussian_expectation(const std::function<double(double)>& f, double m, double s) const;
};

// <mu, f> for a Gaussian mixture. Uses the 201-point rule checked against the
// 101-point rule at relative tolerance 1e-8; components where the two rules
// disagree are redone with adaptive Simpson, and failure to converge throws.
double mixture_expectation(const GaussianMixtureLaw& mu, const std::function<double(double)>& f);

}  // namespace mfg
