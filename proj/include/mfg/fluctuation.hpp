#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mfg/model_lq.hpp"
#include "mfg/particles.hpp"

namespace mfg {

// Test function with first two derivatives. Polynomials carry their monomial
// coefficients so measure pairings can use exact moments.
struct TestFunction {
  std::string label;
  std::function<double(double)> f, df, d2f;
  std::optional<std::vector<double>> poly;  // coefficients, poly[k] multiplies x^k

  static TestFunction monomial(int degree);
  // Probabilists' Hermite polynomial He_k.
  static TestFunction hermite(int degree);
  // Smooth compactly supported bump on (center - width, center + width).
  static TestFunction bump(double center, double width);
};

enum class TestSuiteKind { monomials, hermites, bumps };

std::vector<TestFunction> make_test_suite(TestSuiteKind kind, int max_degree);

// Weighted-Sobolev index floor(d/2) + 1 in dimension d.
int lambda_d(int d);

// Values of the normalized fluctuation field S^n_t = sqrt(n)(m^n_t - mu_t)
// paired with each test function, at the requested times, for one replication.
struct FluctuationSample {
  std::uint64_t replication_id = 0;
  int n = 0;
  std::vector<double> times;
  std::vector<std::string> labels;
  std::vector<double> values;  // times x labels, row-major

  double at(int time_idx, int fn_idx) const {
    return values[static_cast<std::size_t>(time_idx) * labels.size() + fn_idx];
  }
};

// Pairings <S^n_t, phi>; the deterministic reference <mu_t, phi> uses exact
// mixture moments for polynomials and quadrature otherwise. w_path holds the
// common-noise path at grid times. Requested times must lie on the grid.
FluctuationSample fluctuation_values(const ParticlePaths& paths, std::span<const double> w_path,
                                     const std::vector<TestFunction>& fns,
                                     const std::vector<double>& times, const LqModel& model);

// CSV with header replication,time,testfn_label,value.
void fluctuation_csv(std::span<const FluctuationSample> samples, std::ostream& os);

// Function sampled on a symmetric uniform grid over [-extent, extent].
struct SobolevGridFn {
  double extent = 0.0;
  std::vector<double> values;  // odd count, uniform spacing
};

// Weighted Sobolev norm: sum over derivative orders 0..j of the squared
// derivative integrated against the weight 1/(1 + |x|^{2 alpha}).
// Derivatives are central differences; the integral is a trapezoid rule.
// Throws if the function has not decayed at the grid edge.
double sobolev_norm(const SobolevGridFn& g, int j, double alpha);

}  // namespace mfg
