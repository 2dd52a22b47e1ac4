#include "mfg/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace mfg {

namespace {

constexpr double kPiQuarterInv = 0.7511255444649424828;  // pi^{-1/4}
constexpr double kSqrtPiInv = 0.5641895835477562869;     // pi^{-1/2}

// Adaptive Simpson on [a, b].
double simpson_rec(const std::function<double(double)>& f, double a, double fa, double b, double fb,
                   double fm, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  if (depth <= 0) throw std::runtime_error("quadrature: adaptive Simpson did not converge");
  return simpson_rec(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, fa, b, fb, fm, whole, tol, 40);
}

}  // namespace

GaussHermite GaussHermite::make(int npoints) {
  if (npoints < 1) throw std::invalid_argument("GaussHermite: npoints must be >= 1");
  const int n = npoints;
  GaussHermite gh;
  gh.nodes.assign(n, 0.0);
  gh.weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  double z = 0.0, z_prev1 = 0.0, z_prev2 = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(n, 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * z_prev2;
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * z_prev2;
    } else {
      z = 2.0 * z - z_prev2;
    }
    double pp = 0.0;
    for (int it = 0; it < 200; ++it) {
      // Orthonormal Hermite recurrence.
      double p1 = kPiQuarterInv, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) <= 1e-15 * (1.0 + std::fabs(z))) break;
    }
    z_prev2 = z_prev1;
    z_prev1 = z;
    gh.nodes[i] = z;
    gh.nodes[n - 1 - i] = -z;
    const double w = 2.0 / (pp * pp);
    gh.weights[i] = w;
    gh.weights[n - 1 - i] = w;
  }
  return gh;
}

const GaussHermite& GaussHermite::k201() {
  static const GaussHermite gh = make(201);
  return gh;
}

const GaussHermite& GaussHermite::k101() {
  static const GaussHermite gh = make(101);
  return gh;
}

double GaussHermite::gaussian_expectation(const std::function<double(double)>& f, double m,
                                          double s) const {
  const double c = std::sqrt(2.0) * s;
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(m + c * nodes[i]);
  return kSqrtPiInv * acc;
}

double mixture_expectation(const GaussianMixtureLaw& mu, const std::function<double(double)>& f) {
  double acc = 0.0;
  for (const auto& c : mu.components()) {
    if (c.sd <= 0.0) {
      acc += c.weight * f(c.mean);
      continue;
    }
    const double coarse = GaussHermite::k101().gaussian_expectation(f, c.mean, c.sd);
    const double fine = GaussHermite::k201().gaussian_expectation(f, c.mean, c.sd);
    double val = fine;
    if (std::fabs(fine - coarse) > 1e-8 * (1.0 + std::fabs(fine))) {
      // Not resolved by the fixed rules (narrow features); integrate directly.
      constexpr double kInvSqrt2Pi = 0.3989422804014326779;
      const double sd = c.sd, mean = c.mean;
      auto integrand = [&f, sd, mean, kInvSqrt2Pi](double x) {
        const double u = (x - mean) / sd;
        return f(x) * kInvSqrt2Pi / sd * std::exp(-0.5 * u * u);
      };
      val = adaptive_simpson(integrand, mean - 12.0 * sd, mean + 12.0 * sd, 1e-10);
    }
    acc += c.weight * val;
  }
  return acc;
}

}  // namespace mfg
