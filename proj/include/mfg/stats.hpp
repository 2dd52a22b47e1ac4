#pragma once

#include <span>
#include <vector>

namespace mfg {

struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
  int n = 0;
};
MeanSE mean_se(std::span<const double> x);

// Weighted least squares fit of log(stat) on log(n). Rungs whose statistic is
// within 2 SE of zero are dropped (recorded in `dropped`); if fewer than 3
// rungs survive the fit is flagged degenerate. With all-zero SEs the fit is
// plain OLS with residual-based slope error.
struct SlopeFit {
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept = 0.0;
  int used = 0;
  std::vector<int> dropped;
  bool degenerate = false;
};
SlopeFit fit_loglog(std::span<const double> n_values, std::span<const double> stat,
                    std::span<const double> se);

// Two-sample Kolmogorov-Smirnov. Inputs need not be sorted.
double ks_statistic(std::vector<double> a, std::vector<double> b);
// Asymptotic p-value with the standard finite-sample correction.
double ks_pvalue(double d, int m, int n);

// Dense row-major d x d matrices, d small.
using Matrix = std::vector<double>;

// Cholesky factor L (lower) with A = L L^T; throws if A is not positive
// definite beyond a tiny diagonal jitter.
Matrix cholesky(const Matrix& a, int d);

// Sample mean vector and covariance of rows of x (M x d, row-major).
void mean_and_cov(std::span<const double> x, int M, int d, std::vector<double>& mean, Matrix& cov);

// Frobenius relative error |A - B|_F / |B|_F.
double frobenius_rel_err(const Matrix& a, const Matrix& b, int d);

// OLS of y (length M) on columns of X (M x p): returns beta and its standard
// errors under homoskedastic residuals.
struct OlsFit {
  std::vector<double> beta;
  std::vector<double> se;
  double r_squared = 0.0;
};
OlsFit ols(std::span<const double> y, std::span<const double> X, int M, int p);

// Mardia's multivariate skewness and kurtosis tests for rows of x.
struct MardiaResult {
  double skewness_stat = 0.0;  // n b1 / 6, ~ chi2(d(d+1)(d+2)/6)
  double skewness_p = 0.0;
  double kurtosis_stat = 0.0;  // standardized b2, ~ N(0,1)
  double kurtosis_p = 0.0;
};
MardiaResult mardia(std::span<const double> x, int M, int d);

// Upper tail of the chi-square distribution.
double chi2_sf(double x, double k);
// Standard normal CDF.
double normal_cdf(double x);

}  // namespace mfg
