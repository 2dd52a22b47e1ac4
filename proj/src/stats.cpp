#include "mfg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfg/summation.hpp"

namespace mfg {

MeanSE mean_se(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("mean_se: need at least 2 values");
  const int n = static_cast<int>(x.size());
  const double m = pairwise_sum(x.data(), x.size()) / n;
  std::vector<double> dev(x.size());
  for (int i = 0; i < n; ++i) {
    const double d = x[i] - m;
    dev[i] = d * d;
  }
  const double var = pairwise_sum(dev.data(), dev.size()) / (n - 1);
  return {m, std::sqrt(var / n), n};
}

SlopeFit fit_loglog(std::span<const double> n_values, std::span<const double> stat,
                    std::span<const double> se) {
  const std::size_t m = n_values.size();
  if (stat.size() != m || se.size() != m) throw std::invalid_argument("fit_loglog: length mismatch");
  SlopeFit out;
  std::vector<double> xs, ys, ws;
  bool weighted = true;
  for (std::size_t i = 0; i < m; ++i)
    if (se[i] == 0.0) weighted = false;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(n_values[i] > 0.0)) throw std::invalid_argument("fit_loglog: n must be positive");
    if (stat[i] <= 2.0 * se[i] || stat[i] <= 0.0) {
      out.dropped.push_back(static_cast<int>(i));
      continue;
    }
    xs.push_back(std::log(n_values[i]));
    ys.push_back(std::log(stat[i]));
    // Delta method: sd(log stat) = se / stat.
    ws.push_back(weighted ? (stat[i] * stat[i]) / (se[i] * se[i]) : 1.0);
  }
  out.used = static_cast<int>(xs.size());
  if (out.used < 3) {
    out.degenerate = true;
    return out;
  }
  double W = 0.0, xbar = 0.0, ybar = 0.0;
  for (int i = 0; i < out.used; ++i) {
    W += ws[i];
    xbar += ws[i] * xs[i];
    ybar += ws[i] * ys[i];
  }
  xbar /= W;
  ybar /= W;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < out.used; ++i) {
    sxx += ws[i] * (xs[i] - xbar) * (xs[i] - xbar);
    sxy += ws[i] * (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (!(sxx > 0.0)) {
    out.degenerate = true;
    return out;
  }
  out.slope = sxy / sxx;
  out.intercept = ybar - out.slope * xbar;
  if (weighted) {
    out.slope_se = std::sqrt(1.0 / sxx);
  } else {
    double rss = 0.0;
    for (int i = 0; i < out.used; ++i) {
      const double r = ys[i] - (out.intercept + out.slope * xs[i]);
      rss += r * r;
    }
    const int dof = out.used - 2;
    out.slope_se = dof > 0 ? std::sqrt(rss / dof / sxx) : 0.0;
  }
  return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t m = a.size(), n = b.size();
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < m && j < n) {
    const double v = std::min(a[i], b[j]);
    while (i < m && a[i] <= v) ++i;
    while (j < n && b[j] <= v) ++j;
    const double diff = std::fabs(static_cast<double>(i) / m - static_cast<double>(j) / n);
    if (diff > d) d = diff;
  }
  return d;
}

double ks_pvalue(double d, int m, int n) {
  if (m < 1 || n < 1 || d < 0.0) throw std::invalid_argument("ks_pvalue: bad arguments");
  const double ne = static_cast<double>(m) * n / (static_cast<double>(m) + n);
  const double sq = std::sqrt(ne);
  const double lambda = (sq + 0.12 + 0.11 / sq) * d;
  if (lambda < 1e-3) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    s += term;
    if (std::fabs(term) < 1e-16) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

Matrix cholesky(const Matrix& a, int d) {
  if (static_cast<int>(a.size()) != d * d) throw std::invalid_argument("cholesky: size mismatch");
  double max_diag = 0.0;
  for (int i = 0; i < d; ++i) max_diag = std::max(max_diag, std::fabs(a[i * d + i]));
  // Relative jitter only: an absolute floor would swamp well-posed problems
  // living at small scales.
  const double jitter = 1e-12 * max_diag;
  Matrix L(d * d, 0.0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[i * d + j];
      for (int k = 0; k < j; ++k) s -= L[i * d + k] * L[j * d + k];
      if (i == j) {
        if (s + jitter <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
        L[i * d + i] = std::sqrt(std::max(s, jitter));
      } else {
        L[i * d + j] = s / L[j * d + j];
      }
    }
  }
  return L;
}

void mean_and_cov(std::span<const double> x, int M, int d, std::vector<double>& mean, Matrix& cov) {
  if (static_cast<int>(x.size()) != M * d || M < 2) throw std::invalid_argument("mean_and_cov: bad shape");
  mean.assign(d, 0.0);
  std::vector<double> col(M);
  for (int j = 0; j < d; ++j) {
    for (int r = 0; r < M; ++r) col[r] = x[static_cast<std::size_t>(r) * d + j];
    mean[j] = pairwise_mean(col.data(), M);
  }
  cov.assign(static_cast<std::size_t>(d) * d, 0.0);
  std::vector<double> prod(M);
  for (int j = 0; j < d; ++j) {
    for (int k = j; k < d; ++k) {
      for (int r = 0; r < M; ++r) {
        const std::size_t off = static_cast<std::size_t>(r) * d;
        prod[r] = (x[off + j] - mean[j]) * (x[off + k] - mean[k]);
      }
      const double c = pairwise_sum(prod.data(), M) / (M - 1);
      cov[j * d + k] = c;
      cov[k * d + j] = c;
    }
  }
}

double frobenius_rel_err(const Matrix& a, const Matrix& b, int d) {
  if (a.size() != b.size() || static_cast<int>(a.size()) != d * d)
    throw std::invalid_argument("frobenius_rel_err: size mismatch");
  double num = 0.0, den = 0.0;
  for (int i = 0; i < d * d; ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  if (!(den > 0.0)) throw std::invalid_argument("frobenius_rel_err: zero reference");
  return std::sqrt(num / den);
}

namespace {

// Solve L z = y in place, L lower triangular.
void forward_solve(const Matrix& L, int d, std::vector<double>& z) {
  for (int i = 0; i < d; ++i) {
    double s = z[i];
    for (int k = 0; k < i; ++k) s -= L[i * d + k] * z[k];
    z[i] = s / L[i * d + i];
  }
}

void backward_solve_transposed(const Matrix& L, int d, std::vector<double>& z) {
  for (int i = d - 1; i >= 0; --i) {
    double s = z[i];
    for (int k = i + 1; k < d; ++k) s -= L[k * d + i] * z[k];
    z[i] = s / L[i * d + i];
  }
}

}  // namespace

OlsFit ols(std::span<const double> y, std::span<const double> X, int M, int p) {
  if (static_cast<int>(y.size()) != M || static_cast<int>(X.size()) != M * p || M <= p)
    throw std::invalid_argument("ols: bad shape");
  // Equilibrate columns to unit RMS so the normal equations are conditioned
  // by collinearity only, not by the columns' physical scales.
  std::vector<double> scale(p, 0.0);
  for (int r = 0; r < M; ++r) {
    const std::size_t off = static_cast<std::size_t>(r) * p;
    for (int j = 0; j < p; ++j) scale[j] += X[off + j] * X[off + j];
  }
  for (int j = 0; j < p; ++j) {
    scale[j] = std::sqrt(scale[j] / M);
    if (!(scale[j] > 0.0)) throw std::invalid_argument("ols: column " + std::to_string(j) + " is zero");
  }
  Matrix xtx(static_cast<std::size_t>(p) * p, 0.0);
  std::vector<double> xty(p, 0.0);
  for (int r = 0; r < M; ++r) {
    const std::size_t off = static_cast<std::size_t>(r) * p;
    for (int j = 0; j < p; ++j) {
      const double xj = X[off + j] / scale[j];
      xty[j] += xj * y[r];
      for (int k = j; k < p; ++k) xtx[j * p + k] += xj * (X[off + k] / scale[k]);
    }
  }
  for (int j = 0; j < p; ++j)
    for (int k = 0; k < j; ++k) xtx[j * p + k] = xtx[k * p + j];
  const Matrix L = cholesky(xtx, p);
  OlsFit out;
  out.beta = xty;
  forward_solve(L, p, out.beta);
  backward_solve_transposed(L, p, out.beta);
  for (int j = 0; j < p; ++j) out.beta[j] /= scale[j];
  double rss = 0.0, tss = 0.0;
  const double ybar = pairwise_sum(y.data(), y.size()) / M;
  for (int r = 0; r < M; ++r) {
    double fit = 0.0;
    const std::size_t off = static_cast<std::size_t>(r) * p;
    for (int j = 0; j < p; ++j) fit += X[off + j] * out.beta[j];
    rss += (y[r] - fit) * (y[r] - fit);
    tss += (y[r] - ybar) * (y[r] - ybar);
  }
  const double s2 = rss / (M - p);
  out.se.assign(p, 0.0);
  // (X^T X)^{-1} column by column, in the scaled basis; unscale like beta.
  std::vector<double> e(p);
  for (int j = 0; j < p; ++j) {
    std::fill(e.begin(), e.end(), 0.0);
    e[j] = 1.0;
    forward_solve(L, p, e);
    backward_solve_transposed(L, p, e);
    out.se[j] = std::sqrt(s2 * e[j]) / scale[j];
  }
  out.r_squared = tss > 0.0 ? 1.0 - rss / tss : 0.0;
  return out;
}

MardiaResult mardia(std::span<const double> x, int M, int d) {
  std::vector<double> mean;
  Matrix cov;
  mean_and_cov(x, M, d, mean, cov);
  const Matrix L = cholesky(cov, d);
  // Whitened rows z_i = L^{-1}(x_i - mean).
  std::vector<double> z(static_cast<std::size_t>(M) * d);
  std::vector<double> tmp(d);
  for (int r = 0; r < M; ++r) {
    for (int j = 0; j < d; ++j) tmp[j] = x[static_cast<std::size_t>(r) * d + j] - mean[j];
    forward_solve(L, d, tmp);
    for (int j = 0; j < d; ++j) z[static_cast<std::size_t>(r) * d + j] = tmp[j];
  }
  double b1 = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : b1)
  for (int i = 0; i < M; ++i) {
    const double* zi = z.data() + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < M; ++j) {
      const double* zj = z.data() + static_cast<std::size_t>(j) * d;
      double dot = 0.0;
      for (int k = 0; k < d; ++k) dot += zi[k] * zj[k];
      b1 += dot * dot * dot;
    }
  }
  b1 /= static_cast<double>(M) * M;
  double b2 = 0.0;
  for (int i = 0; i < M; ++i) {
    const double* zi = z.data() + static_cast<std::size_t>(i) * d;
    double dot = 0.0;
    for (int k = 0; k < d; ++k) dot += zi[k] * zi[k];
    b2 += dot * dot;
  }
  b2 /= M;
  MardiaResult out;
  const double f = d * (d + 1.0) * (d + 2.0) / 6.0;
  out.skewness_stat = M * b1 / 6.0;
  out.skewness_p = chi2_sf(out.skewness_stat, f);
  const double mean_b2 = d * (d + 2.0);
  const double sd_b2 = std::sqrt(8.0 * d * (d + 2.0) / M);
  out.kurtosis_stat = (b2 - mean_b2) / sd_b2;
  out.kurtosis_p = 2.0 * (1.0 - normal_cdf(std::fabs(out.kurtosis_stat)));
  return out;
}

namespace {

// Regularized incomplete gamma functions (series / continued fraction).
double gamma_p_series(double a, double x) {
  double sum = 1.0 / a, term = sum, ap = a;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double chi2_sf(double x, double k) {
  if (x < 0.0 || k <= 0.0) throw std::invalid_argument("chi2_sf: bad arguments");
  if (x == 0.0) return 1.0;
  const double a = 0.5 * k, xx = 0.5 * x;
  if (xx < a + 1.0) return 1.0 - gamma_p_series(a, xx);
  return gamma_q_contfrac(a, xx);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

}  // namespace mfg
