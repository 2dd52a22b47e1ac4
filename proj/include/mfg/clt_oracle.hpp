#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mfg/model_lq.hpp"
#include "mfg/stats.hpp"

// Independent sampler for the limiting fluctuation field paired with
// monomials. For phi_k(x) = x^k the limit SPDE closes into a finite
// lower-triangular SDE system for s_k(t) = <S_t, x^k>:
//
//   ds_k = c(t) [ k mu_bar_t s_{k-1} - k s_k + k M_{k-1}(t) s_1 ] dt
//        + (1/2)(sigma^2 + sigma0^2) k (k-1) s_{k-2} dt
//        + sigma0 k s_{k-1} dW_t + dXi_k(t),   s_0 = 0,
//
// where M_m(t) = <mu_t, x^m> and Xi is a centered martingale with
// d<Xi_j, Xi_k> = sigma^2 j k M_{j+k-2}(t) dt. The initial condition theta_0
// is the centered Gaussian with Cov(x^j, x^k) under mu_0.

namespace mfg {

// Sign convention for the first-order drift; "printed" negates the
// c(t)-bracket and is kept as a negative control.
enum class MomentDriftSign { derived, printed };

struct MomentSystemState {
  double t = 0.0;
  int K = 0;
  std::vector<double> s;           // s[k] = <S, x^k>, k = 0..K, s[0] = 0
  std::vector<double> mu_moments;  // M_m(t), m = 0..K-1, supplied by the caller

  double value(int degree) const { return s[degree]; }
};

// One Euler step with supplied Brownian increment dW and martingale
// increments dXi (dXi[k-1] belongs to degree k). Deterministic in its inputs.
MomentSystemState limit_moment_step(const MomentSystemState& st, double dW,
                                    std::span<const double> dXi, double dt, const LqModel& model,
                                    MomentDriftSign sign);

// Covariance of theta_0 over monomial degrees 1..K (centered).
Matrix theta0_cov(const InitialLaw& mu0, int K);

// Martingale increment rate R_{jk}(t) = sigma^2 j k M_{j+k-2}(t) for
// j, k = 1..K, from raw moments M_0..M_{2K-2}.
Matrix xi_rate(std::span<const double> raw_moments, int K, double sigma);

struct OracleOptions {
  int K = 3;                 // highest monomial degree, <= 6
  int n_steps = 2000;        // Euler steps on [0, T]
  MomentDriftSign sign = MomentDriftSign::derived;
};

struct OracleSamples {
  std::vector<double> times;
  std::vector<int> degrees;
  int M = 0;
  std::vector<double> values;  // M x (times * degrees), row-major, degree fastest

  double at(int rep, int time_idx, int deg_idx) const {
    const std::size_t cols = times.size() * degrees.size();
    return values[rep * cols + time_idx * degrees.size() + deg_idx];
  }
};

// M independent paths of the limit system, recorded at the requested times
// for the requested degrees (each must be <= options.K).
OracleSamples sample_limit_vector(const std::vector<int>& degrees, const std::vector<double>& times,
                                  int M, std::uint64_t base_seed, const LqModel& model,
                                  const OracleOptions& options);

struct ComparisonRow {
  double time = 0.0;
  int degree = 0;
  double mean_diff = 0.0;
  double mean_se = 0.0;
  double cov_rel_err = 0.0;  // per time block, repeated on its rows
  double ks_stat = 0.0;
  double ks_p = 0.0;
};

// Columns of emp/orc are ordered time-major with degree fastest, matching
// OracleSamples. Refuses M < 200 on either side.
std::vector<ComparisonRow> compare_distributions(std::span<const double> emp, int m_emp,
                                                 std::span<const double> orc, int m_orc,
                                                 const std::vector<double>& times,
                                                 const std::vector<int>& degrees);

}  // namespace mfg
