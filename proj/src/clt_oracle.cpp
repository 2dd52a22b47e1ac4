#include "mfg/clt_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfg/rng.hpp"

namespace mfg {

namespace {

constexpr int kMaxK = 6;

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

void check_K(int K) {
  if (K < 1 || K > kMaxK) throw std::invalid_argument("oracle: K must be in [1, 6]");
}

}  // namespace

MomentSystemState limit_moment_step(const MomentSystemState& st, double dW,
                                    std::span<const double> dXi, double dt, const LqModel& model,
                                    MomentDriftSign sign) {
  check_K(st.K);
  if (static_cast<int>(st.s.size()) != st.K + 1 || st.s[0] != 0.0)
    throw std::invalid_argument("limit_moment_step: state must have s[0..K] with s[0] = 0");
  if (static_cast<int>(dXi.size()) != st.K) throw std::invalid_argument("limit_moment_step: dXi size");
  if (static_cast<int>(st.mu_moments.size()) < std::max(st.K, 2))
    throw std::invalid_argument("limit_moment_step: need mu moments M_0..M_{max(K-1,1)}");
  const double c = model.rate_mkv(st.t);
  const double mu_bar = st.mu_moments[1];
  const double half_s2 = 0.5 * (model.params().sigma * model.params().sigma +
                                model.params().sigma0 * model.params().sigma0);
  MomentSystemState next = st;
  next.t = st.t + dt;
  for (int k = 1; k <= st.K; ++k) {
    const double kk = static_cast<double>(k);
    double bracket = kk * mu_bar * st.s[k - 1] - kk * st.s[k] + kk * st.mu_moments[k - 1] * st.s[1];
    if (sign == MomentDriftSign::printed) bracket = -bracket;
    double drift = c * bracket;
    if (k >= 2) drift += half_s2 * kk * (kk - 1.0) * st.s[k - 2];
    const double noise = model.params().sigma0 * kk * st.s[k - 1] * dW;
    next.s[k] = st.s[k] + drift * dt + noise + dXi[k - 1];
  }
  return next;
}

Matrix theta0_cov(const InitialLaw& mu0, int K) {
  check_K(K);
  mu0.validate();
  Matrix cov(static_cast<std::size_t>(K) * K);
  for (int j = 1; j <= K; ++j) {
    for (int k = 1; k <= K; ++k) {
      cov[(j - 1) * K + (k - 1)] = mu0.moment(j + k) - mu0.moment(j) * mu0.moment(k);
    }
  }
  return cov;
}

Matrix xi_rate(std::span<const double> raw_moments, int K, double sigma) {
  check_K(K);
  if (static_cast<int>(raw_moments.size()) < 2 * K - 1)
    throw std::invalid_argument("xi_rate: need raw moments M_0..M_{2K-2}");
  Matrix r(static_cast<std::size_t>(K) * K);
  const double s2 = sigma * sigma;
  for (int j = 1; j <= K; ++j)
    for (int k = 1; k <= K; ++k)
      r[(j - 1) * K + (k - 1)] = s2 * j * k * raw_moments[j + k - 2];
  return r;
}

OracleSamples sample_limit_vector(const std::vector<int>& degrees, const std::vector<double>& times,
                                  int M, std::uint64_t base_seed, const LqModel& model,
                                  const OracleOptions& options) {
  check_K(options.K);
  if (options.n_steps < 10) throw std::invalid_argument("oracle: n_steps must be >= 10");
  if (M < 1) throw std::invalid_argument("oracle: M must be >= 1");
  if (degrees.empty() || times.empty()) throw std::invalid_argument("oracle: empty request");
  for (const int d : degrees)
    if (d < 1 || d > options.K) throw std::invalid_argument("oracle: degree out of range");
  const int K = options.K;
  const int S = options.n_steps;
  const double T = model.params().T;
  const double dt = T / S;
  const double sdt = std::sqrt(dt);
  // Map requested times to step indices.
  std::vector<int> record_at(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double u = times[i] / dt;
    const int idx = static_cast<int>(std::llround(u));
    if (idx < 0 || idx > S || std::fabs(times[i] - idx * dt) > 1e-9)
      throw std::invalid_argument("oracle: requested time is not on the step grid");
    record_at[i] = idx;
  }
  // Central moments of mu_t are independent of the common noise; precompute
  // them per step, raw moments then follow from the realized conditional mean.
  // Orders 0..max(2K-2, 1); the step consumes M_1 even when K = 1.
  const int n_cm = std::max(2 * K - 1, 2);
  std::vector<double> central(static_cast<std::size_t>(S + 1) * n_cm);
  for (int j = 0; j <= S; ++j) {
    const GaussianMixtureLaw mu = model.mu_t(j * dt, 0.0);
    for (int m = 0; m < n_cm; ++m) central[static_cast<std::size_t>(j) * n_cm + m] = mu.central_moment(m);
  }
  const Matrix cov0 = theta0_cov(model.params().mu0, K);
  const Matrix L0 = cholesky(cov0, K);
  const double sigma = model.params().sigma;
  const double sigma0 = model.params().sigma0;
  const double mean0 = model.params().mu0.mean;

  OracleSamples out;
  out.times = times;
  out.degrees = degrees;
  out.M = M;
  const std::size_t cols = times.size() * degrees.size();
  out.values.resize(static_cast<std::size_t>(M) * cols);

#pragma omp parallel for schedule(static)
  for (int rep = 0; rep < M; ++rep) {
    const std::uint64_t key = rng::stream_key(base_seed, static_cast<std::uint64_t>(rep));
    MomentSystemState st;
    st.t = 0.0;
    st.K = K;
    st.s.assign(K + 1, 0.0);
    st.mu_moments.assign(n_cm, 0.0);
    // theta_0 ~ N(0, cov0).
    std::vector<double> z(K);
    for (int k = 0; k < K; ++k)
      z[k] = rng::normal_draw(key, static_cast<std::uint64_t>(k + 1), rng::Stream::theta0, 0);
    for (int j = 1; j <= K; ++j) {
      double acc = 0.0;
      for (int k = 0; k < j; ++k) acc += L0[(j - 1) * K + k] * z[k];
      st.s[j] = acc;
    }
    double w = 0.0;
    std::vector<double> raw(n_cm), dxi(K), zx(K);
    auto record = [&](int step_idx) {
      for (std::size_t ti = 0; ti < times.size(); ++ti) {
        if (record_at[ti] != step_idx) continue;
        for (std::size_t di = 0; di < degrees.size(); ++di)
          out.values[rep * cols + ti * degrees.size() + di] = st.s[degrees[di]];
      }
    };
    record(0);
    for (int j = 0; j < S; ++j) {
      const double mu_bar = mean0 + sigma0 * w;
      const double* cm = central.data() + static_cast<std::size_t>(j) * n_cm;
      for (int m = 0; m < n_cm; ++m) {
        double acc = 0.0;
        for (int i = 0; i <= m; ++i)
          acc += binomial(m, i) * cm[i] * std::pow(mu_bar, m - i);
        raw[m] = acc;
      }
      st.mu_moments = raw;
      const Matrix R = xi_rate(raw, K, sigma);
      const Matrix LR = cholesky(R, K);
      for (int k = 0; k < K; ++k)
        zx[k] = rng::normal_draw(key, static_cast<std::uint64_t>(k + 1), rng::Stream::xi,
                                 static_cast<std::uint64_t>(j));
      for (int a = 0; a < K; ++a) {
        double acc = 0.0;
        for (int b = 0; b <= a; ++b) acc += LR[a * K + b] * zx[b];
        dxi[a] = sdt * acc;
      }
      const double dW = sdt * rng::normal_draw(key, 0, rng::Stream::oracle_w,
                                               static_cast<std::uint64_t>(j));
      st = limit_moment_step(st, dW, dxi, dt, model, options.sign);
      w += dW;
      record(j + 1);
    }
  }
  return out;
}

std::vector<ComparisonRow> compare_distributions(std::span<const double> emp, int m_emp,
                                                 std::span<const double> orc, int m_orc,
                                                 const std::vector<double>& times,
                                                 const std::vector<int>& degrees) {
  if (m_emp < 200 || m_orc < 200)
    throw std::invalid_argument("compare_distributions: need at least 200 replications per side");
  const std::size_t cols = times.size() * degrees.size();
  if (emp.size() != static_cast<std::size_t>(m_emp) * cols ||
      orc.size() != static_cast<std::size_t>(m_orc) * cols)
    throw std::invalid_argument("compare_distributions: shape mismatch");
  const int D = static_cast<int>(degrees.size());
  std::vector<ComparisonRow> rows;
  rows.reserve(cols);
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    // Covariance over the degree block at this time.
    std::vector<double> eblock(static_cast<std::size_t>(m_emp) * D);
    std::vector<double> oblock(static_cast<std::size_t>(m_orc) * D);
    for (int r = 0; r < m_emp; ++r)
      for (int d = 0; d < D; ++d)
        eblock[static_cast<std::size_t>(r) * D + d] = emp[r * cols + ti * D + d];
    for (int r = 0; r < m_orc; ++r)
      for (int d = 0; d < D; ++d)
        oblock[static_cast<std::size_t>(r) * D + d] = orc[r * cols + ti * D + d];
    std::vector<double> em, om;
    Matrix ecov, ocov;
    mean_and_cov(eblock, m_emp, D, em, ecov);
    mean_and_cov(oblock, m_orc, D, om, ocov);
    const double cov_err = frobenius_rel_err(ecov, ocov, D);
    for (int d = 0; d < D; ++d) {
      ComparisonRow row;
      row.time = times[ti];
      row.degree = degrees[d];
      row.cov_rel_err = cov_err;
      std::vector<double> ec(m_emp), oc(m_orc);
      for (int r = 0; r < m_emp; ++r) ec[r] = eblock[static_cast<std::size_t>(r) * D + d];
      for (int r = 0; r < m_orc; ++r) oc[r] = oblock[static_cast<std::size_t>(r) * D + d];
      const MeanSE me = mean_se(ec);
      const MeanSE mo = mean_se(oc);
      row.mean_diff = me.mean - mo.mean;
      row.mean_se = std::sqrt(me.se * me.se + mo.se * mo.se);
      row.ks_stat = ks_statistic(ec, oc);
      row.ks_p = ks_pvalue(row.ks_stat, m_emp, m_orc);
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace mfg
