#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mfg/clt_oracle.hpp"
#include "mfg/summation.hpp"

using namespace mfg;

namespace {

const ModelParams kP = baseline_params();

double column_var(const OracleSamples& s, int ti, int di) {
  std::vector<double> v(s.M);
  for (int r = 0; r < s.M; ++r) v[r] = s.at(r, ti, di);
  const double m = pairwise_mean(v.data(), s.M);
  double acc = 0.0;
  for (const double x : v) acc += (x - m) * (x - m);
  return acc / (s.M - 1);
}

}  // namespace

TEST_CASE("theta0 covariance is the centered monomial covariance") {
  const InitialLaw g{InitialLaw::Kind::gaussian, 0.4, 1.3};
  const auto cov = theta0_cov(g, 3);
  for (int j = 1; j <= 3; ++j)
    for (int k = 1; k <= 3; ++k)
      CHECK(cov[(j - 1) * 3 + (k - 1)] ==
            doctest::Approx(g.moment(j + k) - g.moment(j) * g.moment(k)).epsilon(1e-12));
  // Degree-1 entry is the plain variance.
  CHECK(cov[0] == doctest::Approx(1.3).epsilon(1e-13));
  CHECK_THROWS(theta0_cov(g, 0));
  CHECK_THROWS(theta0_cov(g, 7));
}

TEST_CASE("xi rate matches its formula and checks input length") {
  const std::vector<double> raw = {1.0, 0.2, 1.1, 0.5, 2.9};  // M_0..M_4
  const auto r = xi_rate(raw, 3, 0.5);
  for (int j = 1; j <= 3; ++j)
    for (int k = 1; k <= 3; ++k)
      CHECK(r[(j - 1) * 3 + (k - 1)] ==
            doctest::Approx(0.25 * j * k * raw[j + k - 2]).epsilon(1e-14));
  CHECK_THROWS(xi_rate(std::vector<double>{1.0, 0.2}, 3, 0.5));
}

TEST_CASE("moment step: degree-1 drift cancels and dXi enters linearly") {
  const LqModel model(kP);
  MomentSystemState st;
  st.t = 0.3;
  st.K = 2;
  st.s = {0.0, 0.5, -0.3};
  st.mu_moments = {1.0, 0.7};  // M_0, M_1
  const double dt = 0.01, dW = 0.02;
  const std::vector<double> zero = {0.0, 0.0};
  const auto base = limit_moment_step(st, dW, zero, dt, model, MomentDriftSign::derived);
  // k = 1: bracket = mu_bar s_0 - s_1 + M_0 s_1 = 0, noise = sigma0 * s_0 * dW = 0.
  CHECK(base.s[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(base.t == doctest::Approx(0.31));
  // Martingale increments add on verbatim.
  const std::vector<double> dxi = {0.125, -0.25};
  const auto bumped = limit_moment_step(st, dW, dxi, dt, model, MomentDriftSign::derived);
  CHECK(bumped.s[1] == doctest::Approx(base.s[1] + 0.125).epsilon(1e-14));
  CHECK(bumped.s[2] == doctest::Approx(base.s[2] - 0.25).epsilon(1e-14));
  // The printed sign mirrors the c(t)-bracket only.
  const auto printed = limit_moment_step(st, dW, zero, dt, model, MomentDriftSign::printed);
  CHECK(printed.s[1] == doctest::Approx(base.s[1]).epsilon(1e-14));
  const double noise2 = kP.sigma0 * 2.0 * st.s[1] * dW;
  const double d_derived = base.s[2] - st.s[2] - noise2;
  const double d_printed = printed.s[2] - st.s[2] - noise2;
  CHECK(d_printed == doctest::Approx(-d_derived).epsilon(1e-12));
  // Determinism.
  const auto again = limit_moment_step(st, dW, dxi, dt, model, MomentDriftSign::derived);
  CHECK(again.s == bumped.s);
  // Input validation.
  MomentSystemState bad = st;
  bad.s[0] = 0.1;
  CHECK_THROWS(limit_moment_step(bad, dW, zero, dt, model, MomentDriftSign::derived));
  MomentSystemState short_mu = st;
  short_mu.mu_moments = {1.0};
  CHECK_THROWS(limit_moment_step(short_mu, dW, zero, dt, model, MomentDriftSign::derived));
}

TEST_CASE("K = 1 runs and keeps the exact variance law") {
  // s_1 is theta_0 plus a sigma^2-rate martingale: Var s_1(t) = Var(mu0) + sigma^2 t.
  const LqModel model(kP);
  OracleOptions opt;
  opt.K = 1;
  opt.n_steps = 400;
  const std::vector<double> times = {0.5, 1.0};
  const auto s = sample_limit_vector({1}, times, 2000, 777, model, opt);
  for (int ti = 0; ti < 2; ++ti) {
    const double expect = 1.0 + kP.sigma * kP.sigma * times[ti];
    const double v = column_var(s, ti, 0);
    CHECK(std::fabs(v / expect - 1.0) < 3.5 * std::sqrt(2.0 / (s.M - 1)));
  }
  // Mean stays at zero.
  std::vector<double> col(s.M);
  for (int r = 0; r < s.M; ++r) col[r] = s.at(r, 1, 0);
  const auto ms = mean_se(col);
  CHECK(std::fabs(ms.mean) < 4.0 * ms.se);
}

TEST_CASE("variance law survives with higher degrees in the system") {
  const LqModel model(kP);
  OracleOptions opt;
  opt.K = 3;
  opt.n_steps = 400;
  const auto s = sample_limit_vector({1, 2, 3}, {kP.T}, 1500, 101, model, opt);
  const double expect = 1.0 + kP.sigma * kP.sigma * kP.T;
  CHECK(std::fabs(column_var(s, 0, 0) / expect - 1.0) < 3.5 * std::sqrt(2.0 / (s.M - 1)));
}

TEST_CASE("printed sign inflates the degree-2 variance") {
  const LqModel model(kP);
  OracleOptions derived, printed;
  derived.K = printed.K = 2;
  derived.n_steps = printed.n_steps = 400;
  printed.sign = MomentDriftSign::printed;
  const auto sd = sample_limit_vector({2}, {kP.T}, 600, 555, model, derived);
  const auto sp = sample_limit_vector({2}, {kP.T}, 600, 555, model, printed);
  CHECK(column_var(sp, 0, 0) > 5.0 * column_var(sd, 0, 0));
}

TEST_CASE("oracle samples are deterministic and respect request bounds") {
  const LqModel model(kP);
  OracleOptions opt;
  opt.K = 2;
  opt.n_steps = 50;
  const auto a = sample_limit_vector({1, 2}, {0.5, 1.0}, 25, 9, model, opt);
  const auto b = sample_limit_vector({1, 2}, {0.5, 1.0}, 25, 9, model, opt);
  CHECK(a.values == b.values);
  CHECK(a.values.size() == 25u * 4u);
  CHECK_THROWS(sample_limit_vector({3}, {1.0}, 10, 9, model, opt));       // degree > K
  CHECK_THROWS(sample_limit_vector({1}, {0.123}, 10, 9, model, opt));     // off-grid time
  CHECK_THROWS(sample_limit_vector({}, {1.0}, 10, 9, model, opt));        // empty request
}

TEST_CASE("oracle is jointly gaussian without common noise, a mixture with it") {
  // With sigma0 = 0 the moment system is linear in Gaussian inputs with
  // deterministic coefficients, so the samples are exactly jointly Gaussian.
  ModelParams p0 = kP;
  p0.sigma0 = 0.0;
  const LqModel quiet(p0);
  OracleOptions opt;
  opt.K = 2;
  opt.n_steps = 300;
  const auto s = sample_limit_vector({1, 2}, {kP.T}, 1500, 2024, quiet, opt);
  const auto m = mardia(s.values, s.M, 2);
  CHECK(m.skewness_p > 0.005);
  CHECK(m.kurtosis_p > 0.005);
  // Common noise makes the law a Gaussian mixture over W paths; the
  // kurtosis test picks up the heavier tails.
  const LqModel noisy(kP);
  const auto sn = sample_limit_vector({1, 2}, {kP.T}, 1500, 2024, noisy, opt);
  const auto mn = mardia(sn.values, sn.M, 2);
  CHECK(mn.kurtosis_p < 0.005);
}

TEST_CASE("compare_distributions accepts equal laws and rejects tiny samples") {
  const LqModel model(kP);
  OracleOptions opt;
  opt.K = 2;
  opt.n_steps = 300;
  const std::vector<double> times = {0.5, 1.0};
  const std::vector<int> degs = {1, 2};
  const auto a = sample_limit_vector(degs, times, 1200, 11, model, opt);
  const auto b = sample_limit_vector(degs, times, 1200, 12, model, opt);
  const auto rows = compare_distributions(a.values, a.M, b.values, b.M, times, degs);
  REQUIRE(rows.size() == 4);
  int ks_ok = 0;
  for (const auto& r : rows) {
    CHECK(std::fabs(r.mean_diff) < 4.0 * r.mean_se);
    CHECK(r.cov_rel_err < 0.15);
    if (r.ks_p > 0.01) ++ks_ok;
  }
  CHECK(ks_ok >= 3);
  CHECK_THROWS(compare_distributions(a.values, a.M, std::vector<double>(150 * 4, 0.0), 150, times,
                                     degs));
}
