#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mfg/empirical.hpp"
#include "mfg/rng.hpp"
#include "mfg/summation.hpp"

using namespace mfg;

TEST_CASE("wasserstein distances on hand-checkable inputs") {
  EmpiricalMeasure1D a({0.0, 1.0, 2.0});
  EmpiricalMeasure1D b({0.5, 1.5, 2.5});
  CHECK(wasserstein_1d(1, a, b) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(wasserstein_1d(2, a, b) == doctest::Approx(0.5).epsilon(1e-14));

  // Order of the raw samples is irrelevant.
  EmpiricalMeasure1D b2({2.5, 0.5, 1.5});
  CHECK(wasserstein_1d(2, a, b2) == doctest::Approx(0.5).epsilon(1e-14));

  // A pure shift by c has W_p = |c| for all p.
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  std::vector<double> x(500), y(500);
  for (int i = 0; i < 500; ++i) {
    x[i] = nd(gen);
    y[i] = x[i] - 0.8;
  }
  EmpiricalMeasure1D ma(x), mb(y);
  CHECK(wasserstein_1d(1, ma, mb) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(wasserstein_1d(2, ma, mb) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(wasserstein_1d(2, ma, ma) == 0.0);
  CHECK_THROWS(wasserstein_1d(3, a, b));
  CHECK_THROWS(wasserstein_1d(1, a, EmpiricalMeasure1D({0.0, 1.0})));
}

TEST_CASE("moments are order independent and exact on small sets") {
  EmpiricalMeasure1D m({3.0, -1.0, 2.0, 0.0});
  CHECK(moment(m, 0) == doctest::Approx(1.0));
  CHECK(moment(m, 1) == doctest::Approx(1.0));
  CHECK(moment(m, 2) == doctest::Approx(3.5));
  EmpiricalMeasure1D perm({0.0, 2.0, 3.0, -1.0});
  for (int k = 1; k <= 6; ++k) CHECK(moment(m, k) == moment(perm, k));
}

TEST_CASE("functional probes match declared derivative bounds") {
  const auto t = tanh_mean_functional();
  CHECK(t.h(0.3) == doctest::Approx(std::tanh(0.3)).epsilon(1e-15));
  // Central differences against the declared derivatives.
  for (const double v : {-1.2, -0.3, 0.0, 0.7, 2.1}) {
    const double e = 1e-5;
    const double fd1 = (t.h(v + e) - t.h(v - e)) / (2 * e);
    const double fd2 = (t.h(v + e) - 2 * t.h(v) + t.h(v - e)) / (e * e);
    CHECK(std::fabs(fd1 - t.dh(v)) < 1e-8);
    CHECK(std::fabs(fd2 - t.d2h(v)) < 1e-5);
    CHECK(std::fabs(t.dh(v)) <= t.dh_bound + 1e-12);
    CHECK(std::fabs(t.d2h(v)) <= t.d2h_bound + 1e-12);
  }
  const auto m = mean_functional();
  CHECK(m.value({1.0, 2.0, 6.0}) == doctest::Approx(3.0).epsilon(1e-15));
  const InitialLaw g{InitialLaw::Kind::gaussian, 0.4, 2.0};
  CHECK(m.reference(g) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(t.reference(g) == doctest::Approx(std::tanh(0.4)).epsilon(1e-15));
  const auto c = constant_functional(2.5);
  CHECK(c.value({9.0, -3.0}) == doctest::Approx(2.5));
  CHECK(c.reference(g) == doctest::Approx(2.5));
}

TEST_CASE("L4 error of the plain mean matches the closed form") {
  // For h = id, psi = x: E |m_n - mu|^4 = (kappa4/n^3) + 3 (n-1) v^2 / n^3.
  const InitialLaw g{InitialLaw::Kind::gaussian, 0.0, 1.0};
  const int M = 4000;
  for (const int n : {50, 200}) {
    const auto est = l4_functional_error(mean_functional(), g, n, M, 314159);
    const double v = 1.0;
    const double exact4 = (3.0 * v * v + 3.0 * (n - 1.0) * v * v) / (static_cast<double>(n) * n * n);
    const double exact = std::pow(exact4, 0.25);
    CHECK(std::fabs(est.value - exact) < 3.5 * est.se + 1e-12);
    CHECK(est.se > 0.0);
    CHECK(est.se < 0.2 * est.value);
  }
}

TEST_CASE("L4 error decreases along an n ladder") {
  const InitialLaw g{InitialLaw::Kind::gaussian, 0.3, 1.5};
  double prev = 1e300;
  for (const int n : {25, 100, 400, 1600}) {
    const auto est = l4_functional_error(tanh_mean_functional(), g, n, 800, 2718);
    CHECK(est.value < prev);
    prev = est.value;
  }
}

TEST_CASE("path coupling stats on constructed paths") {
  TimeGrid grid = TimeGrid::uniform(1.0, 2);
  ParticlePaths a, b;
  a.grid = b.grid = grid;
  a.n_particles = b.n_particles = 2;
  // Rows are [step][particle].
  a.states = {0.0, 0.0, 1.0, 0.0, 0.5, 0.0};
  b.states = {0.0, 0.0, 0.0, 0.0, 0.0, 3.0};
  const auto s = path_coupling_stats(a, b);
  // Particle 0: sup |diff| = 1, particle 1: sup = 3.
  CHECK(s.mean_sq_sup == doctest::Approx((1.0 + 9.0) / 2).epsilon(1e-14));
  CHECK(s.mean_sup == doctest::Approx(2.0).epsilon(1e-14));
  // Final rows {0.5, 0} vs {0, 3}: sorted pairing gives (0,0) and (0.5,3).
  CHECK(s.w2_final == doctest::Approx(std::sqrt(2.5 * 2.5 / 2)).epsilon(1e-14));
  ParticlePaths c = b;
  c.n_particles = 3;
  CHECK_THROWS(path_coupling_stats(a, c));
}

TEST_CASE("sorted accessor caches a nondestructive copy") {
  EmpiricalMeasure1D m({2.0, 1.0, 3.0});
  const auto& s = m.sorted();
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(m.samples()[0] == 2.0);
  CHECK(&m.sorted() == &s);
}
