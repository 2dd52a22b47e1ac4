#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <omp.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mfg/empirical.hpp"
#include "mfg/particles.hpp"
#include "mfg/summation.hpp"

using namespace mfg;

namespace {

const ModelParams kP = baseline_params();

}  // namespace

TEST_CASE("parallel kernels match the serial reference bit for bit") {
  const LqModel model(kP);
  const TimeGrid grid = TimeGrid::uniform(kP.T, 50);
  omp_set_num_threads(3);
  const auto bundle = make_bundle(11, 4, grid, 37);
  const auto nash = simulate_nash(model, 37, bundle);
  const auto nash_ref = ref::simulate_nash(model, 37, bundle);
  CHECK(nash.states == nash_ref.states);
  const auto mkv = simulate_mkv_proxy(model, 37, bundle);
  const auto mkv_ref = ref::simulate_mkv_proxy(model, 37, bundle);
  CHECK(mkv.states == mkv_ref.states);
  const auto w = bundle.common_cumulative();
  const auto hat = simulate_hat(model, 37, bundle, w);
  const auto hat_ref = ref::simulate_hat(model, 37, bundle, w);
  CHECK(hat.states == hat_ref.states);

  // Thread count does not change results.
  omp_set_num_threads(1);
  const auto nash1 = simulate_nash(model, 37, bundle);
  CHECK(nash1.states == nash.states);
  omp_set_num_threads(3);
}

TEST_CASE("generic mean field kernel reproduces the dedicated one") {
  const LqModel model(kP);
  const TimeGrid grid = TimeGrid::uniform(kP.T, 40);
  const auto bundle = make_bundle(3, 0, grid, 25);
  const auto mkv = simulate_mkv_proxy(model, 25, bundle);
  const auto gen = simulate_generic_mkv(lq_mean_field_drift(model), model, 25, bundle);
  CHECK(gen.states == mkv.states);
}

TEST_CASE("drift Lipschitz probe rejects an understated bound") {
  const LqModel model(kP);
  MeanFieldDrift d;
  d.feature_moments = {1};
  d.fn = [](double, double x, std::span<const double> f) { return 50.0 * (f[0] - x); };
  d.declared_lipschitz = 1.0;
  CHECK_THROWS(d.probe(kP.T));
  d.declared_lipschitz = 50.0;
  CHECK_NOTHROW(d.probe(kP.T));
}

TEST_CASE("empirical mean follows the driving noise exactly (drift cancels)") {
  const LqModel model(kP);
  const int n = 64, S = 500;
  const TimeGrid grid = TimeGrid::uniform(kP.T, S);
  const auto bundle = make_bundle(77, 1, grid, n);
  const auto nash = simulate_nash(model, n, bundle);
  double m = pairwise_mean(nash.row(0), n);
  for (int j = 0; j < S; ++j) {
    const double* dB = bundle.idio.data() + static_cast<std::size_t>(j) * n;
    m += kP.sigma * pairwise_mean(dB, n) + kP.sigma0 * bundle.common[j];
    CHECK(std::fabs(pairwise_mean(nash.row(j + 1), n) - m) < 1e-12);
    m = pairwise_mean(nash.row(j + 1), n);
  }
}

TEST_CASE("initial states share prefixes and hit the two-point atoms") {
  InitialLaw tp{InitialLaw::Kind::two_point, 0.5, 4.0};
  const SeedRecord seed{99, 0};
  const auto a = draw_initial_states(tp, seed, 50);
  const auto b = draw_initial_states(tp, seed, 200);
  for (int i = 0; i < 50; ++i) CHECK(a[i] == b[i]);
  int lo = 0;
  for (const double v : b) {
    CHECK((v == doctest::Approx(-1.5) || v == doctest::Approx(2.5)));
    if (v < 0.5) ++lo;
  }
  CHECK(lo > 60);
  CHECK(lo < 140);
}

TEST_CASE("euler_step formula and input checks") {
  CHECK(euler_step(1.0, 2.0, 0.1, -0.2, kP, 0.01) ==
        doctest::Approx(1.0 + 0.02 + 0.5 * 0.1 - 0.3 * 0.2).epsilon(1e-15));
  CHECK_THROWS_AS(euler_step(std::nan(""), 0.0, 0.0, 0.0, kP, 0.01), std::domain_error);
  CHECK_THROWS_AS(euler_step(0.0, INFINITY, 0.0, 0.0, kP, 0.01), std::domain_error);
}

TEST_CASE("coupled triple shares initial states and the common noise") {
  const LqModel model(kP);
  const TimeGrid grid = TimeGrid::uniform(kP.T, 30);
  const auto bundle = make_bundle(5, 7, grid, 20);
  const auto t = simulate_coupled_triple(model, 20, bundle);
  for (int i = 0; i < 20; ++i) {
    CHECK(t.nash.at(0, i) == t.mkv.at(0, i));
    CHECK(t.nash.at(0, i) == t.hat.at(0, i));
  }
  CHECK(t.nash.tag == SystemTag::nash);
  CHECK(t.mkv.tag == SystemTag::mkv);
  CHECK(t.hat.tag == SystemTag::hat);
}

TEST_CASE("hat marginal at T matches the explicit conditional law") {
  const LqModel model(kP);
  const int n = 20000, S = 500;
  const TimeGrid grid = TimeGrid::uniform(kP.T, S);
  const auto bundle = make_bundle(31337, 0, grid, n);
  const auto w = bundle.common_cumulative();
  const auto hat = simulate_hat(model, n, bundle, w);
  const GaussianMixtureLaw mu = model.mu_t(kP.T, w[S]);
  const EmpiricalMeasure1D m(std::vector<double>(hat.row(S), hat.row(S) + n));
  const double mean_emp = moment(m, 1);
  const double sd = std::sqrt(mu.variance());
  CHECK(std::fabs(mean_emp - mu.mean()) < 4.0 * sd / std::sqrt(static_cast<double>(n)));
  const double var_emp = moment(m, 2) - mean_emp * mean_emp;
  CHECK(std::fabs(var_emp / mu.variance() - 1.0) < 4.0 * std::sqrt(2.0 / n) + 0.01);
  const double m4_emp = moment(m, 4);
  CHECK(std::fabs(m4_emp / mu.moment(4) - 1.0) < 0.08);
}

TEST_CASE("nash-vs-mkv coupling tightens with n") {
  const LqModel model(kP);
  const TimeGrid grid = TimeGrid::uniform(kP.T, 200);
  const int M = 40;
  double prev = 1e300;
  for (const int n : {25, 100, 400}) {
    std::vector<double> y(M);
    for (int r = 0; r < M; ++r) {
      const auto bundle = make_bundle(2, static_cast<std::uint64_t>(r), grid, n);
      const auto nash = simulate_nash(model, n, bundle);
      const auto mkv = simulate_mkv_proxy(model, n, bundle);
      y[r] = path_coupling_stats(nash, mkv).mean_sq_sup;
    }
    const double stat = pairwise_mean(y.data(), M);
    CHECK(stat < prev);
    prev = stat;
  }
}

TEST_CASE("paths CSV has the documented shape") {
  namespace fs = std::filesystem;
  const LqModel model(kP);
  const TimeGrid grid = TimeGrid::uniform(kP.T, 4);
  const auto bundle = make_bundle(1, 0, grid, 3);
  const auto t = simulate_coupled_triple(model, 3, bundle);
  const fs::path dir = fs::temp_directory_path() / "mfg_paths_test";
  fs::create_directories(dir);
  const std::string path = (dir / "p.csv").string();
  dump_paths_csv(t, path);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "step,time,particle,x_nash,x_mkv,x_hat");
  int lines = 0;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) ++lines;
  CHECK(lines == 5 * 3);
  fs::remove_all(dir);
}

TEST_CASE("simulation rejects mismatched bundles") {
  const LqModel model(kP);
  const TimeGrid grid = TimeGrid::uniform(2.0, 16);  // wrong horizon
  const auto bundle = make_bundle(1, 0, grid, 8);
  CHECK_THROWS(simulate_nash(model, 8, bundle));
  const TimeGrid ok = TimeGrid::uniform(kP.T, 16);
  const auto small = make_bundle(1, 0, ok, 8);
  CHECK_THROWS(simulate_nash(model, 16, small));
  CHECK_THROWS(simulate_hat(model, 8, small, std::vector<double>(3, 0.0)));
}
