#include "mfg/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mfg/rng.hpp"
#include "mfg/summation.hpp"

namespace mfg {

namespace {

double pow_int(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace

EmpiricalMeasure1D::EmpiricalMeasure1D(std::vector<double> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) throw std::invalid_argument("EmpiricalMeasure1D: no samples");
  for (const double v : samples_)
    if (!std::isfinite(v)) throw std::invalid_argument("EmpiricalMeasure1D: non-finite sample");
}

const std::vector<double>& EmpiricalMeasure1D::sorted() const {
  if (sorted_.empty()) {
    sorted_ = samples_;
    std::sort(sorted_.begin(), sorted_.end());
  }
  return sorted_;
}

double wasserstein_1d(int p, const EmpiricalMeasure1D& a, const EmpiricalMeasure1D& b) {
  if (p != 1 && p != 2) throw std::invalid_argument("wasserstein_1d: p must be 1 or 2");
  if (a.size() != b.size())
    throw std::invalid_argument("wasserstein_1d: sample counts differ (only the equal-count case is supported)");
  const auto& sa = a.sorted();
  const auto& sb = b.sorted();
  Neumaier acc;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double d = std::fabs(sa[i] - sb[i]);
    acc.add(p == 1 ? d : d * d);
  }
  const double mean = acc.value() / static_cast<double>(sa.size());
  return p == 1 ? mean : std::sqrt(mean);
}

double moment(const EmpiricalMeasure1D& m, int k) {
  if (k < 0 || k > 16) throw std::invalid_argument("moment: order must be in [0, 16]");
  const auto& s = m.sorted();
  Neumaier acc;
  for (const double v : s) acc.add(pow_int(v, k));
  return acc.value() / static_cast<double>(s.size());
}

PathCouplingStats path_coupling_stats(const ParticlePaths& a, const ParticlePaths& b) {
  if (a.n_particles != b.n_particles || a.grid.n_steps != b.grid.n_steps)
    throw std::invalid_argument("path_coupling_stats: shape mismatch");
  const int n = a.n_particles;
  const int S = a.grid.n_steps;
  std::vector<double> sup(n, 0.0);
  for (int j = 0; j <= S; ++j) {
    const double* xa = a.row(j);
    const double* xb = b.row(j);
    for (int i = 0; i < n; ++i) {
      const double d = std::fabs(xa[i] - xb[i]);
      if (d > sup[i]) sup[i] = d;
    }
  }
  std::vector<double> sup_sq(n);
  for (int i = 0; i < n; ++i) sup_sq[i] = sup[i] * sup[i];
  PathCouplingStats out;
  out.mean_sup = pairwise_mean(sup.data(), n);
  out.mean_sq_sup = pairwise_mean(sup_sq.data(), n);
  out.w2_final = wasserstein_1d(2, EmpiricalMeasure1D(std::vector<double>(a.row(S), a.row(S) + n)),
                                EmpiricalMeasure1D(std::vector<double>(b.row(S), b.row(S) + n)));
  return out;
}

double MeasureFunctional::value(const std::vector<double>& samples) const {
  if (samples.empty()) throw std::invalid_argument("MeasureFunctional: no samples");
  Neumaier acc;
  for (const double x : samples) acc.add(psi(x));
  return h(acc.value() / static_cast<double>(samples.size()));
}

double MeasureFunctional::reference(const InitialLaw& mu0) const { return h(psi_mean(mu0)); }

MeasureFunctional mean_functional() {
  MeasureFunctional f;
  f.label = "mean";
  f.h = [](double y) { return y; };
  f.dh = [](double) { return 1.0; };
  f.d2h = [](double) { return 0.0; };
  f.psi = [](double x) { return x; };
  f.psi_mean = [](const InitialLaw& mu0) { return mu0.mean; };
  f.dh_bound = 1.0;
  f.d2h_bound = 0.0;
  return f;
}

MeasureFunctional tanh_mean_functional() {
  MeasureFunctional f;
  f.label = "tanh_mean";
  f.h = [](double y) { return std::tanh(y); };
  f.dh = [](double y) {
    const double c = std::cosh(y);
    return 1.0 / (c * c);
  };
  f.d2h = [](double y) {
    const double t = std::tanh(y), c = std::cosh(y);
    return -2.0 * t / (c * c);
  };
  f.psi = [](double x) { return x; };
  f.psi_mean = [](const InitialLaw& mu0) { return mu0.mean; };
  f.dh_bound = 1.0;
  f.d2h_bound = 0.7698003589195010;  // 4 / (3 sqrt(3))
  return f;
}

MeasureFunctional constant_functional(double c) {
  MeasureFunctional f;
  f.label = "constant";
  f.h = [c](double) { return c; };
  f.dh = [](double) { return 0.0; };
  f.d2h = [](double) { return 0.0; };
  f.psi = [](double x) { return x; };
  f.psi_mean = [](const InitialLaw&) { return 0.0; };
  f.dh_bound = 0.0;
  f.d2h_bound = 0.0;
  return f;
}

L4Estimate l4_functional_error(const MeasureFunctional& f, const InitialLaw& mu0, int n, int M,
                               std::uint64_t base_seed) {
  if (n < 1 || M < 2) throw std::invalid_argument("l4_functional_error: need n >= 1, M >= 2");
  mu0.validate();
  const double ref = f.reference(mu0);
  std::vector<double> y4(M);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < M; ++r) {
    const std::uint64_t key = rng::stream_key(base_seed, static_cast<std::uint64_t>(r));
    Neumaier acc;
    for (int i = 0; i < n; ++i)
      acc.add(f.psi(mu0.sample(rng::uniform_draw(key, static_cast<std::uint64_t>(i), rng::Stream::iid, 0))));
    const double d = f.h(acc.value() / static_cast<double>(n)) - ref;
    const double d2 = d * d;
    y4[r] = d2 * d2;
  }
  const double mean4 = pairwise_mean(y4.data(), M);
  std::vector<double> dev(M);
  for (int r = 0; r < M; ++r) {
    const double d = y4[r] - mean4;
    dev[r] = d * d;
  }
  const double var4 = pairwise_sum(dev.data(), M) / static_cast<double>(M - 1);
  const double se4 = std::sqrt(var4 / M);
  L4Estimate out;
  out.value = std::pow(mean4, 0.25);
  // Delta method for the quarter power.
  out.se = mean4 > 0.0 ? 0.25 * std::pow(mean4, -0.75) * se4 : 0.0;
  return out;
}

}  // namespace mfg
