#include "mfg/fluctuation.hpp"

#include <cmath>
#include <stdexcept>

#include "mfg/quadrature.hpp"
#include "mfg/summation.hpp"

namespace mfg {

namespace {

double poly_eval(const std::vector<double>& c, double x) {
  double v = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) v = v * x + c[k];
  return v;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
  if (c.size() <= 1) return {0.0};
  std::vector<double> d(c.size() - 1);
  for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
  return d;
}

TestFunction from_poly(std::string label, std::vector<double> coeffs) {
  TestFunction tf;
  tf.label = std::move(label);
  const auto d1 = poly_derivative(coeffs);
  const auto d2 = poly_derivative(d1);
  tf.f = [coeffs](double x) { return poly_eval(coeffs, x); };
  tf.df = [d1](double x) { return poly_eval(d1, x); };
  tf.d2f = [d2](double x) { return poly_eval(d2, x); };
  tf.poly = std::move(coeffs);
  return tf;
}

}  // namespace

TestFunction TestFunction::monomial(int degree) {
  if (degree < 0 || degree > 16) throw std::invalid_argument("monomial: degree must be in [0, 16]");
  std::vector<double> c(degree + 1, 0.0);
  c[degree] = 1.0;
  return from_poly("x^" + std::to_string(degree), std::move(c));
}

TestFunction TestFunction::hermite(int degree) {
  if (degree < 0 || degree > 16) throw std::invalid_argument("hermite: degree must be in [0, 16]");
  // He_0 = 1, He_1 = x, He_{k+1} = x He_k - k He_{k-1}.
  std::vector<std::vector<double>> he(degree + 1);
  he[0] = {1.0};
  if (degree >= 1) he[1] = {0.0, 1.0};
  for (int k = 1; k < degree; ++k) {
    std::vector<double> next(k + 2, 0.0);
    for (std::size_t j = 0; j < he[k].size(); ++j) next[j + 1] += he[k][j];
    for (std::size_t j = 0; j < he[k - 1].size(); ++j) next[j] -= k * he[k - 1][j];
    he[k + 1] = std::move(next);
  }
  return from_poly("He_" + std::to_string(degree), std::move(he[degree]));
}

TestFunction TestFunction::bump(double center, double width) {
  if (!(width > 0.0)) throw std::invalid_argument("bump: width must be > 0");
  TestFunction tf;
  tf.label = "bump(" + std::to_string(center) + "," + std::to_string(width) + ")";
  // f(x) = exp(1 - 1/(1-u^2)) on |u| < 1 with u = (x-center)/width, else 0;
  // normalized so f(center) = 1.
  auto u_of = [center, width](double x) { return (x - center) / width; };
  tf.f = [u_of](double x) {
    const double u = u_of(x);
    if (std::fabs(u) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
  };
  tf.df = [u_of, width, f = tf.f](double x) {
    const double u = u_of(x);
    if (std::fabs(u) >= 1.0) return 0.0;
    const double w = 1.0 - u * u;
    return f(x) * (-2.0 * u / (w * w)) / width;
  };
  tf.d2f = [u_of, width, f = tf.f](double x) {
    const double u = u_of(x);
    if (std::fabs(u) >= 1.0) return 0.0;
    const double w = 1.0 - u * u;
    const double a = -2.0 * u / (w * w);
    const double da = (-2.0 * w - 8.0 * u * u) / (w * w * w);
    return f(x) * (a * a + da) / (width * width);
  };
  return tf;
}

std::vector<TestFunction> make_test_suite(TestSuiteKind kind, int max_degree) {
  if (max_degree < 1 || max_degree > 6)
    throw std::invalid_argument("make_test_suite: max_degree must be in [1, 6]");
  std::vector<TestFunction> fns;
  switch (kind) {
    case TestSuiteKind::monomials:
      for (int k = 1; k <= max_degree; ++k) fns.push_back(TestFunction::monomial(k));
      break;
    case TestSuiteKind::hermites:
      for (int k = 1; k <= max_degree; ++k) fns.push_back(TestFunction::hermite(k));
      break;
    case TestSuiteKind::bumps:
      for (int k = 0; k < max_degree; ++k)
        fns.push_back(TestFunction::bump(-2.0 + 4.0 * k / std::max(1, max_degree - 1), 1.0));
      break;
  }
  return fns;
}

int lambda_d(int d) {
  if (d < 1) throw std::invalid_argument("lambda_d: d must be >= 1");
  return d / 2 + 1;
}

FluctuationSample fluctuation_values(const ParticlePaths& paths, std::span<const double> w_path,
                                     const std::vector<TestFunction>& fns,
                                     const std::vector<double>& times, const LqModel& model) {
  if (static_cast<int>(w_path.size()) != paths.grid.n_steps + 1)
    throw std::invalid_argument("fluctuation_values: w_path size mismatch");
  if (fns.empty() || times.empty()) throw std::invalid_argument("fluctuation_values: empty request");
  FluctuationSample out;
  out.replication_id = paths.seed_record.replication_id;
  out.n = paths.n_particles;
  out.times = times;
  for (const auto& f : fns) out.labels.push_back(f.label);
  out.values.resize(times.size() * fns.size());
  const double sqn = std::sqrt(static_cast<double>(paths.n_particles));
  std::vector<double> buf(paths.n_particles);
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const int idx = paths.grid.index_of(times[ti]);
    if (idx < 0) throw std::invalid_argument("fluctuation_values: requested time is not on the grid");
    const GaussianMixtureLaw mu = model.mu_t(times[ti], w_path[idx]);
    const double* x = paths.row(idx);
    for (std::size_t fi = 0; fi < fns.size(); ++fi) {
      const TestFunction& tf = fns[fi];
      for (int i = 0; i < paths.n_particles; ++i) buf[i] = tf.f(x[i]);
      const double emp = pairwise_mean(buf.data(), buf.size());
      double ref;
      if (tf.poly) {
        ref = 0.0;
        for (std::size_t k = 0; k < tf.poly->size(); ++k)
          if ((*tf.poly)[k] != 0.0) ref += (*tf.poly)[k] * mu.moment(static_cast<int>(k));
      } else {
        ref = mixture_expectation(mu, tf.f);
      }
      out.values[ti * fns.size() + fi] = sqn * (emp - ref);
    }
  }
  return out;
}

void fluctuation_csv(std::span<const FluctuationSample> samples, std::ostream& os) {
  os << "replication,time,testfn_label,value\n";
  char line[128];
  for (const auto& s : samples) {
    for (std::size_t ti = 0; ti < s.times.size(); ++ti) {
      for (std::size_t fi = 0; fi < s.labels.size(); ++fi) {
        std::snprintf(line, sizeof(line), "%llu,%.17g,",
                      static_cast<unsigned long long>(s.replication_id), s.times[ti]);
        os << line << s.labels[fi];
        std::snprintf(line, sizeof(line), ",%.17g\n", s.at(static_cast<int>(ti), static_cast<int>(fi)));
        os << line;
      }
    }
  }
}

double sobolev_norm(const SobolevGridFn& g, int j, double alpha) {
  if (j < 0 || j > 4) throw std::invalid_argument("sobolev_norm: j must be in [0, 4]");
  if (!(alpha >= 0.0)) throw std::invalid_argument("sobolev_norm: alpha must be >= 0");
  const std::size_t np = g.values.size();
  if (np < 9 || np % 2 == 0 || !(g.extent > 0.0))
    throw std::invalid_argument("sobolev_norm: need an odd-sized grid on [-extent, extent]");
  double fmax = 0.0;
  for (const double v : g.values) fmax = std::max(fmax, std::fabs(v));
  if (fmax == 0.0) return 0.0;
  if (std::fabs(g.values.front()) > 1e-6 * fmax || std::fabs(g.values.back()) > 1e-6 * fmax)
    throw std::invalid_argument("sobolev_norm: function has not decayed at the grid edge");
  const double h = 2.0 * g.extent / static_cast<double>(np - 1);
  std::vector<double> cur = g.values;
  double total = 0.0;
  for (int order = 0; order <= j; ++order) {
    // Trapezoid rule for int |D^order g|^2 / (1 + |x|^{2 alpha}) dx.
    double acc = 0.0;
    for (std::size_t i = 0; i < np; ++i) {
      const double x = -g.extent + h * static_cast<double>(i);
      const double w = 1.0 / (1.0 + std::pow(std::fabs(x), 2.0 * alpha));
      const double c = (i == 0 || i == np - 1) ? 0.5 : 1.0;
      acc += c * cur[i] * cur[i] * w;
    }
    total += acc * h;
    if (order == j) break;
    // Central difference with zero padding outside the grid.
    std::vector<double> next(np);
    for (std::size_t i = 0; i < np; ++i) {
      const double up = i + 1 < np ? cur[i + 1] : 0.0;
      const double dn = i >= 1 ? cur[i - 1] : 0.0;
      next[i] = (up - dn) / (2.0 * h);
    }
    cur = std::move(next);
  }
  return std::sqrt(total);
}

}  // namespace mfg
