#include "mfg/model_lq.hpp"

#include <cmath>
#include <stdexcept>

#include "mfg/rng.hpp"

namespace mfg {

namespace {

constexpr int kMaxMoment = 16;

double binomial(int k, int j) {
  double c = 1.0;
  for (int i = 1; i <= j; ++i) c = c * (k - j + i) / i;
  return c;
}

// E[Z^j] for Z standard normal: (j-1)!! for even j, 0 for odd j.
double std_normal_moment(int j) {
  if (j % 2 == 1) return 0.0;
  double m = 1.0;
  for (int i = j - 1; i > 1; i -= 2) m *= i;
  return m;
}

// E[(m + s Z)^k].
double gaussian_raw_moment(double m, double s, int k) {
  double acc = 0.0;
  for (int j = 0; j <= k; j += 2) {
    acc += binomial(k, j) * std::pow(m, k - j) * std::pow(s, j) * std_normal_moment(j);
  }
  return acc;
}

void check_moment_order(int k) {
  if (k < 0 || k > kMaxMoment) throw std::invalid_argument("moment order must be in [0, 16]");
}

struct RiccatiCoeffs {
  double beta;   // b_bar + q
  double a;      // 1 - 1/n^2
  double gamma;  // eps - q^2
};

RiccatiCoeffs riccati_coeffs(NLabel n, const ModelParams& p) {
  return {p.b_bar + p.q, n.one_minus_inv_sq(), p.eps - p.q * p.q};
}

// phi' (t) = 2 beta phi + a phi^2 - gamma, phi(T) = g_bar.
double riccati_rhs_backward(double psi, const RiccatiCoeffs& c) {
  // psi(s) = phi(T - s)
  return c.gamma - 2.0 * c.beta * psi - c.a * psi * psi;
}

}  // namespace

NLabel NLabel::of(long n) {
  if (n < 1) throw std::invalid_argument("NLabel: n must be >= 1");
  NLabel l;
  l.finite = true;
  l.n = n;
  return l;
}

NLabel NLabel::inf() {
  NLabel l;
  l.finite = false;
  l.n = 0;
  return l;
}

void InitialLaw::validate() const {
  if (!std::isfinite(mean) || !std::isfinite(var) || var < 0.0)
    throw std::invalid_argument("InitialLaw: mean must be finite and var >= 0");
}

double InitialLaw::sample(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("InitialLaw::sample: u must be in (0,1)");
  const double s = std::sqrt(var);
  switch (kind) {
    case Kind::gaussian:
      return mean + s * rng::normal_inv_cdf(u);
    case Kind::two_point:
      return u < 0.5 ? mean - s : mean + s;
  }
  throw std::logic_error("InitialLaw: bad kind");
}

double InitialLaw::moment(int k) const {
  check_moment_order(k);
  const double s = std::sqrt(var);
  switch (kind) {
    case Kind::gaussian:
      return gaussian_raw_moment(mean, s, k);
    case Kind::two_point:
      return 0.5 * (std::pow(mean - s, k) + std::pow(mean + s, k));
  }
  throw std::logic_error("InitialLaw: bad kind");
}

double InitialLaw::central_moment(int k) const {
  check_moment_order(k);
  const double s = std::sqrt(var);
  switch (kind) {
    case Kind::gaussian:
      return gaussian_raw_moment(0.0, s, k);
    case Kind::two_point:
      return k % 2 == 0 ? std::pow(s, k) : 0.0;
  }
  throw std::logic_error("InitialLaw: bad kind");
}

void ModelParams::validate() const {
  if (!(b_bar > 0.0)) throw std::invalid_argument("ModelParams: b_bar must be > 0");
  if (!(eps > 0.0)) throw std::invalid_argument("ModelParams: eps must be > 0");
  if (!(g_bar > 0.0)) throw std::invalid_argument("ModelParams: g_bar must be > 0");
  if (!(q * q <= eps)) throw std::invalid_argument("ModelParams: need q^2 <= eps");
  if (!(sigma > 0.0)) throw std::invalid_argument("ModelParams: sigma must be > 0");
  if (!(sigma0 >= 0.0)) throw std::invalid_argument("ModelParams: sigma0 must be >= 0");
  if (!(T > 0.0)) throw std::invalid_argument("ModelParams: T must be > 0");
  mu0.validate();
}

void to_json(nlohmann::json& j, const ModelParams& p) {
  j = nlohmann::json{{"b_bar", p.b_bar}, {"q", p.q},         {"eps", p.eps},
                     {"g_bar", p.g_bar}, {"sigma", p.sigma}, {"sigma0", p.sigma0},
                     {"T", p.T}};
  j["mu0"] = {{"kind", p.mu0.kind == InitialLaw::Kind::gaussian ? "gaussian" : "two-point"},
              {"mean", p.mu0.mean},
              {"var", p.mu0.var}};
}

void from_json(const nlohmann::json& j, ModelParams& p) {
  p.b_bar = j.at("b_bar").get<double>();
  p.q = j.at("q").get<double>();
  p.eps = j.at("eps").get<double>();
  p.g_bar = j.at("g_bar").get<double>();
  p.sigma = j.at("sigma").get<double>();
  p.sigma0 = j.at("sigma0").get<double>();
  p.T = j.at("T").get<double>();
  const auto& m = j.at("mu0");
  const std::string kind = m.at("kind").get<std::string>();
  if (kind == "gaussian") {
    p.mu0.kind = InitialLaw::Kind::gaussian;
  } else if (kind == "two-point" || kind == "two_point") {
    p.mu0.kind = InitialLaw::Kind::two_point;
  } else {
    throw std::invalid_argument("mu0.kind must be 'gaussian' or 'two-point'");
  }
  p.mu0.mean = m.at("mean").get<double>();
  p.mu0.var = m.at("var").get<double>();
  p.validate();
}

ModelParams baseline_params() {
  ModelParams p;
  p.b_bar = 1.0;
  p.q = 0.5;
  p.eps = 1.0;
  p.g_bar = 0.3;
  p.sigma = 0.5;
  p.sigma0 = 0.3;
  p.T = 1.0;
  p.mu0 = InitialLaw{InitialLaw::Kind::gaussian, 0.0, 1.0};
  return p;
}

double phi_closed_form(double t, NLabel n, const ModelParams& p) {
  if (!(p.q * p.q <= p.eps)) throw std::domain_error("phi_closed_form: need q^2 <= eps");
  if (t < 0.0 || t > p.T) throw std::out_of_range("phi_closed_form: t outside [0, T]");
  const RiccatiCoeffs c = riccati_coeffs(n, p);
  const double disc = c.beta * c.beta + c.a * c.gamma;
  const double theta = 2.0 * std::sqrt(disc);
  const double tau = p.T - t;
  if (theta * p.T < 1e-6) {
    // Roots nearly coincide; the closed form is 0/0, integrate instead.
    const int steps = 4000;
    double psi = p.g_bar;
    const double h = tau / steps;
    for (int i = 0; i < steps; ++i) {
      const double k1 = riccati_rhs_backward(psi, c);
      const double k2 = riccati_rhs_backward(psi + 0.5 * h * k1, c);
      const double k3 = riccati_rhs_backward(psi + 0.5 * h * k2, c);
      const double k4 = riccati_rhs_backward(psi + h * k3, c);
      psi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return psi;
  }
  const double dplus = -c.beta + 0.5 * theta;
  const double dminus = -c.beta - 0.5 * theta;
  const double u = -std::expm1(-theta * tau);  // 1 - e^{-theta tau}, stable for all tau
  const double num = c.gamma * u + p.g_bar * (theta + dminus * u);
  const double den = theta - dplus * u + p.g_bar * c.a * u;
  return num / den;
}

RiccatiCurve riccati_ode_oracle(NLabel n, const ModelParams& p, int steps) {
  if (steps < 100) throw std::invalid_argument("riccati_ode_oracle: steps must be >= 100");
  const RiccatiCoeffs c = riccati_coeffs(n, p);
  RiccatiCurve out;
  out.n_label = n;
  out.grid.resize(steps + 1);
  out.values.resize(steps + 1);
  const double h = p.T / steps;
  // psi(s) = phi(T - s), integrated forward from psi(0) = g_bar.
  double psi = p.g_bar;
  out.values[steps] = psi;
  for (int i = 0; i < steps; ++i) {
    const double k1 = riccati_rhs_backward(psi, c);
    const double k2 = riccati_rhs_backward(psi + 0.5 * h * k1, c);
    const double k3 = riccati_rhs_backward(psi + 0.5 * h * k2, c);
    const double k4 = riccati_rhs_backward(psi + h * k3, c);
    psi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(psi)) throw std::runtime_error("riccati_ode_oracle: blow-up");
    out.values[steps - 1 - i] = psi;
  }
  for (int i = 0; i <= steps; ++i) out.grid[i] = i * h;
  return out;
}

double coupling_gap(long n, const ModelParams& p, int grid_steps) {
  if (grid_steps < 1) throw std::invalid_argument("coupling_gap: grid_steps must be >= 1");
  const NLabel nl = NLabel::of(n);
  const double w = nl.one_minus_inv();
  double sup = 0.0;
  for (int i = 0; i <= grid_steps; ++i) {
    const double t = p.T * i / grid_steps;
    const double d = std::fabs(w * phi_closed_form(t, nl, p) - phi_closed_form(t, NLabel::inf(), p));
    if (d > sup) sup = d;
  }
  return sup;
}

double drift_rate_nash(double t, long n, const ModelParams& p) {
  const NLabel nl = NLabel::of(n);
  return p.b_bar + p.q + nl.one_minus_inv() * phi_closed_form(t, nl, p);
}

double drift_rate_mkv(double t, const ModelParams& p) {
  return p.b_bar + p.q + phi_closed_form(t, NLabel::inf(), p);
}

double master_value(double t, double x, double mbar, const ModelParams& p) {
  const double phi = phi_closed_form(t, NLabel::inf(), p);
  const double d = mbar - x;
  return 0.5 * phi * d * d;
}

GaussianMixtureLaw::GaussianMixtureLaw(std::vector<GaussianComponent> comps) : comps_(std::move(comps)) {
  if (comps_.empty()) throw std::invalid_argument("GaussianMixtureLaw: no components");
  double wsum = 0.0;
  for (const auto& c : comps_) {
    if (!(c.weight > 0.0) || !std::isfinite(c.mean) || !(c.sd >= 0.0))
      throw std::invalid_argument("GaussianMixtureLaw: bad component");
    wsum += c.weight;
  }
  if (std::fabs(wsum - 1.0) > 1e-12) throw std::invalid_argument("GaussianMixtureLaw: weights must sum to 1");
}

double GaussianMixtureLaw::mean() const {
  double m = 0.0;
  for (const auto& c : comps_) m += c.weight * c.mean;
  return m;
}

double GaussianMixtureLaw::variance() const {
  const double m = mean();
  double v = 0.0;
  for (const auto& c : comps_) v += c.weight * (c.sd * c.sd + (c.mean - m) * (c.mean - m));
  return v;
}

double GaussianMixtureLaw::density(double x) const {
  constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  double d = 0.0;
  for (const auto& c : comps_) {
    if (c.sd <= 0.0) throw std::logic_error("GaussianMixtureLaw::density: point-mass component");
    const double z = (x - c.mean) / c.sd;
    d += c.weight * kInvSqrt2Pi / c.sd * std::exp(-0.5 * z * z);
  }
  return d;
}

double GaussianMixtureLaw::moment(int k) const {
  check_moment_order(k);
  double m = 0.0;
  for (const auto& c : comps_) m += c.weight * gaussian_raw_moment(c.mean, c.sd, k);
  return m;
}

double GaussianMixtureLaw::central_moment(int k) const {
  check_moment_order(k);
  const double mu = mean();
  double m = 0.0;
  for (const auto& c : comps_) m += c.weight * gaussian_raw_moment(c.mean - mu, c.sd, k);
  return m;
}

LqModel::LqModel(ModelParams p, int curve_steps) : p_(std::move(p)), steps_(curve_steps) {
  p_.validate();
  if (steps_ < 1000) throw std::invalid_argument("LqModel: curve_steps must be >= 1000");
  h_ = p_.T / steps_;
  ell_.resize(steps_ + 1);
  jint_.resize(steps_ + 1);
  // RK4 on (I, J)' = (c(t), exp(2 I)) with I = int_0^t c; on the pure
  // quadrature component this reduces to composite Simpson, so the curves are
  // accurate to ~1e-13 relative at the default resolution.
  double I = 0.0, J = 0.0;
  ell_[0] = 1.0;
  jint_[0] = 0.0;
  auto c = [this](double t) { return drift_rate_mkv(t, p_); };
  for (int i = 0; i < steps_; ++i) {
    const double t = i * h_;
    const double c1 = c(t), c2 = c(t + 0.5 * h_), c4 = c(t + h_);
    const double kI1 = c1, kJ1 = std::exp(2.0 * I);
    const double kI2 = c2, kJ2 = std::exp(2.0 * (I + 0.5 * h_ * kI1));
    const double kI3 = c2, kJ3 = std::exp(2.0 * (I + 0.5 * h_ * kI2));
    const double kI4 = c4, kJ4 = std::exp(2.0 * (I + h_ * kI3));
    J += h_ / 6.0 * (kJ1 + 2.0 * kJ2 + 2.0 * kJ3 + kJ4);
    I += h_ / 6.0 * (kI1 + 2.0 * kI2 + 2.0 * kI3 + kI4);
    ell_[i + 1] = std::exp(-I);
    jint_[i + 1] = J;
  }
}

double LqModel::curve_at(const std::vector<double>& c, double t) const {
  if (t < -1e-12 || t > p_.T + 1e-12) throw std::out_of_range("LqModel: t outside [0, T]");
  const double u = t / h_;
  const auto i = static_cast<long>(std::llround(u));
  if (i >= 0 && i <= steps_ && std::fabs(t - i * h_) <= 1e-9) return c[static_cast<std::size_t>(i)];
  const auto lo = static_cast<std::size_t>(u);
  const double w = u - static_cast<double>(lo);
  return (1.0 - w) * c[lo] + w * c[lo + 1];
}

double LqModel::ell(double t) const { return curve_at(ell_, t); }

double LqModel::variance_integral(double t) const { return curve_at(jint_, t); }

GaussianMixtureLaw LqModel::mu_t(double t, double w) const {
  const double l = ell(t);
  const double extra = p_.sigma * p_.sigma * l * l * variance_integral(t);
  const double shift = (1.0 - l) * p_.mu0.mean + p_.sigma0 * w;
  std::vector<GaussianComponent> comps;
  switch (p_.mu0.kind) {
    case InitialLaw::Kind::gaussian: {
      const double v = l * l * p_.mu0.var + extra;
      comps.push_back({1.0, l * p_.mu0.mean + shift, std::sqrt(v)});
      break;
    }
    case InitialLaw::Kind::two_point: {
      const double s = std::sqrt(p_.mu0.var);
      const double sd = std::sqrt(extra);
      comps.push_back({0.5, l * (p_.mu0.mean - s) + shift, sd});
      comps.push_back({0.5, l * (p_.mu0.mean + s) + shift, sd});
      break;
    }
  }
  return GaussianMixtureLaw(std::move(comps));
}

GaussianMixtureLaw mu_t_explicit(double t, double w, const ModelParams& p) {
  return LqModel(p).mu_t(t, w);
}

}  // namespace mfg
