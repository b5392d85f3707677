#include "gnglab/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gnglab/error.hpp"

namespace gnglab {

namespace {

constexpr std::size_t kRootScanPoints = 10000;
constexpr double kRootTol = 1e-12;
constexpr double kNewtonBracketStart = 5.0;
constexpr double kNewtonBracketMax = 50.0;

void check_state(const ModelSpec& model, double x, const char* op) {
  if (!std::isfinite(x) || (model.is_curie_weiss() && (x < -1.0 || x > 1.0))) {
    std::ostringstream os;
    os << op << ": x = " << x << " outside the state space of " << model.describe();
    fail(ErrorCode::Domain, os.str());
  }
}

std::string format_coeffs(const std::vector<double>& c) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < c.size(); ++i) os << (i ? ", " : "") << c[i];
  os << ']';
  return os.str();
}

}  // namespace

ModelSpec ModelSpec::curie_weiss(double beta, double h) {
  if (!(beta >= 0.0) || !std::isfinite(beta) || !std::isfinite(h))
    fail(ErrorCode::Config, "curie_weiss: beta must be finite and >= 0, h finite");
  ModelSpec m;
  m.kind_ = ModelKind::CurieWeiss;
  m.beta_ = beta;
  m.h_ = h;
  return m;
}

ModelSpec ModelSpec::diffusion(std::vector<double> w_coeffs) {
  Polynomial w(std::move(w_coeffs));
  if (w.degree() < 2 || w.degree() % 2 != 0 || !(w.leading() > 0.0))
    fail(ErrorCode::Config,
         "diffusion: W must have even degree >= 2 with positive leading coefficient, got " +
             format_coeffs(w.coeffs()));
  ModelSpec m;
  m.kind_ = ModelKind::Diffusion;
  m.w_ = w;
  m.dw_ = w.derivative();
  m.d2w_ = m.dw_.derivative();
  m.d3w_ = m.d2w_.derivative();
  return m;
}

Interval ModelSpec::state_space() const {
  if (is_curie_weiss()) return {-1.0, 1.0};
  return {};
}

std::string ModelSpec::describe() const {
  std::ostringstream os;
  if (is_curie_weiss())
    os << "CurieWeiss(beta=" << beta_ << ", h=" << h_ << ')';
  else
    os << "Diffusion(W=" << format_coeffs(w_.coeffs()) << ')';
  return os.str();
}

double velocity(const ModelSpec& model, double x, double p) {
  if (model.is_curie_weiss()) {
    const double s = model.beta() * x + model.h() + 2.0 * p;
    return 2.0 * std::sinh(s) - 2.0 * x * std::cosh(s);
  }
  return p - model.drift()(x);
}

double hamiltonian(const ModelSpec& model, double x, double p) {
  check_state(model, x, "hamiltonian");
  if (model.is_curie_weiss()) {
    const double s = model.beta() * x + model.h() + p;
    return 2.0 * std::sinh(p) * (std::sinh(s) - x * std::cosh(s));
  }
  return 0.5 * p * p - p * model.drift()(x);
}

HamiltonianDerivatives derivatives(const ModelSpec& model, double x, double p) {
  check_state(model, x, "derivatives");
  HamiltonianDerivatives d;
  if (model.is_curie_weiss()) {
    const double b = model.beta();
    const double s1 = b * x + model.h() + p;
    const double s2 = s1 + p;
    const double sp = std::sinh(p);
    const double sh1 = std::sinh(s1), ch1 = std::cosh(s1);
    const double sh2 = std::sinh(s2), ch2 = std::cosh(s2);
    d.dHdp = 2.0 * sh2 - 2.0 * x * ch2;
    d.dHdx = -2.0 * sp * ((1.0 - b) * ch1 + b * x * sh1);
    d.d2Hdxdp = 2.0 * (b - 1.0) * ch2 - 2.0 * b * x * sh2;
    d.d2Hdx2 = -2.0 * b * sp * ((2.0 - b) * sh1 + b * x * ch1);
    d.d2Hdp2 = 4.0 * ch2 - 4.0 * x * sh2;
    return d;
  }
  const double w1 = model.drift()(x);
  const double w2 = model.drift_d1()(x);
  const double w3 = model.drift_d2()(x);
  d.dHdp = p - w1;
  d.dHdx = -p * w2;
  d.d2Hdxdp = -w2;
  d.d2Hdx2 = -p * w3;
  d.d2Hdp2 = 1.0;
  return d;
}

LagrangianValue lagrangian(const ModelSpec& model, double x, double v) {
  check_state(model, x, "lagrangian");
  if (model.is_curie_weiss() && !(x > -1.0 && x < 1.0)) {
    std::ostringstream os;
    os << "lagrangian: x = " << x << " must be strictly interior";
    fail(ErrorCode::Domain, os.str());
  }
  auto f = [&](double p) { return velocity(model, x, p) - v; };

  double lo = -kNewtonBracketStart, hi = kNewtonBracketStart;
  double flo = f(lo), fhi = f(hi);
  while (!(flo <= 0.0 && fhi >= 0.0)) {
    if (hi >= kNewtonBracketMax) {
      std::ostringstream os;
      os << "lagrangian: velocity v = " << v << " not reachable at x = " << x
         << " with |p| <= " << kNewtonBracketMax;
      fail(ErrorCode::UnboundedVelocity, os.str());
    }
    lo = std::max(2.0 * lo, -kNewtonBracketMax);
    hi = std::min(2.0 * hi, kNewtonBracketMax);
    flo = f(lo);
    fhi = f(hi);
  }

  // Newton on a monotone function, falling back to bisection whenever the
  // Newton iterate leaves the current bracket.
  double p = 0.0;
  if (p < lo || p > hi) p = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double fp = f(p);
    if (fp == 0.0) break;
    if (fp < 0.0)
      lo = p;
    else
      hi = p;
    const double slope = derivatives(model, x, p).d2Hdp2;
    double next = p - fp / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - p);
    p = next;
    if (step <= 1e-15 * (1.0 + std::abs(p)) || hi - lo <= 1e-15 * (1.0 + std::abs(p))) break;
  }
  LagrangianValue out;
  out.p_star = p;
  out.value = std::max(0.0, p * v - hamiltonian(model, x, p));
  return out;
}

std::vector<double> stationary_points(const ModelSpec& model) {
  auto f = [&](double x) { return velocity(model, x, 0.0); };
  std::vector<double> roots;
  if (model.is_curie_weiss()) {
    roots = scan_roots(f, -1.0, 1.0, kRootScanPoints, kRootTol);
    std::erase_if(roots, [](double r) { return !(r > -1.0 && r < 1.0); });
  } else {
    const double r = model.drift().root_bound();
    roots = scan_roots(f, -r, r, kRootScanPoints, kRootTol);
  }
  std::erase_if(roots, [&](double r) { return std::abs(f(r)) > 1e-10; });
  return roots;
}

// ---------------------------------------------------------------------------
// Initial rate functions

RateFunctionSpec RateFunctionSpec::cw_entropy(double alpha, double theta) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha) || !std::isfinite(theta))
    fail(ErrorCode::Config, "cw_entropy: alpha must be finite and >= 0, theta finite");
  RateFunctionSpec s;
  s.kind_ = RateKind::CWEntropy;
  s.alpha_ = alpha;
  s.theta_ = theta;
  s.normalize();
  return s;
}

RateFunctionSpec RateFunctionSpec::polynomial(std::vector<double> coeffs) {
  Polynomial w(std::move(coeffs));
  if (w.degree() < 2 || w.degree() % 2 != 0 || !(w.leading() > 0.0))
    fail(ErrorCode::Config,
         "polynomial rate function: needs even degree >= 2 and positive leading "
         "coefficient so that I0' diverges at both ends, got " +
             format_coeffs(w.coeffs()));
  RateFunctionSpec s;
  s.kind_ = RateKind::Polynomial;
  s.poly_ = w;
  s.dpoly_ = w.derivative();
  s.d2poly_ = s.dpoly_.derivative();
  s.normalize();
  return s;
}

RateFunctionSpec RateFunctionSpec::tabulated(std::vector<double> xs, std::vector<double> values,
                                             std::vector<double> derivs,
                                             double slope_threshold) {
  const std::size_t n = xs.size();
  if (n < 4 || values.size() != n || derivs.size() != n)
    fail(ErrorCode::Config, "tabulated rate function: need >= 4 rows of (x, I0, I0')");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(values[i]) || !std::isfinite(derivs[i]))
      fail(ErrorCode::Config, "tabulated rate function: non-finite entry in row " +
                                  std::to_string(i));
    if (i > 0 && !(xs[i] > xs[i - 1]))
      fail(ErrorCode::Config, "tabulated rate function: x must be strictly increasing (row " +
                                  std::to_string(i) + ")");
  }
  const double vmin = *std::min_element(values.begin(), values.end());
  if (std::abs(vmin) > 1e-12)
    fail(ErrorCode::Config, "tabulated rate function: minimum of I0 samples must be 0");
  if (!(derivs.front() <= -slope_threshold) || !(derivs.back() >= slope_threshold)) {
    std::ostringstream os;
    os << "tabulated rate function: I0' must diverge at the boundary (outermost slopes "
       << derivs.front() << ", " << derivs.back() << " must exceed +-" << slope_threshold << ')';
    fail(ErrorCode::Config, os.str());
  }

  RateFunctionSpec s;
  s.kind_ = RateKind::Tabulated;
  s.tx_ = std::move(xs);
  s.td_ = std::move(derivs);

  // Fritsch-Carlson tangents for the derivative samples.
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    delta[i] = (s.td_[i + 1] - s.td_[i]) / (s.tx_[i + 1] - s.tx_[i]);
  s.tm_.assign(n, 0.0);
  s.tm_[0] = delta[0];
  s.tm_[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) {
      s.tm_[i] = 0.0;
    } else {
      const double h0 = s.tx_[i] - s.tx_[i - 1], h1 = s.tx_[i + 1] - s.tx_[i];
      const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
      s.tm_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  // Anchors: exact antiderivative of the interpolated derivative, pinned to
  // the first supplied value.
  s.tv_.assign(n, values.front());
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = s.tx_[i + 1] - s.tx_[i];
    s.tv_[i + 1] = s.tv_[i] + h * (0.5 * s.td_[i] + h * s.tm_[i] / 12.0 + 0.5 * s.td_[i + 1] -
                                   h * s.tm_[i + 1] / 12.0);
  }
  const double amin = *std::min_element(s.tv_.begin(), s.tv_.end());
  for (double& a : s.tv_) a -= amin;
  s.c_ = 0.0;
  return s;
}

Interval RateFunctionSpec::domain() const {
  switch (kind_) {
    case RateKind::CWEntropy:
      return {-1.0, 1.0};
    case RateKind::Polynomial:
      return {};
    case RateKind::Tabulated:
      return {tx_.front(), tx_.back()};
  }
  return {};
}

std::string RateFunctionSpec::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case RateKind::CWEntropy:
      os << "CWEntropy(alpha=" << alpha_ << ", theta=" << theta_ << ')';
      break;
    case RateKind::Polynomial:
      os << "Polynomial(" << format_coeffs(poly_.coeffs()) << ')';
      break;
    case RateKind::Tabulated:
      os << "Tabulated(" << tx_.size() << " rows on [" << tx_.front() << ", " << tx_.back()
         << "])";
      break;
  }
  return os.str();
}

RateValue RateFunctionSpec::raw(double x) const {
  RateValue r;
  switch (kind_) {
    case RateKind::CWEntropy: {
      const double a = 1.0 - x, b = 1.0 + x;
      const double ent_a = a > 0.0 ? 0.5 * a * std::log(a) : 0.0;
      const double ent_b = b > 0.0 ? 0.5 * b * std::log(b) : 0.0;
      r.value = ent_a + ent_b - 0.5 * alpha_ * x * x - theta_ * x;
      r.deriv = std::atanh(x) - alpha_ * x - theta_;
      r.second_deriv = 1.0 / (a * b) - alpha_;
      break;
    }
    case RateKind::Polynomial: {
      r.value = poly_(x);
      r.deriv = dpoly_(x);
      r.second_deriv = d2poly_(x);
      break;
    }
    case RateKind::Tabulated: {
      const auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
      std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - tx_.begin() - 1));
      i = std::min(i, tx_.size() - 2);
      const double h = tx_[i + 1] - tx_[i];
      const double s = (x - tx_[i]) / h;
      const double s2 = s * s, s3 = s2 * s, s4 = s3 * s;
      const double d0 = td_[i], d1 = td_[i + 1], m0 = tm_[i] * h, m1 = tm_[i + 1] * h;
      r.deriv = (2 * s3 - 3 * s2 + 1) * d0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * d1 +
                (s3 - s2) * m1;
      r.second_deriv = ((6 * s2 - 6 * s) * d0 + (3 * s2 - 4 * s + 1) * m0 +
                        (-6 * s2 + 6 * s) * d1 + (3 * s2 - 2 * s) * m1) /
                       h;
      r.value = tv_[i] + h * ((0.5 * s4 - s3 + s) * d0 + (0.25 * s4 - 2.0 * s3 / 3.0 + 0.5 * s2) * m0 +
                              (-0.5 * s4 + s3) * d1 + (0.25 * s4 - s3 / 3.0) * m1);
      break;
    }
  }
  return r;
}

void RateFunctionSpec::normalize() {
  auto deriv = [this](double x) { return raw(x).deriv; };
  double lowest = kInf;
  if (kind_ == RateKind::CWEntropy) {
    lowest = std::min(raw(-1.0).value, raw(1.0).value);
    const double edge = 1.0 - 1e-12;
    for (double r : scan_roots(deriv, -edge, edge, kRootScanPoints, kRootTol))
      lowest = std::min(lowest, raw(r).value);
  } else {
    const double bound = poly_.derivative().root_bound();
    for (double r : scan_roots(deriv, -bound, bound, kRootScanPoints, kRootTol))
      lowest = std::min(lowest, raw(r).value);
  }
  c_ = -lowest;
}

RateValue rate0(const RateFunctionSpec& spec, double x) {
  const Interval dom = spec.domain();
  const bool inside = spec.kind() == RateKind::Tabulated ? dom.contains(x)
                                                         : (std::isfinite(x) && dom.contains_open(x));
  if (!inside) {
    std::ostringstream os;
    os << "rate0: x = " << x << " outside the interior of the domain of " << spec.describe();
    fail(ErrorCode::Domain, os.str());
  }
  RateValue r = spec.raw(x);
  r.value += spec.normalization();
  return r;
}

std::vector<double> double_well(double d) { return {0.0, 0.0, -0.5 * d, 0.0, 0.25}; }

}  // namespace gnglab
