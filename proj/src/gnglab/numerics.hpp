#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace gnglab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool contains_open(double x) const { return x > lo && x < hi; }
};

/// Bisection on a sign change of f over [a, b]; f(a) and f(b) must differ
/// in sign (zero endpoints are returned directly).
double bisect(const std::function<double(double)>& f, double a, double b,
              double tol = 1e-12, int max_iter = 200);

/// All sign changes of f on a uniform grid of n points over [lo, hi],
/// refined by bisection. Grid nodes where f is exactly zero count as roots.
std::vector<double> scan_roots(const std::function<double(double)>& f,
                               double lo, double hi, std::size_t n,
                               double tol = 1e-12);

/// Dense polynomial with coefficients ordered low-to-high degree.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);

  double operator()(double x) const;
  Polynomial derivative() const;
  int degree() const;
  double leading() const;
  const std::vector<double>& coeffs() const { return coeffs_; }

  /// Cauchy bound: every real root lies in [-R, R].
  double root_bound() const;

 private:
  std::vector<double> coeffs_;
};

/// Cubic Hermite interpolation on [x0, x1] with values and slopes at both ends.
double hermite_value(double x, double x0, double x1, double f0, double f1,
                     double d0, double d1);

}  // namespace gnglab
