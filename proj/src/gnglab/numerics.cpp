#include "gnglab/numerics.hpp"

#include <algorithm>
#include <utility>

namespace gnglab {

double bisect(const std::function<double(double)>& f, double a, double b,
              double tol, int max_iter) {
  double fa = f(a);
  if (fa == 0.0) return a;
  double fb = f(b);
  if (fb == 0.0) return b;
  for (int i = 0; i < max_iter && std::abs(b - a) > tol; ++i) {
    const double mid = 0.5 * (a + b);
    if (mid == a || mid == b) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
      fb = fm;
    }
  }
  return 0.5 * (a + b);
}

std::vector<double> scan_roots(const std::function<double(double)>& f,
                               double lo, double hi, std::size_t n,
                               double tol) {
  std::vector<double> roots;
  if (n < 2) return roots;
  const double dx = (hi - lo) / static_cast<double>(n - 1);
  double x_prev = lo;
  double f_prev = f(lo);
  if (f_prev == 0.0) roots.push_back(lo);
  for (std::size_t i = 1; i < n; ++i) {
    const double x = (i + 1 == n) ? hi : lo + dx * static_cast<double>(i);
    const double fx = f(x);
    if (fx == 0.0) {
      roots.push_back(x);
    } else if (f_prev != 0.0 && (fx < 0.0) != (f_prev < 0.0)) {
      roots.push_back(bisect(f, x_prev, x, tol));
    }
    x_prev = x;
    f_prev = fx;
  }
  return roots;
}

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::derivative() const {
  if (coeffs_.size() <= 1) return Polynomial{};
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i)
    d[i - 1] = coeffs_[i] * static_cast<double>(i);
  return Polynomial(std::move(d));
}

int Polynomial::degree() const { return static_cast<int>(coeffs_.size()) - 1; }

double Polynomial::leading() const { return coeffs_.empty() ? 0.0 : coeffs_.back(); }

double Polynomial::root_bound() const {
  if (coeffs_.size() <= 1) return 0.0;
  const double lead = std::abs(coeffs_.back());
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < coeffs_.size(); ++i)
    m = std::max(m, std::abs(coeffs_[i]) / lead);
  return 1.0 + m;
}

double hermite_value(double x, double x0, double x1, double f0, double f1,
                     double d0, double d1) {
  const double h = x1 - x0;
  if (h == 0.0) return f0;
  const double s = (x - x0) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
}

}  // namespace gnglab
