#pragma once

// Closed-form Hamiltonians for the two mean-field models and the initial
// rate-function families evolved under them.
//
//   Curie-Weiss (state space [-1, 1]), Glauber rates at inverse temperature
//   beta and field h:
//     H(x, p) = v+(x) (e^{2p} - 1) + v-(x) (e^{-2p} - 1)
//             = 2 sinh(p) [sinh(beta x + h + p) - x cosh(beta x + h + p)]
//
//   Diffusion (state space R) in a polynomial potential W:
//     H(x, p) = p^2 / 2 - p W'(x)

#include <string>
#include <vector>

#include "gnglab/numerics.hpp"

namespace gnglab {

enum class ModelKind { CurieWeiss, Diffusion };

class ModelSpec {
 public:
  static ModelSpec curie_weiss(double beta, double h);
  /// `w_coeffs` are the coefficients of W, low-to-high degree.
  static ModelSpec diffusion(std::vector<double> w_coeffs);

  ModelKind kind() const { return kind_; }
  bool is_curie_weiss() const { return kind_ == ModelKind::CurieWeiss; }
  double beta() const { return beta_; }
  double h() const { return h_; }
  const Polynomial& potential() const { return w_; }
  const Polynomial& drift() const { return dw_; }    // W'
  const Polynomial& drift_d1() const { return d2w_; }  // W''
  const Polynomial& drift_d2() const { return d3w_; }  // W'''
  Interval state_space() const;
  std::string describe() const;

 private:
  ModelSpec() = default;

  ModelKind kind_ = ModelKind::CurieWeiss;
  double beta_ = 0.0;
  double h_ = 0.0;
  Polynomial w_, dw_, d2w_, d3w_;
};

struct HamiltonianDerivatives {
  double dHdx = 0.0;
  double dHdp = 0.0;
  double d2Hdx2 = 0.0;
  double d2Hdxdp = 0.0;
  double d2Hdp2 = 0.0;
};

double hamiltonian(const ModelSpec& model, double x, double p);
HamiltonianDerivatives derivatives(const ModelSpec& model, double x, double p);
/// Velocity dH/dp alone; the hot path of Legendre solves and stationary scans.
double velocity(const ModelSpec& model, double x, double p);

struct LagrangianValue {
  double value = 0.0;
  double p_star = 0.0;
};

/// L(x, v) = sup_p (p v - H(x, p)), solved by safeguarded Newton on
/// dH/dp(x, p) = v. Throws UnboundedVelocity when |p*| would exceed 50.
LagrangianValue lagrangian(const ModelSpec& model, double x, double v);

/// Interior roots of dH/dp(x, 0), ascending.
std::vector<double> stationary_points(const ModelSpec& model);

enum class RateKind { CWEntropy, Polynomial, Tabulated };

struct RateValue {
  double value = 0.0;
  double deriv = 0.0;
  double second_deriv = 0.0;
};

class RateFunctionSpec {
 public:
  /// I0(x) = (1-x)/2 log(1-x) + (1+x)/2 log(1+x) - alpha x^2 / 2 - theta x + C.
  static RateFunctionSpec cw_entropy(double alpha, double theta);
  /// I0(x) = W_a(x) + C with W_a given low-to-high degree.
  static RateFunctionSpec polynomial(std::vector<double> coeffs);
  /// Samples of (x, I0, I0'); interpolated with a monotone cubic for I0' and
  /// its exact antiderivative for I0. `slope_threshold` is the magnitude the
  /// outermost derivative samples must exceed.
  static RateFunctionSpec tabulated(std::vector<double> xs, std::vector<double> values,
                                    std::vector<double> derivs,
                                    double slope_threshold = 5.0);

  RateKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double theta() const { return theta_; }
  const Polynomial& polynomial_part() const { return poly_; }
  double normalization() const { return c_; }
  /// Open set on which I0 and I0' are finite.
  Interval domain() const;
  std::string describe() const;

  RateValue raw(double x) const;  // no domain check, no C added

 private:
  RateFunctionSpec() = default;
  void normalize();

  RateKind kind_ = RateKind::CWEntropy;
  double alpha_ = 0.0;
  double theta_ = 0.0;
  Polynomial poly_, dpoly_, d2poly_;
  std::vector<double> tx_, tv_, td_, tm_;  // tabulated nodes, anchors, slopes, pchip tangents
  double c_ = 0.0;
};

RateValue rate0(const RateFunctionSpec& spec, double x);

/// Builds W_d(x) = x^4/4 - d x^2/2, the double-well family used for the
/// diffusion scenarios.
std::vector<double> double_well(double d);

}  // namespace gnglab
