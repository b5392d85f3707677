#pragma once

// Closed-form overhang thresholds, order-preservation certificates,
// rotating loops, and time scans of the pushed graph.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gnglab/flow.hpp"
#include "gnglab/models.hpp"
#include "gnglab/pushforward.hpp"
#include "gnglab/rate_evolution.hpp"

namespace gnglab {

/// Linearization of the flow at a stationary point (x0, 0).
struct LinearizationData {
  double x0 = 0.0;
  double m = 0.0;     // d2H/dxdp(x0, 0)
  double c = 0.0;     // d2H/dp2(x0, 0)
  double i0_dd = 0.0; // I0''(x0)
};

LinearizationData linearization_data(const ModelSpec& model, const RateFunctionSpec& spec,
                                     double x0);

/// Time at which the pushed graph gets a vertical tangent over x0:
///   -1/(2m) log(1 + (c i0_dd / (2m))^-1)   for m != 0
///   -1/(c i0_dd)                            for m == 0
/// Requires i0_dd < min(-2m/c, 0); otherwise throws Inapplicable.
double linearization_threshold(const LinearizationData& data);

/// Central difference (x_t(x0+dx) - x_t(x0-dx)) / (2 dx) along the pushed graph.
double slope_sign_at(const ModelSpec& model, const RateFunctionSpec& spec, double x0, double t,
                     double dx, const IntegratorConfig& config);

/// Bisection for the time at which slope_sign_at changes sign in [t_lo, t_hi].
double slope_zero_crossing(const ModelSpec& model, const RateFunctionSpec& spec, double x0,
                           double t_lo, double t_hi, double dx, const IntegratorConfig& config,
                           double tol = 1e-6);

struct GraphOptions {
  SamplingOptions sampling;
  RefineOptions refine;
};

/// First time the pushed graph stops being a graph, bracketed to width <= tol.
double overhang_onset(const ModelSpec& model, const RateFunctionSpec& spec, double t_lo,
                      double t_hi, const IntegratorConfig& config, const GraphOptions& options = {},
                      double tol = 1e-3);

enum class RegionKind { Whole, UpperRight, LowerLeft };

/// Whole space, {x >= y, p >= q}, or {x <= y, p <= q}.
struct OrderRegion {
  RegionKind kind = RegionKind::Whole;
  double y = 0.0;
  double q = 0.0;
};

struct OrderCounterexample {
  double x = 0.0;
  double p = 0.0;
  std::string condition;
  double value = 0.0;
};

struct OrderCertificate {
  /// "strict-concavity-in-x", "decreasing-in-both", "third-derivative-sign", or "none".
  std::string criterion;
  bool holds = false;
  std::optional<OrderCounterexample> counterexample;
};

OrderCertificate order_preservation_certificate(const ModelSpec& model, const OrderRegion& region,
                                                std::size_t n_samples);

struct Loop {
  double a = 0.0;
  double b = 0.0;
  double energy = 0.0;
  std::vector<PhasePoint> upper;  // p = h(x), x ascending
  std::vector<PhasePoint> lower;  // p = g(x), x ascending
  std::optional<double> period;
};

/// Level set H = E around the region between two neighbouring stationary
/// points m1 < m2, with E = e_frac times the deepest value of
/// min_p H(x, p) over the middle 60% of (m1, m2).
Loop rotating_loop(const ModelSpec& model, double m1, double m2, double e_frac = 0.5,
                   std::size_t n_points = 201);

/// Same, on the first neighbouring pair of stationary points that qualifies.
Loop rotating_loop(const ModelSpec& model, double e_frac = 0.5);

/// Return time to `start` through a Poincare section, refined by bisection.
double loop_period(const ModelSpec& model, const Loop& loop, PhasePoint start,
                   const IntegratorConfig& config);

struct RecoveryConstants {
  double z = 0.0;
  double kappa = 0.0;
};

/// z = sqrt(1 - 1/alpha), kappa = alpha z - artanh z, for alpha > 1.
RecoveryConstants recovery_constants(double alpha);

struct ScanOptions {
  GraphOptions graph;
  std::size_t grid_n = 201;
  /// Envelope grid; defaults to the state space shrunk by 0.05 (CurieWeiss)
  /// or [-1.5, 1.5] (diffusion) when unset.
  std::optional<Interval> grid;
  /// Called once per scanned time, in time order, with the pushed graph and
  /// its envelope (null when the envelope could not be built).
  std::function<void(const PushForward&, const RateProfile*)> observer;
};

struct TimelineEntry {
  double t = 0.0;
  bool is_graph = true;
  std::vector<OverhangRegion> regions;
  std::vector<NondiffPoint> nondiff;
  std::vector<NondiffPoint> certified;
  std::string error;  // non-empty when the envelope could not be built
};

struct ScenarioTimeline {
  std::vector<TimelineEntry> entries;
  std::optional<double> t0;  // first time with an overhang
  std::optional<double> t1;  // last certified time plus one scan step
  std::optional<double> t2;  // first scanned time after the last overhang
  std::optional<RecoveryConstants> constants;
  std::optional<double> t1_ref;
  bool window_expected = false;
};

Interval default_grid_window(const ModelSpec& model);

/// Push, overhang detection, envelope and certification at every time.
ScenarioTimeline scan_timeline(const ModelSpec& model, const RateFunctionSpec& spec,
                               const std::vector<double>& times, const IntegratorConfig& config,
                               const ScanOptions& options = {});

/// scan_timeline for CurieWeiss beta = h = 0 with CWEntropy data, plus the
/// recovery constants and the reference escape time from the momentum at -z.
ScenarioTimeline recovery_scan(const ModelSpec& model, const RateFunctionSpec& spec,
                               const std::vector<double>& t_grid, const IntegratorConfig& config,
                               const ScanOptions& options = {});

struct HeatingReport {
  LinearizationData data;
  double t0_linearized = 0.0;
  double t1_printed = 0.0;  // NaN when the printed formula is undefined
  bool discrepancy_flag = false;
  double slope_crossing = 0.0;  // NaN when the numerical check found no sign change
};

/// Heating regime: CurieWeiss with alpha > max(beta, 1), beta != 1, theta = h = 0;
/// diffusion with a > max(b, 0), b != 0 for I0 = W_a and potential W_b.
HeatingReport heating_threshold_report(const ModelSpec& model, const RateFunctionSpec& spec,
                                       const IntegratorConfig& config);

}  // namespace gnglab
