#pragma once

// Three reconstructions of the evolved rate function I_t on a grid:
// the lower envelope of the pushed graph, a Hopf-Lax dynamic programme over
// the Lagrangian, and a Lax-Friedrichs scheme for dI/dt + H(x, dI/dx) = 0.

#include <cstddef>
#include <string>
#include <vector>

#include "gnglab/models.hpp"
#include "gnglab/pushforward.hpp"

namespace gnglab {

enum class RateMethod { Envelope, HopfLaxDP, FiniteDifference };

const char* rate_method_name(RateMethod m);

struct NondiffPoint {
  double x = 0.0;
  std::vector<double> gradients;  // descending, pairwise apart by >= 1e-4
};

struct RateProfile {
  double t = 0.0;
  RateMethod method = RateMethod::Envelope;
  std::vector<double> xs;
  std::vector<double> values;
  std::vector<double> left_slope;
  std::vector<double> right_slope;
  std::vector<NondiffPoint> nondiff_points;

  // Envelope only: merged overhang intervals of the graph it was built from,
  // and the state space, for the flank test in classify_differentiability.
  std::vector<Interval> overhangs;
  Interval state_space;
};

/// Uniform grid of n points on [lo, hi].
std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

RateProfile envelope(const PushForward& pf, const std::vector<double>& xs);

RateProfile hopf_lax_dp(const ModelSpec& model, const RateFunctionSpec& spec, double t,
                        const std::vector<double>& xs, std::size_t n_steps);

struct FdOptions {
  double cfl = 0.9;
  /// Slope jump (left minus right difference quotient) that flags a kink.
  double kink_threshold = 0.05;
  std::size_t max_steps = 20'000'000;
};

RateProfile hj_fd_solve(const ModelSpec& model, const RateFunctionSpec& spec, double t,
                        const std::vector<double>& xs, const FdOptions& options = {});

/// Nondiff points of an envelope profile lying inside an overhang interval
/// whose flanks are graph-clean, i.e. an interval bounded away from the
/// state-space boundary.
std::vector<NondiffPoint> classify_differentiability(const RateProfile& profile);

/// Max |a - b| over the common grid; the grids must match.
double linf_distance(const RateProfile& a, const RateProfile& b);

/// CSV with columns t,x,I_t,left_slope,right_slope,nondiff_flag.
std::string profile_csv(const RateProfile& p);

}  // namespace gnglab
