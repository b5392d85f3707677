#pragma once

// The graph of I0' sampled, pushed along the Hamiltonian flow, and split
// into branches: maximal runs of samples still alive at time t.

#include <cstddef>
#include <string>
#include <vector>

#include "gnglab/flow.hpp"
#include "gnglab/models.hpp"

namespace gnglab {

struct GraphSample {
  double x0 = 0.0;
  double p0 = 0.0;  // I0'(x0)
  double u0 = 0.0;  // I0(x0)
};

struct SamplingOptions {
  std::size_t n = 256;
  double margin = 1e-6;
  /// Diffusion only: sample where |I0'| <= p_window.
  double p_window = 10.0;
  /// Neighbours whose |dp0| exceeds this get a midpoint inserted.
  double slope_budget = 0.5;
};

std::vector<GraphSample> sample_initial_graph(const RateFunctionSpec& spec, std::size_t n,
                                              double margin);
std::vector<GraphSample> sample_initial_graph(const RateFunctionSpec& spec,
                                              const SamplingOptions& options);

/// One initial sample after pushing to time t.
struct PushedSample {
  GraphSample origin;
  bool alive = true;
  Corner corner = Corner::Plus;  // escape corner when !alive
  double x = 0.0;
  double p = 0.0;
  double u = 0.0;
  int branch = -1;  // -1 for escaped samples
};

struct BranchPoint {
  double x0 = 0.0;
  double x = 0.0;
  double p = 0.0;
  double u = 0.0;
};

struct Branch {
  /// Open x0-interval bounded by the flanking escaped samples (or the
  /// sampled window).
  double origin_lo = 0.0;
  double origin_hi = 0.0;
  std::vector<BranchPoint> points;
  Corner left_limit = Corner::Minus;
  Corner right_limit = Corner::Plus;
};

struct PushForward {
  double t = 0.0;
  Interval state_space;
  std::vector<Branch> branches;
  std::vector<PushedSample> samples;  // every sample, ordered by x0
  double escaped_fraction = 0.0;
  std::vector<std::string> warnings;
};

/// Adaptive refinement of the pushed graph. Midpoints are added between
/// neighbours whose alive/escaped status differs, or whose pushed images are
/// further apart than the budgets, until neighbours are `min_spacing` apart.
struct RefineOptions {
  double x_budget = 0.02;
  double p_budget = 0.25;
  double min_spacing = 1e-10;
  std::size_t max_samples = 40000;
};

PushForward push_graph(const ModelSpec& model, const std::vector<GraphSample>& samples, double t,
                       const IntegratorConfig& config);

/// Refined variant; `spec` supplies the initial data at inserted midpoints.
PushForward push_graph(const ModelSpec& model, const RateFunctionSpec& spec,
                       const std::vector<GraphSample>& samples, double t,
                       const IntegratorConfig& config, const RefineOptions& refine);

/// Pushes the same samples to several times, integrating each trajectory once.
std::vector<PushForward> push_graph_series(const ModelSpec& model,
                                           const std::vector<GraphSample>& samples,
                                           const std::vector<double>& times,
                                           const IntegratorConfig& config);

struct OverhangWitness {
  int branch = 0;
  double p = 0.0;
};

struct OverhangRegion {
  double x_lo = 0.0;
  double x_hi = 0.0;
  double x_witness = 0.0;  // common x at which the witnesses were taken
  std::vector<OverhangWitness> witnesses;
  /// True when the region comes from two different branches overlapping.
  bool cross_branch = false;
};

struct OverhangReport {
  std::vector<OverhangRegion> regions;  // merged, ordered by x_lo
  bool is_graph = true;
};

OverhangReport detect_overhangs(const PushForward& pf);

/// CSV with columns t,x0,p0,x,p,u,branch_id,status.
std::string pushforward_csv(const PushForward& pf);

}  // namespace gnglab
