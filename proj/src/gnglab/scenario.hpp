#pragma once

// Scenario files: a flat section/key text format, validation with
// line-numbered diagnostics, and the runner that writes the artifacts.
//
//   [model]      type = "curie_weiss" (beta, h) | "diffusion" (potential | double_well)
//   [rate0]      type = "cw_entropy" (alpha, theta) | "polynomial" (coeffs | double_well)
//                | "tabulated" (xs, values, derivs, slope_threshold)
//   [times]      values = [...]  or  start, stop, step
//   [grid]       n, margin, p_window, points, lo, hi
//   [integrator] rel_tol, abs_tol, max_step, p_cap, boundary_margin
//   [analysis]   thresholds, onset_bracket, recovery, loop, loop_between, loop_e_frac,
//                compare_times, dp_steps, certificate, certificate_corner, certificate_samples
//   [outputs]    csv_dir, json_path, svg

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gnglab/analysis.hpp"
#include "gnglab/report.hpp"

namespace gnglab {

struct ScenarioAnalysis {
  bool thresholds = false;
  std::optional<std::pair<double, double>> onset_bracket;
  bool recovery = false;
  bool loop = false;
  std::optional<std::pair<double, double>> loop_between;
  double loop_e_frac = 0.5;
  std::vector<double> compare_times;
  // The programme resolves velocities in steps of dx / (t / dp_steps); few
  // steps on a fine grid beat many steps on a coarse one.
  std::size_t dp_steps = 8;
  std::optional<OrderRegion> certificate;
  std::size_t certificate_samples = 64;
};

struct ScenarioOutputs {
  std::string csv_dir;
  std::string json_path;
  bool svg = false;
};

struct ScenarioConfig {
  std::string name;
  std::string description;
  ModelSpec model = ModelSpec::curie_weiss(0.0, 0.0);
  RateFunctionSpec rate0 = RateFunctionSpec::cw_entropy(0.0, 0.0);
  std::vector<double> times;
  SamplingOptions sampling;
  std::size_t grid_points = 201;
  std::optional<Interval> window;
  IntegratorConfig integrator;
  ScenarioAnalysis analysis;
  ScenarioOutputs outputs;
};

/// Parses and validates; Config errors read "<source>:<line>: [section].key: message".
ScenarioConfig parse_scenario(const std::string& text, const std::string& source = "<string>");

ScenarioConfig load_scenario(const std::string& path);

/// Runs every scanned time plus the requested analyses. Writes the CSV, JSON
/// and SVG artifacts named in `outputs` (relative paths resolved against
/// `base_dir` when it is non-empty) and returns the JSON report.
Json run_scenario(const ScenarioConfig& config, const std::string& base_dir = "");

}  // namespace gnglab
