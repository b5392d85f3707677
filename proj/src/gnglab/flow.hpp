#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gnglab/error.hpp"
#include "gnglab/models.hpp"

namespace gnglab {

struct PhasePoint {
  double x = 0.0;
  double p = 0.0;
};

/// The two points added at infinity: (left boundary, -inf) and (right boundary, +inf).
enum class Corner { Minus = -1, Plus = 1 };

inline int sign_of(Corner c) { return c == Corner::Plus ? 1 : -1; }
inline const char* corner_name(Corner c) { return c == Corner::Plus ? "+" : "-"; }

class ExtendedPoint {
 public:
  static ExtendedPoint interior(PhasePoint q) { return ExtendedPoint(q); }
  static ExtendedPoint corner(Corner c) { return ExtendedPoint(c); }

  bool is_corner() const { return std::holds_alternative<Corner>(v_); }
  PhasePoint point() const { return std::get<PhasePoint>(v_); }
  Corner corner() const { return std::get<Corner>(v_); }

 private:
  explicit ExtendedPoint(PhasePoint q) : v_(q) {}
  explicit ExtendedPoint(Corner c) : v_(c) {}
  std::variant<PhasePoint, Corner> v_;
};

struct IntegratorConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.1;
  /// Momentum magnitude at which an outward-moving trajectory counts as escaped.
  double p_cap = 30.0;
  /// Starts closer than this to the Curie-Weiss boundary are rejected.
  double boundary_margin = 1e-9;

  void validate() const;
};

struct FlowSample {
  double t = 0.0;
  double x = 0.0;
  double p = 0.0;
  double u = 0.0;
  double energy = 0.0;
};

struct FlowResult {
  std::vector<FlowSample> samples;
  bool escaped = false;
  Corner corner = Corner::Plus;
  double escape_time = kInf;
  double energy_drift = 0.0;

  const FlowSample& last() const { return samples.back(); }
};

/// State of one characteristic at a requested observation time.
struct Checkpoint {
  bool alive = false;
  Corner corner = Corner::Plus;  // meaningful when !alive
  double x = 0.0;
  double p = 0.0;
  double u = 0.0;
  double energy = 0.0;
};

/// Raised when the step size underflows without an escape classification.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double t, PhasePoint last_good)
      : Error(ErrorCode::IntegrationFailure, what), t_(t), state_(last_good) {}

  double time() const { return t_; }
  PhasePoint last_good_state() const { return state_; }

 private:
  double t_;
  PhasePoint state_;
};

/// Integrates Hamilton's equations xdot = dH/dp, pdot = -dH/dx jointly with
/// the action u' = p xdot - H from `start` to `t_end`, or until escape.
FlowResult integrate(const ModelSpec& model, PhasePoint start, double u0, double t_end,
                     const IntegratorConfig& config);

/// Same integration, reporting only the state at each of `times` (ascending,
/// all >= 0). Entries after an escape are marked dead with the escape corner.
std::vector<Checkpoint> integrate_checkpoints(const ModelSpec& model, PhasePoint start, double u0,
                                              std::span<const double> times,
                                              const IntegratorConfig& config);

/// Maximal existence time; +inf when still alive at the 1e3 horizon.
double escape_time(const ModelSpec& model, PhasePoint start, const IntegratorConfig& config);

/// The flow extended to the two corners, which are fixed points.
ExtendedPoint extended_flow(const ModelSpec& model, double t, ExtendedPoint point,
                            const IntegratorConfig& config);

/// Energy evaluated in the integrator's internal coordinates; accurate near
/// the Curie-Weiss boundary where the x-form cancels catastrophically.
double chart_energy(const ModelSpec& model, double chart, double p);
/// CSV with columns t,x,p,u,H.
std::string flow_csv(const FlowResult& r);

double to_chart(const ModelSpec& model, double x);
double from_chart(const ModelSpec& model, double chart);

}  // namespace gnglab
