#include "gnglab/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "gnglab/format.hpp"

namespace gnglab {

namespace {

constexpr double kEscapeHorizon = 1e3;
// Momentum magnitude from which the solver may switch to p as the
// independent variable when |p| grows monotonically.
constexpr double kMomentumSwitch = 4.0;

using State3 = std::array<double, 3>;

struct Rates {
  double dchart = 0.0;  // d(chart)/dt
  double dp = 0.0;
  double du = 0.0;
  double xdot = 0.0;
};

// Curie-Weiss dynamics are integrated in chart = artanh(x). With
// a = beta x + h and s = a + 2p:
//   chart' = sinh(s) + sinh(s - 2 chart)
//   p'     = 2 sinh(p) [(1 - beta) cosh(a + p) + beta x sinh(a + p)]
//   H      = 2 sinh(p) sinh(a + p - chart) / cosh(chart)
// All three stay O(1)-accurate as (x, p) approaches a corner.
Rates chart_rates(const ModelSpec& m, double c, double p) {
  Rates r;
  if (m.is_curie_weiss()) {
    const double x = std::tanh(c);
    const double b = m.beta();
    const double a = b * x + m.h();
    const double s = a + 2.0 * p;
    r.dchart = std::sinh(s) + std::sinh(s - 2.0 * c);
    r.dp = 2.0 * std::sinh(p) * ((1.0 - b) * std::cosh(a + p) + b * x * std::sinh(a + p));
    const double ch = std::cosh(c);
    r.xdot = r.dchart / (ch * ch);
    r.du = p * r.xdot - chart_energy(m, c, p);
    return r;
  }
  const double w1 = m.drift()(c);
  r.dchart = p - w1;
  r.xdot = r.dchart;
  r.dp = p * m.drift_d1()(c);
  r.du = 0.5 * p * p;
  return r;
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

template <std::size_t N>
struct StepResult {
  std::array<double, N> y{};
  std::array<double, N> err{};
};

template <std::size_t N, class F>
StepResult<N> dopri_step(F&& f, double t, const std::array<double, N>& y,
                         const std::array<double, N>& k1, double h) {
  using A = std::array<double, N>;
  auto comb = [&](auto... terms) {
    A out = y;
    for (std::size_t i = 0; i < N; ++i) ((out[i] += h * terms.first * (*terms.second)[i]), ...);
    return out;
  };
  using P = std::pair<double, const A*>;
  const A k2 = f(t + c2 * h, comb(P{a21, &k1}));
  const A k3 = f(t + c3 * h, comb(P{a31, &k1}, P{a32, &k2}));
  const A k4 = f(t + c4 * h, comb(P{a41, &k1}, P{a42, &k2}, P{a43, &k3}));
  const A k5 = f(t + c5 * h, comb(P{a51, &k1}, P{a52, &k2}, P{a53, &k3}, P{a54, &k4}));
  const A k6 =
      f(t + h, comb(P{a61, &k1}, P{a62, &k2}, P{a63, &k3}, P{a64, &k4}, P{a65, &k5}));
  StepResult<N> r;
  r.y = comb(P{b1, &k1}, P{b3, &k3}, P{b4, &k4}, P{b5, &k5}, P{b6, &k6});
  const A k7 = f(t + h, r.y);
  for (std::size_t i = 0; i < N; ++i)
    r.err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
  return r;
}

// Scaled RMS error. Chart and momentum are O(1)-scale quantities whose
// absolute error drives the energy error, so they are not scaled by size.
template <std::size_t N>
double error_norm(const StepResult<N>& r, const std::array<double, N>& y,
                  const std::array<bool, N>& relative, const IntegratorConfig& cfg) {
  double acc = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    if (!std::isfinite(r.y[i]) || !std::isfinite(r.err[i])) return kInf;
    const double scale = relative[i] ? std::max({1.0, std::abs(y[i]), std::abs(r.y[i])}) : 1.0;
    const double sc = cfg.abs_tol + cfg.rel_tol * scale;
    acc += (r.err[i] / sc) * (r.err[i] / sc);
  }
  return std::sqrt(acc / static_cast<double>(N));
}

double step_factor(double err) {
  if (err == 0.0) return 5.0;
  return std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
}

class Engine {
 public:
  Engine(const ModelSpec& model, const IntegratorConfig& cfg, PhasePoint start, double u0,
         bool record)
      : m_(model), cfg_(cfg), record_(record) {
    cfg.validate();
    if (!std::isfinite(start.x) || !std::isfinite(start.p) || !std::isfinite(u0))
      fail(ErrorCode::Domain, "integrate: start point must be finite");
    if (model.is_curie_weiss() && std::abs(start.x) > 1.0 - cfg.boundary_margin) {
      std::ostringstream os;
      os << "integrate: start x = " << start.x << " is not interior (margin "
         << cfg.boundary_margin << ')';
      fail(ErrorCode::Domain, os.str());
    }
    c_ = to_chart(model, start.x);
    p_ = start.p;
    u_ = u0;
    e0_ = chart_energy(model, c_, p_);
    h_ = std::min(cfg.max_step, 1e-3);
    push_sample();
  }

  /// Advances to `target`; returns false if the trajectory escaped first.
  bool advance_to(double target) {
    while (t_ < target && !escaped_) {
      if (p_mode_allowed(target)) {
        run_momentum_mode(target);
        continue;
      }
      step_in_time(target);
    }
    return !escaped_;
  }

  FlowResult result() && {
    FlowResult r;
    r.samples = std::move(samples_);
    r.escaped = escaped_;
    r.corner = corner_;
    r.escape_time = escaped_ ? escape_time_ : kInf;
    r.energy_drift = drift_;
    return r;
  }

  Checkpoint checkpoint() const {
    Checkpoint cp;
    cp.alive = !escaped_;
    cp.corner = corner_;
    cp.x = from_chart(m_, c_);
    cp.p = p_;
    cp.u = u_;
    cp.energy = chart_energy(m_, c_, p_);
    return cp;
  }

  bool escaped() const { return escaped_; }
  double escape_time() const { return escape_time_; }
  Corner corner() const { return corner_; }

 private:
  State3 rhs(const State3& y) const {
    const Rates r = chart_rates(m_, y[0], y[1]);
    return {r.dchart, r.dp, r.du};
  }

  double hmin() const { return 64.0 * 2.2e-16 * std::max(1.0, std::abs(t_)); }

  bool outward(const Rates& r, int s) const { return s * r.dp > 0.0 && s * r.xdot >= 0.0; }

  bool p_mode_allowed(double target) const {
    if (target <= block_until_time_) return false;
    const double ap = std::abs(p_);
    if (ap < kMomentumSwitch || ap < p_block_) return false;
    const int s = p_ > 0 ? 1 : -1;
    return s * chart_rates(m_, c_, p_).dp >= 1.0;
  }

  void step_in_time(double target) {
    const State3 y{c_, p_, u_};
    const State3 k1 = rhs(y);
    static constexpr std::array<bool, 3> rel{false, false, true};
    for (;;) {
      const bool last = h_ >= target - t_;
      const double h = std::min({h_, target - t_, cfg_.max_step});
      const auto r = dopri_step(
          [this](double, const State3& z) { return rhs(z); }, t_, y, k1, h);
      const double err = error_norm(r, y, rel, cfg_);
      if (err <= 1.0) {
        t_ = last ? target : t_ + h;
        c_ = r.y[0];
        p_ = r.y[1];
        u_ = r.y[2];
        if (!last || h_ < cfg_.max_step) h_ = std::min(cfg_.max_step, h * step_factor(err));
        on_accept();
        if (std::abs(p_) >= cfg_.p_cap) {
          const Rates rr = chart_rates(m_, c_, p_);
          if (outward(rr, p_ > 0 ? 1 : -1)) mark_escaped(rr);
        }
        return;
      }
      h_ = h * step_factor(err);
      if (h_ < hmin()) {
        const int s = p_ > 0 ? 1 : -1;
        if (std::abs(p_) >= 1.0 && s * chart_rates(m_, c_, p_).dp > 0.0) {
          p_block_ = 0.0;
          if (run_momentum_mode(target, /*forced=*/true)) return;
        }
        std::ostringstream os;
        os << "integrate: step size underflow at t = " << t_ << " (x = " << from_chart(m_, c_)
           << ", p = " << p_ << ") without escape classification";
        throw IntegrationError(os.str(), t_, {from_chart(m_, c_), p_});
      }
    }
  }

  /// Integrates with p as the independent variable towards +-p_cap. Returns
  /// true when progress was made (escape or reaching the target boundary).
  bool run_momentum_mode(double target, bool forced = false) {
    const int s = p_ > 0 ? 1 : -1;
    const double q_end = s * cfg_.p_cap;
    bool bad = false;
    auto f = [&](double q, const State3& z) -> State3 {
      const Rates r = chart_rates(m_, z[0], q);
      if (!(s * r.dp > 0.5) || !std::isfinite(r.dp)) {
        bad = true;
        return {0.0, 0.0, 0.0};
      }
      return {r.dchart / r.dp, r.du / r.dp, 1.0 / r.dp};
    };
    static constexpr std::array<bool, 3> rel{false, true, true};
    double hq = std::min(0.25, std::abs(q_end - p_));
    bool progressed = false;
    while (true) {
      const State3 z{c_, u_, t_};
      bad = false;
      const State3 k1 = f(p_, z);
      if (bad) break;
      const double dist = std::abs(q_end - p_);
      const bool last = hq >= dist;
      const double h = s * std::min(hq, dist);
      const auto r = dopri_step(f, p_, z, k1, h);
      const double err = bad ? kInf : error_norm(r, z, rel, cfg_);
      if (err <= 1.0) {
        if (r.y[2] > target) {
          // The observation time falls inside this step; finish it in time.
          block_until_time_ = target;
          h_ = std::max(target - t_, hmin());
          return true;
        }
        c_ = r.y[0];
        u_ = r.y[1];
        t_ = std::max(t_, r.y[2]);
        p_ = last ? q_end : p_ + h;
        on_accept();
        progressed = true;
        if (last) {
          const Rates rr = chart_rates(m_, c_, p_);
          if (outward(rr, s)) {
            mark_escaped(rr);
            return true;
          }
          break;
        }
        hq = std::abs(h) * step_factor(err);
      } else {
        hq = std::abs(h) * step_factor(err);
        if (hq < 1e-12) break;
      }
    }
    p_block_ = 1.25 * std::abs(p_);
    return progressed && !forced ? true : progressed;
  }

  void mark_escaped(const Rates& r) {
    escaped_ = true;
    corner_ = p_ > 0 ? Corner::Plus : Corner::Minus;
    const double ap = std::abs(p_);
    double tail;
    if (m_.is_curie_weiss() && m_.beta() == 0.0 && m_.h() == 0.0) {
      // Autonomous momentum law p' = sinh(2p): remaining time -1/2 log tanh |p|.
      const double e = std::exp(-2.0 * ap);
      tail = -0.5 * (std::log1p(-e) - std::log1p(e));
    } else {
      // Exponential momentum growth p' ~ K e^{2|p|}.
      tail = 0.5 / std::abs(r.dp);
    }
    escape_time_ = t_ + tail;
  }

  void on_accept() {
    drift_ = std::max(drift_, std::abs(chart_energy(m_, c_, p_) - e0_));
    push_sample();
  }

  void push_sample() {
    if (!record_) return;
    FlowSample s{t_, from_chart(m_, c_), p_, u_, chart_energy(m_, c_, p_)};
    if (!samples_.empty() && !(s.t > samples_.back().t))
      samples_.back() = s;
    else
      samples_.push_back(s);
  }

  const ModelSpec& m_;
  const IntegratorConfig& cfg_;
  bool record_;
  double t_ = 0.0, c_ = 0.0, p_ = 0.0, u_ = 0.0;
  double e0_ = 0.0, drift_ = 0.0;
  double h_ = 1e-3;
  double p_block_ = 0.0;
  double block_until_time_ = -kInf;
  bool escaped_ = false;
  Corner corner_ = Corner::Plus;
  double escape_time_ = kInf;
  std::vector<FlowSample> samples_;
};

}  // namespace

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0) || !(abs_tol > 0) || !(max_step > 0) || !(boundary_margin > 0) ||
      !(p_cap >= 10.0))
    fail(ErrorCode::Config,
         "integrator config: tolerances, max_step and boundary_margin must be positive and "
         "p_cap >= 10");
}

double to_chart(const ModelSpec& model, double x) {
  return model.is_curie_weiss() ? std::atanh(x) : x;
}

double from_chart(const ModelSpec& model, double chart) {
  return model.is_curie_weiss() ? std::tanh(chart) : chart;
}

double chart_energy(const ModelSpec& model, double chart, double p) {
  if (model.is_curie_weiss()) {
    const double a = model.beta() * std::tanh(chart) + model.h();
    return 2.0 * std::sinh(p) * std::sinh(a + p - chart) / std::cosh(chart);
  }
  return 0.5 * p * p - p * model.drift()(chart);
}

FlowResult integrate(const ModelSpec& model, PhasePoint start, double u0, double t_end,
                     const IntegratorConfig& config) {
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    fail(ErrorCode::Domain, "integrate: t_end must be positive and finite");
  Engine engine(model, config, start, u0, /*record=*/true);
  engine.advance_to(t_end);
  return std::move(engine).result();
}

std::vector<Checkpoint> integrate_checkpoints(const ModelSpec& model, PhasePoint start, double u0,
                                              std::span<const double> times,
                                              const IntegratorConfig& config) {
  Engine engine(model, config, start, u0, /*record=*/false);
  std::vector<Checkpoint> out;
  out.reserve(times.size());
  double prev = 0.0;
  for (double t : times) {
    if (!(t >= prev) || !std::isfinite(t))
      fail(ErrorCode::Domain, "integrate_checkpoints: times must be ascending and >= 0");
    prev = t;
    if (!engine.escaped()) engine.advance_to(t);
    out.push_back(engine.checkpoint());
  }
  return out;
}

double escape_time(const ModelSpec& model, PhasePoint start, const IntegratorConfig& config) {
  Engine engine(model, config, start, 0.0, /*record=*/false);
  engine.advance_to(kEscapeHorizon);
  return engine.escaped() ? engine.escape_time() : kInf;
}

ExtendedPoint extended_flow(const ModelSpec& model, double t, ExtendedPoint point,
                            const IntegratorConfig& config) {
  if (!(t >= 0.0)) fail(ErrorCode::Domain, "extended_flow: t must be >= 0");
  if (point.is_corner() || t == 0.0) return point;
  Engine engine(model, config, point.point(), 0.0, /*record=*/false);
  if (!engine.advance_to(t)) return ExtendedPoint::corner(engine.corner());
  const Checkpoint cp = engine.checkpoint();
  return ExtendedPoint::interior({cp.x, cp.p});
}

std::string flow_csv(const FlowResult& r) {
  std::string out = "t,x,p,u,H\n";
  for (const FlowSample& s : r.samples)
    out += fmt_num(s.t) + ',' + fmt_num(s.x) + ',' + fmt_num(s.p) + ',' + fmt_num(s.u) + ',' +
           fmt_num(s.energy) + '\n';
  return out;
}

}  // namespace gnglab
