#include "gnglab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gnglab/parallel.hpp"

namespace gnglab {

namespace {

constexpr double kStationaryTol = 1e-10;
constexpr double kLoopHorizon = 1e3;

std::string num(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// min_p H(x, p) and its minimizer.
LagrangianValue energy_floor(const ModelSpec& model, double x) {
  LagrangianValue l = lagrangian(model, x, 0.0);
  l.value = -l.value;
  return l;
}

// Root of H(x, .) = e on the side of p_min given by dir (+1 or -1), using
// Newton steps kept inside an expanding bracket.
double level_momentum(const ModelSpec& model, double x, double p_min, double e, int dir) {
  double lo = p_min, hi = p_min;
  double step = 0.5;
  for (int i = 0; i < 200; ++i) {
    hi = p_min + dir * step;
    if (hamiltonian(model, x, hi) >= e) break;
    lo = hi;
    step *= 2.0;
  }
  if (dir < 0) std::swap(lo, hi);  // keep lo < hi
  auto f = [&](double p) { return hamiltonian(model, x, p) - e; };
  double p = 0.5 * (lo + hi);
  for (int i = 0; i < 200; ++i) {
    const double fp = f(p);
    if (std::abs(fp) <= 1e-15) return p;
    // Shrink the bracket: f is below the level on the p_min side.
    if ((fp < 0.0) == (dir > 0)) lo = p;
    else hi = p;
    const double d = velocity(model, x, p);
    double next = d != 0.0 ? p - fp / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - p) <= 1e-16 * std::max(1.0, std::abs(p)) || hi - lo <= 1e-15) return next;
    p = next;
  }
  return p;
}

// Stationary point of the flow within kSnap of m, so endpoints quoted to a
// few digits still work.
double snap_stationary(const ModelSpec& model, double m) {
  constexpr double kSnap = 1e-3;
  auto v = [&](double x) { return derivatives(model, x, 0.0).dHdp; };
  if (std::abs(v(m)) <= 1e-12) return m;
  const Interval ss = model.state_space();
  const double lo = std::max(m - kSnap, ss.lo + 1e-12), hi = std::min(m + kSnap, ss.hi - 1e-12);
  if ((v(lo) > 0.0) != (v(hi) > 0.0)) {
    const double r = bisect(v, lo, hi, 1e-15);
    if (std::abs(v(r)) <= 1e-10) return r;
  }
  fail(ErrorCode::Inapplicable, "rotating_loop: no stationary point within " + num(kSnap) +
                                    " of " + num(m) + " (dH/dp = " + num(v(m)) + ")");
}

}  // namespace

LinearizationData linearization_data(const ModelSpec& model, const RateFunctionSpec& spec,
                                     double x0) {
  const HamiltonianDerivatives d = derivatives(model, x0, 0.0);
  if (std::abs(d.dHdp) > kStationaryTol)
    fail(ErrorCode::Precondition,
         "linearization_data: x0 = " + num(x0) + " is not stationary (dH/dp = " + num(d.dHdp) + ")");
  LinearizationData out;
  out.x0 = x0;
  out.m = d.d2Hdxdp;
  out.c = d.d2Hdp2;
  out.i0_dd = rate0(spec, x0).second_deriv;
  return out;
}

double linearization_threshold(const LinearizationData& d) {
  if (!(d.c > 0.0)) fail(ErrorCode::Precondition, "linearization_threshold: c must be > 0");
  const double bound = std::min(-2.0 * d.m / d.c, 0.0);
  if (!(d.i0_dd < bound))
    fail(ErrorCode::Inapplicable, "linearization_threshold: I0''(x0) = " + num(d.i0_dd) +
                                      " is not below min(-2m/c, 0) = " + num(bound));
  if (d.m == 0.0) return -1.0 / (d.c * d.i0_dd);
  const double arg = 1.0 + 2.0 * d.m / (d.c * d.i0_dd);
  if (!(arg > 0.0))
    fail(ErrorCode::Inapplicable,
         "linearization_threshold: logarithm argument " + num(arg) + " is not positive");
  const double t0 = -std::log(arg) / (2.0 * d.m);
  if (!(t0 > 0.0) || !std::isfinite(t0))
    fail(ErrorCode::Inapplicable, "linearization_threshold: no positive finite threshold");
  return t0;
}

double slope_sign_at(const ModelSpec& model, const RateFunctionSpec& spec, double x0, double t,
                     double dx, const IntegratorConfig& config) {
  if (!(dx > 0.0)) fail(ErrorCode::Domain, "slope_sign_at: dx must be > 0");
  if (!(t >= 0.0)) fail(ErrorCode::Domain, "slope_sign_at: t must be >= 0");
  double x[2];
  const double starts[2] = {x0 - dx, x0 + dx};
  for (int k = 0; k < 2; ++k) {
    const RateValue r = rate0(spec, starts[k]);
    if (t == 0.0) {
      x[k] = starts[k];
      continue;
    }
    const double times[] = {t};
    const Checkpoint cp =
        integrate_checkpoints(model, {starts[k], r.deriv}, r.value, times, config)[0];
    if (!cp.alive)
      fail(ErrorCode::Escaped, "slope_sign_at: neighbour x0 = " + num(starts[k]) +
                                   " escaped before t = " + num(t));
    x[k] = cp.x;
  }
  return (x[1] - x[0]) / (starts[1] - starts[0]);
}

double slope_zero_crossing(const ModelSpec& model, const RateFunctionSpec& spec, double x0,
                           double t_lo, double t_hi, double dx, const IntegratorConfig& config,
                           double tol) {
  auto f = [&](double t) { return slope_sign_at(model, spec, x0, t, dx, config); };
  const double flo = f(t_lo), fhi = f(t_hi);
  if ((flo > 0.0) == (fhi > 0.0))
    fail(ErrorCode::Bracket, "slope_zero_crossing: slope has the same sign at t = " + num(t_lo) +
                                 " and t = " + num(t_hi));
  return bisect(f, t_lo, t_hi, tol);
}

double overhang_onset(const ModelSpec& model, const RateFunctionSpec& spec, double t_lo,
                      double t_hi, const IntegratorConfig& config, const GraphOptions& options,
                      double tol) {
  if (!(t_lo >= 0.0) || !(t_hi > t_lo))
    fail(ErrorCode::Bracket, "overhang_onset: need 0 <= t_lo < t_hi");
  const auto samples = sample_initial_graph(spec, options.sampling);
  auto graph_at = [&](double t) {
    return detect_overhangs(push_graph(model, spec, samples, t, config, options.refine)).is_graph;
  };
  if (!graph_at(t_lo))
    fail(ErrorCode::Bracket, "overhang_onset: overhang already present at t_lo = " + num(t_lo));
  if (graph_at(t_hi))
    fail(ErrorCode::Bracket, "overhang_onset: no overhang at t_hi = " + num(t_hi));
  while (t_hi - t_lo > tol) {
    const double mid = 0.5 * (t_lo + t_hi);
    if (graph_at(mid)) t_lo = mid;
    else t_hi = mid;
  }
  return 0.5 * (t_lo + t_hi);
}

OrderCertificate order_preservation_certificate(const ModelSpec& model, const OrderRegion& region,
                                                std::size_t n_samples) {
  const std::size_t n = std::max<std::size_t>(n_samples, 4);
  constexpr double kSpan = 4.0;  // lattice extent in p, and in x on the real line
  constexpr double kTol = 1e-12;
  const bool cw = model.is_curie_weiss();

  double x_lo, x_hi, p_lo, p_hi;
  switch (region.kind) {
    case RegionKind::Whole:
      x_lo = cw ? -1.0 : -kSpan;
      x_hi = cw ? 1.0 : kSpan;
      p_lo = -kSpan;
      p_hi = kSpan;
      break;
    case RegionKind::UpperRight:
      x_lo = region.y;
      x_hi = cw ? 1.0 : region.y + kSpan;
      p_lo = region.q;
      p_hi = region.q + kSpan;
      break;
    case RegionKind::LowerLeft:
    default:
      x_lo = cw ? -1.0 : region.y - kSpan;
      x_hi = region.y;
      p_lo = region.q - kSpan;
      p_hi = region.q;
      break;
  }
  if (cw && !(region.kind == RegionKind::Whole || (region.y > -1.0 && region.y < 1.0)))
    fail(ErrorCode::Domain, "order_preservation_certificate: corner y must be interior");

  // Open-region lattice: cell midpoints.
  auto xs_at = [&](std::size_t i) { return x_lo + (x_hi - x_lo) * (i + 0.5) / n; };
  auto ps_at = [&](std::size_t j) { return p_lo + (p_hi - p_lo) * (j + 0.5) / n; };

  OrderCertificate cert;
  auto first_violation = [&](auto&& value, auto&& bad, const char* what)
      -> std::optional<OrderCounterexample> {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double x = xs_at(i), p = ps_at(j);
        const double v = value(x, p);
        if (bad(v)) return OrderCounterexample{x, p, what, v};
      }
    return std::nullopt;
  };

  // The quadrant itself must be invariant.
  if (region.kind != RegionKind::Whole) {
    const int s = region.kind == RegionKind::UpperRight ? 1 : -1;
    for (std::size_t j = 0; j < n; ++j) {
      const double p = ps_at(j);
      const double v = s * derivatives(model, region.y, p).dHdp;
      if (v < -kTol) {
        cert.criterion = "none";
        cert.counterexample = OrderCounterexample{region.y, p, "quadrant exit through x = y", v};
        return cert;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double x = xs_at(i);
      const double v = -s * derivatives(model, x, region.q).dHdx;
      if (v < -kTol) {
        cert.criterion = "none";
        cert.counterexample = OrderCounterexample{x, region.q, "quadrant exit through p = q", v};
        return cert;
      }
    }
  }

  if (!cw && region.kind != RegionKind::Whole && region.q == 0.0) {
    // d2H/dx2 = -p W'''(x): its sign on the quadrant is the sign of W'''.
    const int s = region.kind == RegionKind::UpperRight ? 1 : -1;
    const Polynomial& w3 = model.drift_d2();
    cert.criterion = "third-derivative-sign";
    for (std::size_t i = 0; i < n; ++i) {
      const double x = xs_at(i);
      if (s * w3(x) < -kTol) {
        cert.counterexample = OrderCounterexample{x, 0.0, "W'''(x) has the wrong sign", w3(x)};
        return cert;
      }
    }
    // Beyond the lattice the leading term decides.
    if (w3.degree() >= 0 && w3.leading() != 0.0) {
      double tail = w3.leading() > 0.0 ? 1.0 : -1.0;
      if (s < 0 && w3.degree() % 2 == 1) tail = -tail;
      if (s * tail < 0.0) {
        cert.counterexample = OrderCounterexample{s > 0 ? kInf : -kInf, 0.0,
                                                  "W''' has the wrong sign at infinity", tail};
        return cert;
      }
    }
    cert.holds = true;
    return cert;
  }

  auto dxx = [&](double x, double p) { return derivatives(model, x, p).d2Hdx2; };
  auto dxp = [&](double x, double p) { return derivatives(model, x, p).d2Hdxdp; };
  const auto strict = first_violation(dxx, [](double v) { return !(v < 0.0); },
                                      "d2H/dx2 not strictly negative");
  if (!strict) {
    cert.criterion = "strict-concavity-in-x";
    cert.holds = true;
    return cert;
  }
  auto weak = first_violation(dxx, [](double v) { return v > kTol; }, "d2H/dx2 positive");
  if (!weak) weak = first_violation(dxp, [](double v) { return v > kTol; }, "d2H/dxdp positive");
  cert.criterion = weak ? "none" : "decreasing-in-both";
  cert.holds = !weak;
  cert.counterexample = weak;
  return cert;
}

Loop rotating_loop(const ModelSpec& model, double m1, double m2, double e_frac,
                   std::size_t n_points) {
  if (!(e_frac > 0.0 && e_frac < 1.0))
    fail(ErrorCode::Domain, "rotating_loop: e_frac must lie in (0, 1)");
  if (!(m1 < m2)) fail(ErrorCode::Domain, "rotating_loop: need m1 < m2");
  if (n_points < 8) fail(ErrorCode::Domain, "rotating_loop: need at least 8 points");
  for (double* m : {&m1, &m2}) {
    *m = snap_stationary(model, *m);
    const HamiltonianDerivatives d = derivatives(model, *m, 0.0);
    if (std::abs(d.d2Hdxdp) < 1e-12)
      fail(ErrorCode::Inapplicable, "rotating_loop: d2H/dxdp(" + num(*m) + ", 0) vanishes");
  }
  auto floor_at = [&](double x) { return energy_floor(model, x).value; };

  // Deepest point of the energy floor on the middle 60%.
  const double mid_lo = m1 + 0.2 * (m2 - m1), mid_hi = m2 - 0.2 * (m2 - m1);
  constexpr int kScan = 200;
  double x_deep = mid_lo, e_deep = kInf, e_shallow = -kInf;
  for (int k = 0; k <= kScan; ++k) {
    const double x = mid_lo + (mid_hi - mid_lo) * k / kScan;
    const double e = floor_at(x);
    e_shallow = std::max(e_shallow, e);
    if (e < e_deep) {
      e_deep = e;
      x_deep = x;
    }
  }
  if (!(e_shallow < 0.0))
    fail(ErrorCode::Inapplicable, "rotating_loop: min_p H is not negative inside (" + num(m1) +
                                      ", " + num(m2) + ")");
  // Golden-section polish of the deepest point.
  {
    const double h = (mid_hi - mid_lo) / kScan;
    double lo = std::max(m1, x_deep - h), hi = std::min(m2, x_deep + h);
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < 100 && hi - lo > 1e-12; ++i) {
      const double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
      if (floor_at(c) < floor_at(d)) hi = d;
      else lo = c;
    }
    x_deep = 0.5 * (lo + hi);
    e_deep = floor_at(x_deep);
  }

  Loop loop;
  loop.energy = e_frac * e_deep;
  auto g = [&](double x) { return floor_at(x) - loop.energy; };
  loop.a = bisect(g, m1, x_deep, 1e-14);
  loop.b = bisect(g, x_deep, m2, 1e-14);

  const double pi = std::acos(-1.0);
  for (std::size_t k = 0; k < n_points; ++k) {
    const double x = k == 0 ? loop.a
                     : k + 1 == n_points
                         ? loop.b
                         : 0.5 * (loop.a + loop.b) -
                               0.5 * (loop.b - loop.a) * std::cos(pi * k / (n_points - 1));
    const LagrangianValue f = energy_floor(model, x);
    if (k == 0 || k + 1 == n_points) {
      loop.lower.push_back({x, f.p_star});
      loop.upper.push_back({x, f.p_star});
      continue;
    }
    loop.lower.push_back({x, level_momentum(model, x, f.p_star, loop.energy, -1)});
    loop.upper.push_back({x, level_momentum(model, x, f.p_star, loop.energy, +1)});
  }
  return loop;
}

Loop rotating_loop(const ModelSpec& model, double e_frac) {
  const std::vector<double> st = stationary_points(model);
  for (std::size_t i = 0; i + 1 < st.size(); ++i) {
    try {
      return rotating_loop(model, st[i], st[i + 1], e_frac);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Inapplicable) throw;
    }
  }
  fail(ErrorCode::Inapplicable, "rotating_loop: " + model.describe() + " has " +
                                    std::to_string(st.size()) +
                                    " stationary points and no qualifying neighbouring pair");
}

double loop_period(const ModelSpec& model, const Loop& loop, PhasePoint start,
                   const IntegratorConfig& config) {
  const double h0 = hamiltonian(model, start.x, start.p);
  if (std::abs(h0 - loop.energy) > 1e-6)
    fail(ErrorCode::Precondition, "loop_period: start has energy " + num(h0) +
                                      " but the loop has " + num(loop.energy));
  const HamiltonianDerivatives d0 = derivatives(model, start.x, start.p);
  const double vx = d0.dHdp, vp = -d0.dHdx;
  // Section through the start, across the faster coordinate.
  const bool use_x = std::abs(vx) >= std::abs(vp);
  const double dir = use_x ? (vx > 0 ? 1.0 : -1.0) : (vp > 0 ? 1.0 : -1.0);
  auto section = [&](const PhasePoint& q) {
    return dir * (use_x ? q.x - start.x : q.p - start.p);
  };
  auto dist = [&](const PhasePoint& q) { return std::hypot(q.x - start.x, q.p - start.p); };

  for (double horizon = 10.0; horizon <= kLoopHorizon * 1.0001; horizon *= 10.0) {
    const FlowResult run = integrate(model, start, 0.0, horizon, config);
    bool left_ball = false;
    for (std::size_t k = 0; k + 1 < run.samples.size(); ++k) {
      const FlowSample& a = run.samples[k];
      const FlowSample& b = run.samples[k + 1];
      if (dist({b.x, b.p}) > 0.1) left_ball = true;
      if (!left_ball) continue;
      if (!(section({a.x, a.p}) < 0.0 && section({b.x, b.p}) >= 0.0)) continue;
      auto at = [&](double tau) {
        if (tau <= 0.0) return PhasePoint{a.x, a.p};
        const FlowResult r = integrate(model, {a.x, a.p}, 0.0, tau, config);
        return PhasePoint{r.last().x, r.last().p};
      };
      const double tau = bisect([&](double s) { return section(at(s)); }, 0.0, b.t - a.t, 1e-13);
      if (dist(at(tau)) <= 1e-3) return a.t + tau;
    }
    if (run.escaped) break;
  }
  fail(ErrorCode::NonRotating, "loop_period: no return to the start within t = " + num(kLoopHorizon));
}

RecoveryConstants recovery_constants(double alpha) {
  if (!(alpha > 1.0))
    fail(ErrorCode::Inapplicable, "recovery_constants: alpha = " + num(alpha) + " must exceed 1");
  RecoveryConstants c;
  c.z = std::sqrt(1.0 - 1.0 / alpha);
  c.kappa = alpha * c.z - std::atanh(c.z);
  return c;
}

Interval default_grid_window(const ModelSpec& model) {
  if (model.is_curie_weiss()) return {-0.95, 0.95};
  return {-1.5, 1.5};
}

ScenarioTimeline scan_timeline(const ModelSpec& model, const RateFunctionSpec& spec,
                               const std::vector<double>& times, const IntegratorConfig& config,
                               const ScanOptions& options) {
  for (std::size_t k = 0; k < times.size(); ++k)
    if (!(times[k] >= 0.0) || (k > 0 && !(times[k] > times[k - 1])))
      fail(ErrorCode::Domain, "scan_timeline: times must be increasing and >= 0");
  const Interval win = options.grid.value_or(default_grid_window(model));
  const std::vector<double> xs = uniform_grid(win.lo, win.hi, options.grid_n);
  const auto samples = sample_initial_graph(spec, options.graph.sampling);

  ScenarioTimeline tl;
  tl.entries.resize(times.size());
  std::vector<PushForward> graphs(options.observer ? times.size() : 0);
  std::vector<std::optional<RateProfile>> profiles(graphs.size());
  parallel_for(times.size(), [&](std::size_t k) {
    PushForward pf = push_graph(model, spec, samples, times[k], config, options.graph.refine);
    const OverhangReport rep = detect_overhangs(pf);
    TimelineEntry& e = tl.entries[k];
    e.t = times[k];
    e.is_graph = rep.is_graph;
    e.regions = rep.regions;
    try {
      RateProfile prof = envelope(pf, xs);
      e.nondiff = prof.nondiff_points;
      e.certified = classify_differentiability(prof);
      if (options.observer) profiles[k] = std::move(prof);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::Coverage) throw;
      e.error = err.what();
    }
    if (options.observer) graphs[k] = std::move(pf);
  });
  for (std::size_t k = 0; k < graphs.size(); ++k)
    options.observer(graphs[k], profiles[k] ? &*profiles[k] : nullptr);

  const auto& es = tl.entries;
  std::optional<std::size_t> last_overhang, last_certified;
  for (std::size_t k = 0; k < es.size(); ++k) {
    if (!es[k].is_graph) {
      if (!tl.t0) tl.t0 = es[k].t;
      last_overhang = k;
    }
    if (!es[k].certified.empty()) last_certified = k;
  }
  if (last_overhang && *last_overhang + 1 < es.size()) tl.t2 = es[*last_overhang + 1].t;
  if (last_certified) {
    const std::size_t k = *last_certified;
    tl.t1 = k + 1 < es.size() ? es[k + 1].t
                              : es[k].t + (k > 0 ? es[k].t - es[k - 1].t : 0.0);
  }
  return tl;
}

ScenarioTimeline recovery_scan(const ModelSpec& model, const RateFunctionSpec& spec,
                               const std::vector<double>& t_grid, const IntegratorConfig& config,
                               const ScanOptions& options) {
  if (!model.is_curie_weiss() || model.beta() != 0.0 || model.h() != 0.0)
    fail(ErrorCode::Precondition, "recovery_scan: needs CurieWeiss with beta = h = 0");
  if (spec.kind() != RateKind::CWEntropy)
    fail(ErrorCode::Precondition, "recovery_scan: needs CWEntropy initial data");
  ScenarioTimeline tl = scan_timeline(model, spec, t_grid, config, options);
  if (spec.alpha() > 1.0) {
    const RecoveryConstants c = recovery_constants(spec.alpha());
    tl.constants = c;
    tl.window_expected = std::abs(spec.theta()) > c.kappa;
    if (tl.window_expected) {
      // Momentum carried by the graph at the local extremum on the side of theta.
      const double p = spec.theta() < 0.0 ? c.kappa - spec.theta() : c.kappa + spec.theta();
      tl.t1_ref = -0.5 * std::log(std::tanh(p));
    }
  }
  return tl;
}

HeatingReport heating_threshold_report(const ModelSpec& model, const RateFunctionSpec& spec,
                                       const IntegratorConfig& config) {
  HeatingReport rep;
  if (model.is_curie_weiss()) {
    if (spec.kind() != RateKind::CWEntropy)
      fail(ErrorCode::Inapplicable, "heating_threshold_report: CurieWeiss needs CWEntropy data");
    const double a = spec.alpha(), b = model.beta();
    if (!(spec.theta() == 0.0 && model.h() == 0.0 && a > std::max(b, 1.0) && b != 1.0))
      fail(ErrorCode::Inapplicable,
           "heating_threshold_report: needs alpha > max(beta, 1), beta != 1, theta = h = 0");
    const double arg = (b - a) / (1.0 - a);
    rep.t1_printed = arg > 0.0 ? -std::log(arg) / (4.0 * (1.0 - b)) : std::nan("");
  } else {
    if (spec.kind() != RateKind::Polynomial)
      fail(ErrorCode::Inapplicable, "heating_threshold_report: diffusion needs polynomial data");
    const double a = -rate0(spec, 0.0).second_deriv;
    const double b = -model.drift_d1()(0.0);
    if (std::abs(rate0(spec, 0.0).deriv) > kStationaryTol || !(a > std::max(b, 0.0)) || b == 0.0)
      fail(ErrorCode::Inapplicable,
           "heating_threshold_report: needs I0'(0) = 0, a > max(b, 0), b != 0");
    const double arg = (a - b) / a;
    rep.t1_printed = arg > 0.0 ? -std::log(arg) / b : std::nan("");
  }
  rep.data = linearization_data(model, spec, 0.0);
  rep.t0_linearized = linearization_threshold(rep.data);
  rep.discrepancy_flag = !std::isfinite(rep.t1_printed) || !(rep.t1_printed > 0.0) ||
                         std::abs(rep.t1_printed - rep.t0_linearized) > 1e-9;
  try {
    rep.slope_crossing =
        slope_zero_crossing(model, spec, 0.0, 0.5 * rep.t0_linearized, 1.5 * rep.t0_linearized, 1e-3, config);
  } catch (const Error&) {
    rep.slope_crossing = std::nan("");
  }
  return rep;
}

}  // namespace gnglab
