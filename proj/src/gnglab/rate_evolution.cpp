#include "gnglab/rate_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gnglab/format.hpp"
#include "gnglab/parallel.hpp"

namespace gnglab {

namespace {

constexpr double kTieValue = 1e-7;
constexpr double kTieGradient = 1e-4;

// A strictly monotone piece of a branch, stored with x increasing.
struct Arc {
  std::vector<double> x, p, u;
};

struct Candidate {
  double u = kInf;
  double p = 0.0;
  int arc = -1;
};

std::vector<Arc> monotone_arcs(const PushForward& pf) {
  std::vector<Arc> arcs;
  for (const Branch& b : pf.branches) {
    const auto& pts = b.points;
    std::size_t s = 0;
    while (s + 1 < pts.size()) {
      const double d0 = pts[s + 1].x - pts[s].x;
      if (d0 == 0.0) {
        ++s;
        continue;
      }
      std::size_t e = s + 1;
      while (e + 1 < pts.size() && (pts[e + 1].x - pts[e].x) * d0 > 0.0) ++e;
      Arc a;
      for (std::size_t k = s; k <= e; ++k) {
        a.x.push_back(pts[k].x);
        a.p.push_back(pts[k].p);
        a.u.push_back(pts[k].u);
      }
      if (d0 < 0.0) {
        std::reverse(a.x.begin(), a.x.end());
        std::reverse(a.p.begin(), a.p.end());
        std::reverse(a.u.begin(), a.u.end());
      }
      arcs.push_back(std::move(a));
      s = e;
    }
  }
  return arcs;
}

bool covers(const Arc& a, double x) { return x >= a.x.front() && x <= a.x.back(); }

// Value by cubic Hermite using p = du/dx along the pushed graph; p linear.
Candidate eval_arc(const Arc& a, double x, int id) {
  auto it = std::upper_bound(a.x.begin(), a.x.end(), x);
  std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - a.x.begin() - 1));
  k = std::min(k, a.x.size() - 2);
  const double x0 = a.x[k], x1 = a.x[k + 1];
  Candidate c;
  c.arc = id;
  c.u = hermite_value(x, x0, x1, a.u[k], a.u[k + 1], a.p[k], a.p[k + 1]);
  const double w = (x - x0) / (x1 - x0);
  c.p = a.p[k] + w * (a.p[k + 1] - a.p[k]);
  return c;
}

// Zeros of the derivative of the Hermite interpolant on [x_k, x_k+1]. Placing
// the minimum by linear interpolation of p is off by O(h^2) in x.
std::vector<double> hermite_critical_points(const Arc& a, std::size_t k) {
  const double h = a.x[k + 1] - a.x[k];
  const double f0 = a.u[k], f1 = a.u[k + 1], m0 = h * a.p[k], m1 = h * a.p[k + 1];
  const double A = 6.0 * (f0 - f1) + 3.0 * (m0 + m1);
  const double B = 6.0 * (f1 - f0) - 4.0 * m0 - 2.0 * m1;
  const double C = m0;
  std::vector<double> s;
  if (std::abs(A) < 1e-14 * (std::abs(B) + std::abs(C))) {
    if (B != 0.0) s.push_back(-C / B);
  } else {
    const double disc = B * B - 4.0 * A * C;
    if (disc >= 0.0) {
      const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
      if (q != 0.0) s.push_back(q / A);
      if (q != 0.0) s.push_back(C / q);
    }
  }
  std::vector<double> out;
  for (double v : s)
    if (v >= 0.0 && v <= 1.0) out.push_back(a.x[k] + v * h);
  return out;
}

std::vector<Candidate> candidates_at(const std::vector<Arc>& arcs, double x) {
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < arcs.size(); ++i)
    if (covers(arcs[i], x)) out.push_back(eval_arc(arcs[i], x, static_cast<int>(i)));
  return out;
}

Candidate best_of(const std::vector<Candidate>& cs) {
  Candidate best;
  for (const auto& c : cs)
    if (c.u < best.u) best = c;
  return best;
}

// Distinct gradients among candidates tied with the minimum, descending.
std::vector<double> tied_gradients(const std::vector<Candidate>& cs, double min_u) {
  std::vector<double> ps;
  for (const auto& c : cs)
    if (c.u <= min_u + kTieValue) ps.push_back(c.p);
  std::sort(ps.begin(), ps.end(), std::greater<>());
  std::vector<double> out;
  for (double p : ps)
    if (out.empty() || out.back() - p >= kTieGradient) out.push_back(p);
  return out;
}

class SwitchFinder {
 public:
  SwitchFinder(const std::vector<Arc>& arcs, std::vector<NondiffPoint>& out)
      : arcs_(arcs), out_(out) {}

  void search(double xl, int al, double xr, int ar, int depth) {
    if (al == ar || al < 0 || ar < 0) return;
    const Arc& A = arcs_[static_cast<std::size_t>(al)];
    const Arc& B = arcs_[static_cast<std::size_t>(ar)];
    if (covers(A, xl) && covers(A, xr) && covers(B, xl) && covers(B, xr)) {
      auto diff = [&](double x) { return eval_arc(A, x, al).u - eval_arc(B, x, ar).u; };
      const double dl = diff(xl), dr = diff(xr);
      if ((dl <= 0.0) == (dr <= 0.0) && dl != 0.0 && dr != 0.0) return;
      const double r = bisect(diff, xl, xr, 1e-14);
      record(r);
      return;
    }
    if (depth >= 3) return;
    constexpr int kSub = 8;
    double prev_x = xl;
    int prev_a = al;
    for (int k = 1; k <= kSub; ++k) {
      const double x = k == kSub ? xr : xl + (xr - xl) * k / kSub;
      const int a = k == kSub ? ar : best_of(candidates_at(arcs_, x)).arc;
      if (a != prev_a) search(prev_x, prev_a, x, a, depth + 1);
      prev_x = x;
      prev_a = a;
    }
  }

 private:
  void record(double x) {
    for (const auto& q : out_)
      if (std::abs(q.x - x) < 1e-9) return;
    const auto cs = candidates_at(arcs_, x);
    const Candidate best = best_of(cs);
    auto g = tied_gradients(cs, best.u);
    if (g.size() >= 2) out_.push_back({x, std::move(g)});
  }

  const std::vector<Arc>& arcs_;
  std::vector<NondiffPoint>& out_;
};

void check_grid(const std::vector<double>& xs, const char* op, bool uniform) {
  if (xs.size() < 2) fail(ErrorCode::Domain, std::string(op) + ": grid needs >= 2 points");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) fail(ErrorCode::Domain, std::string(op) + ": grid must increase");
  if (!uniform) return;
  const double dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (std::abs(xs[i] - xs[i - 1] - dx) > 1e-9 * (1.0 + std::abs(xs[i])))
      fail(ErrorCode::Domain, std::string(op) + ": grid must be uniform");
}

void renormalize_by_grid_min(RateProfile& r) {
  const double m = *std::min_element(r.values.begin(), r.values.end());
  for (double& v : r.values) v -= m;
}

void difference_slopes(RateProfile& r) {
  const std::size_t n = r.xs.size();
  r.left_slope.assign(n, 0.0);
  r.right_slope.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) r.left_slope[i] = (r.values[i] - r.values[i - 1]) / (r.xs[i] - r.xs[i - 1]);
    if (i + 1 < n) r.right_slope[i] = (r.values[i + 1] - r.values[i]) / (r.xs[i + 1] - r.xs[i]);
  }
  r.left_slope[0] = r.right_slope[0];
  r.right_slope[n - 1] = r.left_slope[n - 1];
}

std::vector<double> initial_values(const RateFunctionSpec& spec, const std::vector<double>& xs) {
  std::vector<double> v(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) v[i] = rate0(spec, xs[i]).value;
  return v;
}

// A uniform grid continued with its own spacing towards the boundary of the
// state space (CurieWeiss) or by a quarter of its width plus 0.5 (diffusion).
struct ExtendedGrid {
  std::vector<double> xs;
  std::size_t offset = 0;
  std::size_t count = 0;

  std::vector<double> restrict(const std::vector<double>& v) const {
    return {v.begin() + static_cast<std::ptrdiff_t>(offset),
            v.begin() + static_cast<std::ptrdiff_t>(offset + count)};
  }
};

ExtendedGrid extend_grid(const ModelSpec& model, const RateFunctionSpec& spec,
                         const std::vector<double>& xs) {
  const double dx = xs[1] - xs[0];
  const Interval dom = spec.domain();
  const Interval space = model.state_space();
  const double lo_lim = std::max(dom.lo, space.lo), hi_lim = std::min(dom.hi, space.hi);
  const double reach = 0.25 * (xs.back() - xs.front()) + 0.5;
  const double lo = std::max(lo_lim + 0.25 * dx, xs.front() - reach);
  const double hi = std::min(hi_lim - 0.25 * dx, xs.back() + reach);
  std::size_t left = 0, right = 0;
  while (xs.front() - static_cast<double>(left + 1) * dx > lo) ++left;
  while (xs.back() + static_cast<double>(right + 1) * dx < hi) ++right;
  ExtendedGrid g;
  for (std::size_t k = left; k > 0; --k) g.xs.push_back(xs.front() - static_cast<double>(k) * dx);
  g.xs.insert(g.xs.end(), xs.begin(), xs.end());
  for (std::size_t k = 1; k <= right; ++k) g.xs.push_back(xs.back() + static_cast<double>(k) * dx);
  g.offset = left;
  g.count = xs.size();
  return g;
}

}  // namespace

const char* rate_method_name(RateMethod m) {
  switch (m) {
    case RateMethod::Envelope: return "envelope";
    case RateMethod::HopfLaxDP: return "hopf_lax_dp";
    case RateMethod::FiniteDifference: return "finite_difference";
  }
  return "unknown";
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) fail(ErrorCode::Domain, "uniform_grid: need n >= 2 and hi > lo");
  std::vector<double> xs(n);
  const double dx = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) xs[i] = lo + dx * static_cast<double>(i);
  xs.back() = hi;
  return xs;
}

RateProfile envelope(const PushForward& pf, const std::vector<double>& xs) {
  check_grid(xs, "envelope", false);
  const std::vector<Arc> arcs = monotone_arcs(pf);
  const std::size_t n = xs.size();

  std::vector<std::vector<Candidate>> cands(n);
  parallel_for(n, [&](std::size_t i) { cands[i] = candidates_at(arcs, xs[i]); });

  RateProfile r;
  r.t = pf.t;
  r.method = RateMethod::Envelope;
  r.xs = xs;
  r.values.resize(n);
  r.left_slope.resize(n);
  r.right_slope.resize(n);
  r.state_space = pf.state_space;
  std::vector<int> arg(n);
  std::vector<bool> tie_node(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (cands[i].empty()) {
      std::ostringstream os;
      os << "envelope: grid point x = " << xs[i] << " is not covered by any branch at t = "
         << pf.t;
      fail(ErrorCode::Coverage, os.str());
    }
    const Candidate best = best_of(cands[i]);
    r.values[i] = best.u;
    arg[i] = best.arc;
    auto g = tied_gradients(cands[i], best.u);
    r.left_slope[i] = g.front();
    r.right_slope[i] = g.back();
    if (g.size() >= 2) {
      tie_node[i] = true;
      r.nondiff_points.push_back({xs[i], std::move(g)});
    }
  }

  SwitchFinder finder(arcs, r.nondiff_points);
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!tie_node[i] && !tie_node[i + 1] && arg[i] != arg[i + 1])
      finder.search(xs[i], arg[i], xs[i + 1], arg[i + 1], 0);
  std::sort(r.nondiff_points.begin(), r.nondiff_points.end(),
            [](const NondiffPoint& a, const NondiffPoint& b) { return a.x < b.x; });

  // The minimum of I_t sits where some branch crosses p = 0; include those
  // points so the renormalization does not depend on the grid.
  double lowest = *std::min_element(r.values.begin(), r.values.end());
  for (const Arc& a : arcs) {
    for (std::size_t k = 0; k + 1 < a.x.size(); ++k) {
      if ((a.p[k] > 0.0) == (a.p[k + 1] > 0.0)) continue;
      for (double x : hermite_critical_points(a, k)) {
        if (x < xs.front() || x > xs.back()) continue;
        lowest = std::min(lowest, best_of(candidates_at(arcs, x)).u);
      }
    }
  }
  for (double& v : r.values) v -= lowest;

  for (const auto& reg : detect_overhangs(pf).regions) r.overhangs.push_back({reg.x_lo, reg.x_hi});
  return r;
}

RateProfile hopf_lax_dp(const ModelSpec& model, const RateFunctionSpec& spec, double t,
                        const std::vector<double>& xs, std::size_t n_steps) {
  check_grid(xs, "hopf_lax_dp", true);
  if (n_steps < 4) fail(ErrorCode::Domain, "hopf_lax_dp: n_steps must be >= 4");
  if (!(t >= 0.0)) fail(ErrorCode::Domain, "hopf_lax_dp: t must be >= 0");
  // Minimizers may start outside the reported grid.
  const ExtendedGrid g = extend_grid(model, spec, xs);
  const std::vector<double>& ext = g.xs;
  const std::size_t m = ext.size();

  std::vector<double> cur = initial_values(spec, ext);
  if (t > 0.0) {
    const double dt = t / static_cast<double>(n_steps);
    // cost[b * m + a] = dt * L((a + b) / 2, (b - a) / dt); inf when infeasible.
    std::vector<double> cost(m * m, kInf);
    parallel_for(m, [&](std::size_t b) {
      for (std::size_t a = 0; a < m; ++a) {
        try {
          cost[b * m + a] =
              dt * lagrangian(model, 0.5 * (ext[a] + ext[b]), (ext[b] - ext[a]) / dt).value;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::UnboundedVelocity) throw;
        }
      }
    });
    std::vector<double> next(m);
    for (std::size_t s = 0; s < n_steps; ++s) {
      parallel_for(m, [&](std::size_t b) {
        double best = kInf;
        for (std::size_t a = 0; a < m; ++a) best = std::min(best, cur[a] + cost[b * m + a]);
        next[b] = best;
      });
      for (std::size_t b = 0; b < m; ++b)
        if (!std::isfinite(next[b])) {
          std::ostringstream os;
          os << "hopf_lax_dp: every transition into x = " << ext[b] << " is infeasible";
          fail(ErrorCode::Coverage, os.str());
        }
      cur.swap(next);
    }
  }

  RateProfile r;
  r.t = t;
  r.method = RateMethod::HopfLaxDP;
  r.xs = xs;
  r.values = g.restrict(cur);
  r.state_space = model.state_space();
  renormalize_by_grid_min(r);
  difference_slopes(r);
  return r;
}

RateProfile hj_fd_solve(const ModelSpec& model, const RateFunctionSpec& spec, double t,
                        const std::vector<double>& xs, const FdOptions& options) {
  check_grid(xs, "hj_fd_solve", true);
  if (!(t >= 0.0)) fail(ErrorCode::Domain, "hj_fd_solve: t must be >= 0");
  if (!(options.cfl > 0.0 && options.cfl <= 1.0))
    fail(ErrorCode::Config, "hj_fd_solve: cfl must be in (0, 1]");
  // Characteristics enter the reported window from outside, so the scheme
  // runs on the grid continued towards the boundary; its ends are outflow.
  const ExtendedGrid g = extend_grid(model, spec, xs);
  const std::vector<double>& x = g.xs;
  const std::size_t n = x.size();
  const double dx = xs[1] - xs[0];
  std::vector<double> u = initial_values(spec, x), next(n), dminus(n), dplus(n), sigma(n);

  double s = 0.0;
  std::size_t steps = 0;
  while (s < t) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double d = (u[i + 1] - u[i]) / dx;
      dplus[i] = d;
      dminus[i + 1] = d;
    }
    dminus[0] = dplus[0];
    dplus[n - 1] = dminus[n - 1];
    // Local dissipation: dH/dp is monotone in p, so its largest magnitude
    // between the two one-sided slopes sits at one of them.
    double smax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sigma[i] = std::max(std::abs(velocity(model, x[i], dminus[i])),
                          std::abs(velocity(model, x[i], dplus[i])));
      smax = std::max(smax, sigma[i]);
    }
    double dt = options.cfl * dx / std::max(smax, 1e-12);
    if (dt < 1e-14 * std::max(1.0, t) || ++steps > options.max_steps) {
      std::ostringstream os;
      os << "hj_fd_solve: CFL step underflow (dt = " << dt << ", dissipation " << smax
         << ", step " << steps << ')';
      fail(ErrorCode::Config, os.str());
    }
    const bool last = dt >= t - s;
    if (last) dt = t - s;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double pm = dminus[i], pp = dplus[i];
      next[i] = u[i] - dt * (hamiltonian(model, x[i], 0.5 * (pm + pp)) - 0.5 * sigma[i] * (pp - pm));
    }
    next[0] = u[0] - dt * hamiltonian(model, x[0], dplus[0]);
    next[n - 1] = u[n - 1] - dt * hamiltonian(model, x[n - 1], dminus[n - 1]);
    u.swap(next);
    s = last ? t : s + dt;
  }

  RateProfile r;
  r.t = t;
  r.method = RateMethod::FiniteDifference;
  r.xs = xs;
  r.values = g.restrict(u);
  r.state_space = model.state_space();
  renormalize_by_grid_min(r);
  difference_slopes(r);
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    auto jump = [&](std::size_t k) { return r.left_slope[k] - r.right_slope[k]; };
    const double j = jump(i);
    if (j > options.kink_threshold && j >= jump(i - 1) && j > jump(i + 1))
      r.nondiff_points.push_back({xs[i], {r.left_slope[i], r.right_slope[i]}});
  }
  return r;
}

std::vector<NondiffPoint> classify_differentiability(const RateProfile& profile) {
  if (profile.method != RateMethod::Envelope)
    fail(ErrorCode::Precondition, "classify_differentiability: needs an envelope profile");
  const Interval space = profile.state_space;
  std::vector<NondiffPoint> out;
  for (const auto& q : profile.nondiff_points) {
    for (const Interval& iv : profile.overhangs) {
      if (q.x < iv.lo || q.x > iv.hi) continue;
      if (iv.lo > space.lo && iv.hi < space.hi) out.push_back(q);
      break;
    }
  }
  return out;
}

double linf_distance(const RateProfile& a, const RateProfile& b) {
  if (a.xs.size() != b.xs.size())
    fail(ErrorCode::Domain, "linf_distance: profiles live on different grids");
  double d = 0.0;
  for (std::size_t i = 0; i < a.xs.size(); ++i) {
    if (std::abs(a.xs[i] - b.xs[i]) > 1e-12)
      fail(ErrorCode::Domain, "linf_distance: profiles live on different grids");
    d = std::max(d, std::abs(a.values[i] - b.values[i]));
  }
  return d;
}

std::string profile_csv(const RateProfile& p) {
  std::vector<int> flag(p.xs.size(), 0);
  for (const auto& q : p.nondiff_points) {
    auto it = std::lower_bound(p.xs.begin(), p.xs.end(), q.x);
    std::size_t i = static_cast<std::size_t>(it - p.xs.begin());
    if (i == p.xs.size() || (i > 0 && q.x - p.xs[i - 1] < p.xs[i] - q.x)) --i;
    flag[i] = 1;
  }
  std::ostringstream os;
  os << "t,x,I_t,left_slope,right_slope,nondiff_flag\n";
  const std::string t = fmt_num(p.t);
  for (std::size_t i = 0; i < p.xs.size(); ++i)
    os << t << ',' << fmt_num(p.xs[i]) << ',' << fmt_num(p.values[i]) << ','
       << fmt_num(p.left_slope[i]) << ',' << fmt_num(p.right_slope[i]) << ',' << flag[i] << '\n';
  return os.str();
}

}  // namespace gnglab
