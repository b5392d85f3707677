#include "gnglab/pushforward.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gnglab/format.hpp"
#include "gnglab/parallel.hpp"

namespace gnglab {

namespace {

constexpr std::size_t kMaxGraphSamples = 1u << 16;
constexpr std::size_t kThinComponent = 8;
constexpr double kDecreaseTol = 1e-10;
constexpr double kWitnessGap = 1e-6;

GraphSample make_sample(const RateFunctionSpec& spec, double x0) {
  const RateValue r = rate0(spec, x0);
  if (!std::isfinite(r.value) || !std::isfinite(r.deriv)) {
    std::ostringstream os;
    os << "sample_initial_graph: I0 or I0' not finite at x = " << x0 << " for " << spec.describe();
    fail(ErrorCode::Config, os.str());
  }
  return {x0, r.deriv, r.value};
}

// Window {|I0'| <= p_window} for rate functions on the whole line.
Interval polynomial_window(const RateFunctionSpec& spec, double p_window) {
  const Polynomial d = spec.polynomial_part().derivative();
  if (d.degree() < 1 || d.degree() % 2 == 0 || d.leading() <= 0.0)
    fail(ErrorCode::Config, "sample_initial_graph: " + spec.describe() +
                                " does not have I0' running from -inf to +inf");
  double bound = 0.0;
  for (double shift : {-p_window, p_window}) {
    std::vector<double> c = d.coeffs();
    c[0] += shift;
    bound = std::max(bound, Polynomial(c).root_bound());
  }
  auto f = [&](double x) { return std::abs(d(x)) - p_window; };
  const auto roots = scan_roots(f, -bound, bound, 20001);
  if (roots.size() < 2) fail(ErrorCode::Config, "sample_initial_graph: empty sampling window");
  return {roots.front(), roots.back()};
}

PushedSample push_one(const ModelSpec& model, const GraphSample& s, double t,
                      const IntegratorConfig& config, std::size_t index) {
  PushedSample out;
  out.origin = s;
  if (t == 0.0) {
    out.x = s.x0;
    out.p = s.p0;
    out.u = s.u0;
    return out;
  }
  try {
    const double times[] = {t};
    const Checkpoint cp = integrate_checkpoints(model, {s.x0, s.p0}, s.u0, times, config)[0];
    out.alive = cp.alive;
    out.corner = cp.corner;
    out.x = cp.x;
    out.p = cp.p;
    out.u = cp.u;
  } catch (const Error& e) {
    std::ostringstream os;
    os << "push_graph: sample " << index << " (x0 = " << s.x0 << ", p0 = " << s.p0
       << "): " << e.what();
    throw Error(e.code(), os.str());
  }
  return out;
}

PushForward assemble(double t, const ModelSpec& model, std::vector<PushedSample> samples) {
  PushForward pf;
  pf.t = t;
  pf.state_space = model.state_space();
  std::size_t escaped = 0;
  const std::size_t n = samples.size();
  std::size_t i = 0;
  while (i < n) {
    if (!samples[i].alive) {
      ++escaped;
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && samples[j + 1].alive) ++j;
    Branch b;
    const int id = static_cast<int>(pf.branches.size());
    for (std::size_t k = i; k <= j; ++k) {
      samples[k].branch = id;
      b.points.push_back({samples[k].origin.x0, samples[k].x, samples[k].p, samples[k].u});
    }
    b.origin_lo = i > 0 ? samples[i - 1].origin.x0 : samples.front().origin.x0;
    b.origin_hi = j + 1 < n ? samples[j + 1].origin.x0 : samples.back().origin.x0;
    b.left_limit = i > 0 ? samples[i - 1].corner : Corner::Minus;
    b.right_limit = j + 1 < n ? samples[j + 1].corner : Corner::Plus;
    if (b.points.size() < kThinComponent) {
      std::ostringstream os;
      os << "branch " << id << " on x0 in (" << b.origin_lo << ", " << b.origin_hi
         << ") has only " << b.points.size() << " samples";
      pf.warnings.push_back(os.str());
    }
    pf.branches.push_back(std::move(b));
    i = j + 1;
  }
  pf.escaped_fraction = n ? static_cast<double>(escaped) / static_cast<double>(n) : 0.0;
  const bool connects = std::any_of(pf.branches.begin(), pf.branches.end(), [](const Branch& b) {
    return b.left_limit == Corner::Minus && b.right_limit == Corner::Plus;
  });
  if (!connects) pf.warnings.push_back("no branch connects the (-) corner to the (+) corner");
  pf.samples = std::move(samples);
  return pf;
}

// p on a branch at position x, by linear interpolation on the first segment
// covering x in the given index range; the nearest endpoint otherwise.
bool branch_p_at(const Branch& b, double x, std::size_t from, std::size_t to, double& p) {
  for (std::size_t k = from; k < to; ++k) {
    const BranchPoint& a = b.points[k];
    const BranchPoint& c = b.points[k + 1];
    const double lo = std::min(a.x, c.x), hi = std::max(a.x, c.x);
    if (x < lo || x > hi) continue;
    const double w = hi > lo ? (x - a.x) / (c.x - a.x) : 0.0;
    p = a.p + w * (c.p - a.p);
    return true;
  }
  return false;
}

void within_branch(const Branch& b, int id, std::vector<OverhangRegion>& out) {
  const auto& pts = b.points;
  const std::size_t n = pts.size();
  std::size_t i = 0;
  while (i + 1 < n) {
    if (!(pts[i + 1].x < pts[i].x - kDecreaseTol)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j + 1 < n && pts[j + 1].x < pts[j].x - kDecreaseTol) ++j;
    OverhangRegion r;
    r.x_lo = pts[j].x;
    r.x_hi = pts[i].x;
    r.x_witness = 0.5 * (r.x_lo + r.x_hi);
    double p_fold = 0.0, p_other = 0.0;
    branch_p_at(b, r.x_witness, i, j, p_fold);
    bool found = false;
    // Nearest rising segment before the fold, then after it.
    for (std::size_t k = i; k-- > 0 && !found;)
      found = branch_p_at(b, r.x_witness, k, k + 1, p_other);
    for (std::size_t k = j; k + 1 < n && !found; ++k)
      found = branch_p_at(b, r.x_witness, k, k + 1, p_other);
    if (found && std::abs(p_fold - p_other) >= kWitnessGap) {
      r.witnesses = {{id, p_other}, {id, p_fold}};
      out.push_back(std::move(r));
    }
    i = j;
  }
}

Interval branch_reach(const Branch& b, const Interval& space) {
  double lo = kInf, hi = -kInf;
  for (const auto& q : b.points) {
    lo = std::min(lo, q.x);
    hi = std::max(hi, q.x);
  }
  // An end escaping to a corner sweeps out to that corner's boundary.
  for (Corner c : {b.left_limit, b.right_limit}) {
    if (c == Corner::Minus) lo = space.lo;
    if (c == Corner::Plus) hi = space.hi;
  }
  return {lo, hi};
}

double witness_p(const Branch& b, double x) {
  double p = 0.0;
  if (b.points.size() >= 2 && branch_p_at(b, x, 0, b.points.size() - 1, p)) return p;
  // Outside the sampled part the branch is heading for a corner.
  const BranchPoint& first = b.points.front();
  const BranchPoint& last = b.points.back();
  return std::abs(x - first.x) < std::abs(x - last.x) ? first.p : last.p;
}

}  // namespace

std::vector<GraphSample> sample_initial_graph(const RateFunctionSpec& spec, std::size_t n,
                                              double margin) {
  SamplingOptions opt;
  opt.n = n;
  opt.margin = margin;
  return sample_initial_graph(spec, opt);
}

std::vector<GraphSample> sample_initial_graph(const RateFunctionSpec& spec,
                                              const SamplingOptions& options) {
  if (options.n < 16) fail(ErrorCode::Config, "sample_initial_graph: n must be >= 16");
  if (!(options.margin > 0.0)) fail(ErrorCode::Config, "sample_initial_graph: margin must be > 0");
  if (!(options.slope_budget > 0.0) || !(options.p_window > 0.0))
    fail(ErrorCode::Config, "sample_initial_graph: slope budget and p_window must be > 0");

  Interval window;
  if (spec.kind() == RateKind::Polynomial) {
    window = polynomial_window(spec, options.p_window);
  } else {
    const Interval dom = spec.domain();
    window = {dom.lo + options.margin, dom.hi - options.margin};
    if (!(window.lo < window.hi))
      fail(ErrorCode::Config, "sample_initial_graph: margin leaves an empty domain");
  }

  std::vector<GraphSample> s;
  s.reserve(options.n);
  const double dx = (window.hi - window.lo) / static_cast<double>(options.n - 1);
  for (std::size_t i = 0; i < options.n; ++i) {
    const double x = i + 1 == options.n ? window.hi : window.lo + dx * static_cast<double>(i);
    s.push_back(make_sample(spec, x));
  }

  for (bool changed = true; changed && s.size() < kMaxGraphSamples;) {
    changed = false;
    std::vector<GraphSample> next;
    next.reserve(s.size() * 2);
    for (std::size_t i = 0; i < s.size(); ++i) {
      next.push_back(s[i]);
      if (i + 1 == s.size()) break;
      const double mid = 0.5 * (s[i].x0 + s[i + 1].x0);
      if (std::abs(s[i + 1].p0 - s[i].p0) > options.slope_budget && mid > s[i].x0 &&
          mid < s[i + 1].x0 && s[i + 1].x0 - s[i].x0 > 1e-12) {
        next.push_back(make_sample(spec, mid));
        changed = true;
      }
    }
    s = std::move(next);
  }
  return s;
}

PushForward push_graph(const ModelSpec& model, const std::vector<GraphSample>& samples, double t,
                       const IntegratorConfig& config) {
  if (!(t >= 0.0) || !std::isfinite(t)) fail(ErrorCode::Domain, "push_graph: t must be >= 0");
  if (samples.empty()) fail(ErrorCode::Domain, "push_graph: no samples");
  std::vector<PushedSample> out(samples.size());
  parallel_for(samples.size(),
               [&](std::size_t i) { out[i] = push_one(model, samples[i], t, config, i); });
  return assemble(t, model, std::move(out));
}

PushForward push_graph(const ModelSpec& model, const RateFunctionSpec& spec,
                       const std::vector<GraphSample>& samples, double t,
                       const IntegratorConfig& config, const RefineOptions& refine) {
  PushForward base = push_graph(model, samples, t, config);
  if (t == 0.0) return base;
  std::vector<PushedSample> cur = std::move(base.samples);

  auto needs_midpoint = [&](const PushedSample& a, const PushedSample& b) {
    if (b.origin.x0 - a.origin.x0 <= refine.min_spacing) return false;
    if (a.alive != b.alive) return true;
    // Escapes to opposite corners bracket a surviving characteristic.
    if (!a.alive) return a.corner != b.corner;
    return std::abs(b.x - a.x) > refine.x_budget || std::abs(b.p - a.p) > refine.p_budget;
  };

  while (cur.size() < refine.max_samples) {
    std::vector<std::size_t> gaps;
    for (std::size_t i = 0; i + 1 < cur.size(); ++i)
      if (needs_midpoint(cur[i], cur[i + 1])) gaps.push_back(i);
    if (gaps.empty()) break;
    if (cur.size() + gaps.size() > refine.max_samples) gaps.resize(refine.max_samples - cur.size());
    std::vector<PushedSample> mids(gaps.size());
    parallel_for(gaps.size(), [&](std::size_t k) {
      const double x0 = 0.5 * (cur[gaps[k]].origin.x0 + cur[gaps[k] + 1].origin.x0);
      mids[k] = push_one(model, make_sample(spec, x0), t, config, cur.size() + k);
    });
    std::vector<PushedSample> next;
    next.reserve(cur.size() + mids.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      next.push_back(cur[i]);
      if (k < gaps.size() && gaps[k] == i) next.push_back(mids[k++]);
    }
    cur = std::move(next);
  }
  for (auto& s : cur) s.branch = -1;
  return assemble(t, model, std::move(cur));
}

std::vector<PushForward> push_graph_series(const ModelSpec& model,
                                           const std::vector<GraphSample>& samples,
                                           const std::vector<double>& times,
                                           const IntegratorConfig& config) {
  for (std::size_t k = 0; k < times.size(); ++k)
    if (!(times[k] >= 0.0) || (k > 0 && times[k] < times[k - 1]))
      fail(ErrorCode::Domain, "push_graph_series: times must be ascending and >= 0");
  std::vector<std::vector<Checkpoint>> runs(samples.size());
  parallel_for(samples.size(), [&](std::size_t i) {
    const GraphSample& s = samples[i];
    try {
      runs[i] = integrate_checkpoints(model, {s.x0, s.p0}, s.u0, times, config);
    } catch (const Error& e) {
      std::ostringstream os;
      os << "push_graph_series: sample " << i << " (x0 = " << s.x0 << "): " << e.what();
      throw Error(e.code(), os.str());
    }
  });
  std::vector<PushForward> out;
  out.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<PushedSample> ps(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Checkpoint& cp = runs[i][k];
      ps[i].origin = samples[i];
      ps[i].alive = cp.alive;
      ps[i].corner = cp.corner;
      ps[i].x = cp.x;
      ps[i].p = cp.p;
      ps[i].u = cp.u;
    }
    out.push_back(assemble(times[k], model, std::move(ps)));
  }
  return out;
}

OverhangReport detect_overhangs(const PushForward& pf) {
  std::vector<OverhangRegion> raw;
  for (std::size_t k = 0; k < pf.branches.size(); ++k)
    within_branch(pf.branches[k], static_cast<int>(k), raw);

  for (std::size_t a = 0; a < pf.branches.size(); ++a) {
    const Interval ra = branch_reach(pf.branches[a], pf.state_space);
    for (std::size_t b = a + 1; b < pf.branches.size(); ++b) {
      const Interval rb = branch_reach(pf.branches[b], pf.state_space);
      const double lo = std::max(ra.lo, rb.lo), hi = std::min(ra.hi, rb.hi);
      if (!(hi > lo)) continue;
      OverhangRegion r;
      r.x_lo = lo;
      r.x_hi = hi;
      r.cross_branch = true;
      // Witness inside the part both branches actually sample where possible.
      double flo = std::isfinite(lo) ? lo : std::min(ra.hi, rb.hi) - 1.0;
      double fhi = std::isfinite(hi) ? hi : std::max(ra.lo, rb.lo) + 1.0;
      r.x_witness = 0.5 * (flo + fhi);
      const double pa = witness_p(pf.branches[a], r.x_witness);
      const double pb = witness_p(pf.branches[b], r.x_witness);
      if (std::abs(pa - pb) < kWitnessGap) continue;
      r.witnesses = {{static_cast<int>(a), pa}, {static_cast<int>(b), pb}};
      raw.push_back(std::move(r));
    }
  }

  std::sort(raw.begin(), raw.end(),
            [](const OverhangRegion& l, const OverhangRegion& r) { return l.x_lo < r.x_lo; });
  OverhangReport rep;
  for (auto& r : raw) {
    if (!rep.regions.empty() && r.x_lo <= rep.regions.back().x_hi) {
      OverhangRegion& m = rep.regions.back();
      m.x_hi = std::max(m.x_hi, r.x_hi);
      m.cross_branch = m.cross_branch || r.cross_branch;
      m.witnesses.insert(m.witnesses.end(), r.witnesses.begin(), r.witnesses.end());
    } else {
      rep.regions.push_back(std::move(r));
    }
  }
  rep.is_graph = rep.regions.empty();
  return rep;
}

std::string pushforward_csv(const PushForward& pf) {
  std::ostringstream os;
  os << "t,x0,p0,x,p,u,branch_id,status\n";
  const std::string t = fmt_num(pf.t);
  for (const auto& s : pf.samples) {
    os << t << ',' << fmt_num(s.origin.x0) << ',' << fmt_num(s.origin.p0) << ',';
    if (s.alive) {
      os << fmt_num(s.x) << ',' << fmt_num(s.p) << ',' << fmt_num(s.u) << ',' << s.branch
         << ",alive\n";
    } else {
      os << ",,,," << "escaped" << corner_name(s.corner) << '\n';
    }
  }
  return os.str();
}

}  // namespace gnglab
