#include "gnglab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gnglab/format.hpp"

namespace gnglab {

namespace {

const char* region_kind_name(RegionKind k) {
  switch (k) {
    case RegionKind::Whole: return "whole";
    case RegionKind::UpperRight: return "upper_right";
    case RegionKind::LowerLeft: return "lower_left";
  }
  return "?";
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json points_json(const std::vector<PhasePoint>& pts) {
  Json a = Json::array();
  for (const PhasePoint& q : pts) a.push_back({q.x, q.p});
  return a;
}

// Minimal SVG canvas with a data-to-pixel mapping.
class Plot {
 public:
  Plot(double x_lo, double x_hi, double y_lo, double y_hi, const std::string& title)
      : x_lo_(x_lo), x_hi_(x_hi), y_lo_(y_lo), y_hi_(y_hi) {
    if (!(x_hi_ > x_lo_)) x_hi_ = x_lo_ + 1.0;
    if (!(y_hi_ > y_lo_)) y_hi_ = y_lo_ + 1.0;
    out_ = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kW) +
           "\" height=\"" + std::to_string(kH) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out_ += "<text x=\"" + std::to_string(kW / 2) + "\" y=\"20\" text-anchor=\"middle\">" +
            escape(title) + "</text>\n";
  }

  double px(double x) const { return kL + (x - x_lo_) / (x_hi_ - x_lo_) * (kW - kL - kR); }
  double py(double y) const { return kH - kB - (y - y_lo_) / (y_hi_ - y_lo_) * (kH - kT - kB); }

  void band(double x0, double x1, const char* fill) {
    const double a = px(std::max(x0, x_lo_)), b = px(std::min(x1, x_hi_));
    out_ += "<rect x=\"" + f(a) + "\" y=\"" + f(kT) + "\" width=\"" + f(std::max(b - a, 1.0)) +
            "\" height=\"" + f(kH - kT - kB) + "\" fill=\"" + fill + "\" fill-opacity=\"0.35\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& colour) {
    if (pts.size() < 2) return;
    out_ += "<polyline fill=\"none\" stroke=\"" + colour + "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) out_ += f(px(x)) + ',' + f(py(std::clamp(y, y_lo_, y_hi_))) + ' ';
    out_ += "\"/>\n";
  }

  void marker(double x, double y, const std::string& colour) {
    out_ += "<circle cx=\"" + f(px(x)) + "\" cy=\"" + f(py(y)) + "\" r=\"3.5\" fill=\"" + colour +
            "\"/>\n";
  }

  void legend(std::size_t row, const std::string& label, const std::string& colour) {
    const double y = kT + 14.0 + 16.0 * row;
    out_ += "<line x1=\"" + f(kW - kR - 120.0) + "\" y1=\"" + f(y - 4) + "\" x2=\"" +
            f(kW - kR - 100.0) + "\" y2=\"" + f(y - 4) + "\" stroke=\"" + colour +
            "\" stroke-width=\"2\"/>\n";
    out_ += "<text x=\"" + f(kW - kR - 95.0) + "\" y=\"" + f(y) + "\">" + escape(label) +
            "</text>\n";
  }

  std::string finish(const std::string& x_label, const std::string& y_label) {
    out_ += "<rect x=\"" + f(kL) + "\" y=\"" + f(kT) + "\" width=\"" + f(kW - kL - kR) +
            "\" height=\"" + f(kH - kT - kB) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
      const double x = x_lo_ + (x_hi_ - x_lo_) * k / 4.0;
      const double y = y_lo_ + (y_hi_ - y_lo_) * k / 4.0;
      out_ += "<text x=\"" + f(px(x)) + "\" y=\"" + f(kH - kB + 16.0) +
              "\" text-anchor=\"middle\">" + tick(x) + "</text>\n";
      out_ += "<text x=\"" + f(kL - 6.0) + "\" y=\"" + f(py(y) + 4.0) +
              "\" text-anchor=\"end\">" + tick(y) + "</text>\n";
    }
    out_ += "<text x=\"" + f((kL + kW - kR) / 2.0) + "\" y=\"" + f(kH - 8.0) +
            "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
    out_ += "<text x=\"16\" y=\"" + f((kT + kH - kB) / 2.0) + "\" transform=\"rotate(-90 16 " +
            f((kT + kH - kB) / 2.0) + ")\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
    out_ += "</svg>\n";
    return out_;
  }

 private:
  static constexpr int kW = 720, kH = 480;
  static constexpr double kL = 64, kR = 20, kT = 32, kB = 48;

  static std::string f(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
  }
  static std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
  }
  static std::string escape(const std::string& s) {
    std::string r;
    for (char c : s) {
      if (c == '<') r += "&lt;";
      else if (c == '>') r += "&gt;";
      else if (c == '&') r += "&amp;";
      else r += c;
    }
    return r;
  }

  double x_lo_, x_hi_, y_lo_, y_hi_;
  std::string out_;
};

const char* colour(std::size_t k) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  return palette[k % 8];
}

}  // namespace

Json report_header(const std::string& kind) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = kind;
  return j;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json to_json(const ModelSpec& model) {
  Json j;
  j["description"] = model.describe();
  if (model.is_curie_weiss()) {
    j["type"] = "curie_weiss";
    j["beta"] = model.beta();
    j["h"] = model.h();
  } else {
    j["type"] = "diffusion";
    j["potential"] = model.potential().coeffs();
  }
  return j;
}

Json to_json(const RateFunctionSpec& spec) {
  Json j;
  j["description"] = spec.describe();
  switch (spec.kind()) {
    case RateKind::CWEntropy:
      j["type"] = "cw_entropy";
      j["alpha"] = spec.alpha();
      j["theta"] = spec.theta();
      break;
    case RateKind::Polynomial:
      j["type"] = "polynomial";
      j["coeffs"] = spec.polynomial_part().coeffs();
      break;
    case RateKind::Tabulated:
      j["type"] = "tabulated";
      j["domain"] = {spec.domain().lo, spec.domain().hi};
      break;
  }
  j["normalization"] = spec.normalization();
  return j;
}

Json to_json(const IntegratorConfig& c) {
  Json j;
  j["rel_tol"] = c.rel_tol;
  j["abs_tol"] = c.abs_tol;
  j["max_step"] = c.max_step;
  j["p_cap"] = c.p_cap;
  j["boundary_margin"] = c.boundary_margin;
  return j;
}

Json to_json(const FlowResult& r) {
  Json j;
  const FlowSample& last = r.last();
  j["escaped"] = r.escaped;
  j["corner"] = r.escaped ? Json(corner_name(r.corner)) : Json(nullptr);
  j["escape_time"] = r.escaped ? Json(r.escape_time) : Json(nullptr);
  j["final"] = {{"t", last.t}, {"x", last.x}, {"p", last.p}, {"u", last.u}, {"H", last.energy}};
  j["energy_drift"] = r.energy_drift;
  j["samples"] = r.samples.size();
  return j;
}

Json to_json(const OverhangReport& rep) {
  Json j;
  j["is_graph"] = rep.is_graph;
  Json regions = Json::array();
  for (const OverhangRegion& r : rep.regions) {
    Json w = Json::array();
    for (const OverhangWitness& o : r.witnesses) w.push_back({{"branch", o.branch}, {"p", o.p}});
    regions.push_back({{"x_lo", r.x_lo},
                       {"x_hi", r.x_hi},
                       {"x_witness", r.x_witness},
                       {"cross_branch", r.cross_branch},
                       {"witnesses", w}});
  }
  j["regions"] = regions;
  return j;
}

Json to_json(const std::vector<NondiffPoint>& points) {
  Json a = Json::array();
  for (const NondiffPoint& n : points) a.push_back({{"x", n.x}, {"gradients", n.gradients}});
  return a;
}

Json to_json(const HeatingReport& rep) {
  Json j;
  j["x0"] = rep.data.x0;
  j["m"] = rep.data.m;
  j["c"] = rep.data.c;
  j["i0_dd"] = rep.data.i0_dd;
  j["t0_linearized"] = rep.t0_linearized;
  j["t1_printed"] = rep.t1_printed;
  j["discrepancy_flag"] = rep.discrepancy_flag;
  j["slope_crossing"] = rep.slope_crossing;
  return j;
}

Json to_json(const OrderRegion& region, const OrderCertificate& cert) {
  Json j;
  j["region"] = {{"kind", region_kind_name(region.kind)}, {"y", region.y}, {"q", region.q}};
  j["criterion"] = cert.criterion;
  j["holds"] = cert.holds;
  if (cert.counterexample) {
    const OrderCounterexample& c = *cert.counterexample;
    j["counterexample"] = {{"x", c.x}, {"p", c.p}, {"condition", c.condition}, {"value", c.value}};
  } else {
    j["counterexample"] = nullptr;
  }
  return j;
}

Json to_json(const Loop& loop) {
  Json j;
  j["a"] = loop.a;
  j["b"] = loop.b;
  j["energy"] = loop.energy;
  j["period"] = opt(loop.period);
  j["points"] = loop.upper.size();
  j["lower"] = points_json(loop.lower);
  j["upper"] = points_json(loop.upper);
  return j;
}

Json to_json(const ScenarioTimeline& tl) {
  Json j;
  Json entries = Json::array();
  for (const TimelineEntry& e : tl.entries) {
    Json r;
    r["t"] = e.t;
    r["is_graph"] = e.is_graph;
    OverhangReport rep{e.regions, e.is_graph};
    r["overhang_regions"] = to_json(rep)["regions"];
    r["nondiff"] = to_json(e.nondiff);
    r["certified_nondiff"] = to_json(e.certified);
    r["error"] = e.error.empty() ? Json(nullptr) : Json(e.error);
    entries.push_back(std::move(r));
  }
  j["t0"] = opt(tl.t0);
  j["t1"] = opt(tl.t1);
  j["t2"] = opt(tl.t2);
  if (tl.constants) {
    j["recovery"] = {{"z", tl.constants->z},
                     {"kappa", tl.constants->kappa},
                     {"window_expected", tl.window_expected},
                     {"t1_ref", opt(tl.t1_ref)}};
  }
  j["entries"] = entries;
  return j;
}

Json profile_summary(const RateProfile& p, const std::vector<NondiffPoint>& certified) {
  Json j;
  j["t"] = p.t;
  j["method"] = rate_method_name(p.method);
  j["points"] = p.xs.size();
  j["x_range"] = {p.xs.front(), p.xs.back()};
  j["nondiff"] = to_json(p.nondiff_points);
  j["certified_nondiff"] = to_json(certified);
  return j;
}

std::string loop_csv(const Loop& loop) {
  std::string out = "side,x,p\n";
  for (const PhasePoint& q : loop.lower) out += "lower," + fmt_num(q.x) + ',' + fmt_num(q.p) + '\n';
  for (const PhasePoint& q : loop.upper) out += "upper," + fmt_num(q.x) + ',' + fmt_num(q.p) + '\n';
  return out;
}

std::string svg_rate_profiles(const std::vector<RateProfile>& profiles, const std::string& title) {
  double x_lo = kInf, x_hi = -kInf, y_lo = kInf, y_hi = -kInf;
  for (const RateProfile& p : profiles)
    for (std::size_t i = 0; i < p.xs.size(); ++i) {
      x_lo = std::min(x_lo, p.xs[i]);
      x_hi = std::max(x_hi, p.xs[i]);
      if (std::isfinite(p.values[i])) {
        y_lo = std::min(y_lo, p.values[i]);
        y_hi = std::max(y_hi, p.values[i]);
      }
    }
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0;
  if (!std::isfinite(y_lo)) y_lo = 0.0, y_hi = 1.0;
  const double pad = 0.05 * (y_hi - y_lo);
  Plot plot(x_lo, x_hi, y_lo - pad, y_hi + pad, title);
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    const RateProfile& p = profiles[k];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < p.xs.size(); ++i) pts.emplace_back(p.xs[i], p.values[i]);
    plot.polyline(pts, colour(k));
    for (const NondiffPoint& n : p.nondiff_points) {
      const auto it = std::lower_bound(p.xs.begin(), p.xs.end(), n.x);
      const std::size_t i = std::min<std::size_t>(it - p.xs.begin(), p.xs.size() - 1);
      plot.marker(n.x, p.values[i], colour(k));
    }
    if (k < 12)
      plot.legend(k, std::string(rate_method_name(p.method)) + " t=" + fmt_num(p.t), colour(k));
  }
  return plot.finish("x", "I_t(x)");
}

std::string svg_pushforward(const std::vector<PushForward>& graphs, const std::string& title) {
  constexpr double kPClip = 4.0;
  double x_lo = -1.0, x_hi = 1.0;
  if (!graphs.empty() && graphs.front().state_space.bounded()) {
    x_lo = graphs.front().state_space.lo;
    x_hi = graphs.front().state_space.hi;
  } else {
    x_lo = kInf, x_hi = -kInf;
    for (const PushForward& g : graphs)
      for (const Branch& b : g.branches)
        for (const BranchPoint& q : b.points) {
          if (std::abs(q.p) > kPClip) continue;
          x_lo = std::min(x_lo, q.x);
          x_hi = std::max(x_hi, q.x);
        }
    if (!std::isfinite(x_lo)) x_lo = -1.0, x_hi = 1.0;
  }
  Plot plot(x_lo, x_hi, -kPClip, kPClip, title);
  for (const PushForward& g : graphs)
    for (const OverhangRegion& r : detect_overhangs(g).regions) plot.band(r.x_lo, r.x_hi, "#ffd54f");
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    for (const Branch& b : graphs[k].branches) {
      // Split where the branch leaves the plotted momentum window.
      std::vector<std::pair<double, double>> run;
      for (const BranchPoint& q : b.points) {
        if (std::abs(q.p) > kPClip) {
          plot.polyline(run, colour(k));
          run.clear();
          continue;
        }
        run.emplace_back(q.x, q.p);
      }
      plot.polyline(run, colour(k));
    }
    if (k < 12) plot.legend(k, "t=" + fmt_num(graphs[k].t), colour(k));
  }
  return plot.finish("x", "p");
}

}  // namespace gnglab
