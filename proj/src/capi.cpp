#include "gnglab/gnglab.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "gnglab/analysis.hpp"
#include "gnglab/parallel.hpp"
#include "gnglab/report.hpp"
#include "gnglab/scenario.hpp"

using namespace gnglab;

struct gng_model {
  ModelSpec spec;
};
struct gng_rate {
  RateFunctionSpec spec;
};
struct gng_trajectory {
  FlowResult result;
};
struct gng_pushforward {
  PushForward pf;
  OverhangReport overhangs;
};
struct gng_profile {
  RateProfile profile;
  std::vector<NondiffPoint> certified;
};
struct gng_loop {
  Loop loop;
};
struct gng_scenario {
  ScenarioConfig config;
};

namespace {

thread_local std::string t_last_error;

struct BadArgument {
  const char* what;
};

gng_status to_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::Domain: return GNG_ERR_DOMAIN;
    case ErrorCode::Config: return GNG_ERR_CONFIG;
    case ErrorCode::UnboundedVelocity: return GNG_ERR_UNBOUNDED_VELOCITY;
    case ErrorCode::IntegrationFailure: return GNG_ERR_INTEGRATION_FAILURE;
    case ErrorCode::Escaped: return GNG_ERR_ESCAPED;
    case ErrorCode::Coverage: return GNG_ERR_COVERAGE;
    case ErrorCode::Inapplicable: return GNG_ERR_INAPPLICABLE;
    case ErrorCode::Bracket: return GNG_ERR_BRACKET;
    case ErrorCode::NonRotating: return GNG_ERR_NON_ROTATING;
    case ErrorCode::Precondition: return GNG_ERR_PRECONDITION;
    case ErrorCode::Io: return GNG_ERR_IO;
  }
  return GNG_ERR_INTERNAL;
}

// Runs f, translating every exception into a status and the thread's message.
template <class F>
gng_status guard(F&& f) noexcept {
  try {
    f();
    t_last_error.clear();
    return GNG_OK;
  } catch (const BadArgument& e) {
    t_last_error = e.what;
    return GNG_ERR_INVALID_ARGUMENT;
  } catch (const Error& e) {
    t_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    t_last_error = "out of memory";
    return GNG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return GNG_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown exception";
    return GNG_ERR_INTERNAL;
  }
}

template <class T>
const T& need(const T* p, const char* what) {
  if (p == nullptr) throw BadArgument{what};
  return *p;
}

template <class T>
T& need_out(T* p, const char* what) {
  if (p == nullptr) throw BadArgument{what};
  return *p;
}

char* to_c_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void put_string(char** out, const std::string& s) { need_out(out, "null output string") = to_c_string(s); }

IntegratorConfig integrator(const gng_integrator_options* o) {
  IntegratorConfig c;
  if (o) {
    c.rel_tol = o->rel_tol;
    c.abs_tol = o->abs_tol;
    c.max_step = o->max_step;
    c.p_cap = o->p_cap;
    c.boundary_margin = o->boundary_margin;
  }
  c.validate();
  return c;
}

GraphOptions graph(const gng_graph_options* o) {
  GraphOptions g;
  if (o) {
    g.sampling.n = o->samples;
    g.sampling.margin = o->margin;
    g.sampling.p_window = o->p_window;
    if (!o->refine) g.refine.max_samples = 0;
  }
  return g;
}

PushForward push(const ModelSpec& m, const RateFunctionSpec& r, double t, const GraphOptions& g,
                 const IntegratorConfig& c) {
  const auto samples = sample_initial_graph(r, g.sampling);
  if (g.refine.max_samples == 0) return push_graph(m, samples, t, c);
  return push_graph(m, r, samples, t, c, g.refine);
}

gng_profile_options profile_options(const gng_profile_options* o) {
  gng_profile_options p;
  gng_profile_defaults(&p);
  return o ? *o : p;
}

Interval window(const ModelSpec& m, const gng_profile_options& p) {
  return p.lo < p.hi ? Interval{p.lo, p.hi} : default_grid_window(m);
}

}  // namespace

extern "C" {

const char* gng_version(void) { return "1.0.0"; }

const char* gng_status_name(gng_status s) {
  switch (s) {
    case GNG_OK: return "ok";
    case GNG_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case GNG_ERR_DOMAIN: return "domain";
    case GNG_ERR_CONFIG: return "config";
    case GNG_ERR_UNBOUNDED_VELOCITY: return "unbounded_velocity";
    case GNG_ERR_INTEGRATION_FAILURE: return "integration_failure";
    case GNG_ERR_ESCAPED: return "escaped";
    case GNG_ERR_COVERAGE: return "coverage";
    case GNG_ERR_INAPPLICABLE: return "inapplicable";
    case GNG_ERR_BRACKET: return "bracket";
    case GNG_ERR_NON_ROTATING: return "non_rotating";
    case GNG_ERR_PRECONDITION: return "precondition";
    case GNG_ERR_IO: return "io";
    case GNG_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* gng_last_error(void) { return t_last_error.c_str(); }

void gng_string_free(char* s) { std::free(s); }

gng_status gng_set_threads(int n) {
  return guard([&] {
    if (n < 0) throw BadArgument{"thread count must be >= 0"};
    set_thread_count(n);
  });
}

// ---- models

gng_status gng_model_curie_weiss(double beta, double h, gng_model** out) {
  return guard([&] { need_out(out, "null output") = new gng_model{ModelSpec::curie_weiss(beta, h)}; });
}

gng_status gng_model_diffusion(const double* coeffs, size_t n, gng_model** out) {
  return guard([&] {
    if (coeffs == nullptr && n > 0) throw BadArgument{"null coefficient array"};
    need_out(out, "null output") =
        new gng_model{ModelSpec::diffusion(std::vector<double>(coeffs, coeffs + n))};
  });
}

gng_status gng_model_double_well(double b, gng_model** out) {
  return guard([&] { need_out(out, "null output") = new gng_model{ModelSpec::diffusion(double_well(b))}; });
}

void gng_model_free(gng_model* model) { delete model; }

gng_status gng_hamiltonian(const gng_model* model, double x, double p, double* out) {
  return guard([&] { need_out(out, "null output") = hamiltonian(need(model, "null model").spec, x, p); });
}

gng_status gng_lagrangian(const gng_model* model, double x, double v, double* value, double* p_star) {
  return guard([&] {
    const LagrangianValue l = lagrangian(need(model, "null model").spec, x, v);
    if (value) *value = l.value;
    if (p_star) *p_star = l.p_star;
  });
}

gng_status gng_stationary_points(const gng_model* model, double* out, size_t cap, size_t* count) {
  return guard([&] {
    const auto pts = stationary_points(need(model, "null model").spec);
    if (out == nullptr && cap > 0) throw BadArgument{"null output array"};
    for (size_t i = 0; i < pts.size() && i < cap; ++i) out[i] = pts[i];
    need_out(count, "null count") = pts.size();
  });
}

// ---- rates

gng_status gng_rate_cw_entropy(double alpha, double theta, gng_rate** out) {
  return guard([&] { need_out(out, "null output") = new gng_rate{RateFunctionSpec::cw_entropy(alpha, theta)}; });
}

gng_status gng_rate_polynomial(const double* coeffs, size_t n, gng_rate** out) {
  return guard([&] {
    if (coeffs == nullptr && n > 0) throw BadArgument{"null coefficient array"};
    need_out(out, "null output") =
        new gng_rate{RateFunctionSpec::polynomial(std::vector<double>(coeffs, coeffs + n))};
  });
}

gng_status gng_rate_double_well(double a, gng_rate** out) {
  return guard([&] { need_out(out, "null output") = new gng_rate{RateFunctionSpec::polynomial(double_well(a))}; });
}

gng_status gng_rate_tabulated(const double* xs, const double* values, const double* derivs, size_t n,
                              double slope_threshold, gng_rate** out) {
  return guard([&] {
    if (n > 0 && (xs == nullptr || values == nullptr || derivs == nullptr))
      throw BadArgument{"null table array"};
    need_out(out, "null output") = new gng_rate{RateFunctionSpec::tabulated(
        std::vector<double>(xs, xs + n), std::vector<double>(values, values + n),
        std::vector<double>(derivs, derivs + n), slope_threshold)};
  });
}

void gng_rate_free(gng_rate* rate) { delete rate; }

gng_status gng_rate_eval(const gng_rate* rate, double x, double* value, double* deriv,
                         double* second_deriv) {
  return guard([&] {
    const RateValue r = rate0(need(rate, "null rate").spec, x);
    if (value) *value = r.value;
    if (deriv) *deriv = r.deriv;
    if (second_deriv) *second_deriv = r.second_deriv;
  });
}

// ---- options

void gng_integrator_defaults(gng_integrator_options* out) {
  if (!out) return;
  const IntegratorConfig c;
  *out = {c.rel_tol, c.abs_tol, c.max_step, c.p_cap, c.boundary_margin};
}

void gng_graph_defaults(gng_graph_options* out) {
  if (!out) return;
  const SamplingOptions s;
  *out = {s.n, s.margin, s.p_window, 1};
}

void gng_profile_defaults(gng_profile_options* out) {
  if (!out) return;
  *out = {0.0, 0.0, 201, 8, FdOptions{}.cfl};
}

// ---- characteristics

gng_status gng_flow_integrate(const gng_model* model, double x, double p, double u0, double t_end,
                              const gng_integrator_options* opts, gng_trajectory** out) {
  return guard([&] {
    auto& slot = need_out(out, "null output");
    slot = new gng_trajectory{integrate(need(model, "null model").spec, {x, p}, u0, t_end, integrator(opts))};
  });
}

gng_status gng_trajectory_info(const gng_trajectory* tr, size_t* n_samples, int* escaped,
                               int* corner, double* escape_time, double* energy_drift) {
  return guard([&] {
    const FlowResult& r = need(tr, "null trajectory").result;
    if (n_samples) *n_samples = r.samples.size();
    if (escaped) *escaped = r.escaped ? 1 : 0;
    if (corner) *corner = r.escaped ? sign_of(r.corner) : 0;
    if (escape_time) *escape_time = r.escaped ? r.escape_time : kInf;
    if (energy_drift) *energy_drift = r.energy_drift;
  });
}

gng_status gng_trajectory_sample(const gng_trajectory* tr, size_t i, double* t, double* x, double* p,
                                 double* u, double* energy) {
  return guard([&] {
    const FlowResult& r = need(tr, "null trajectory").result;
    if (i >= r.samples.size()) throw BadArgument{"sample index out of range"};
    const FlowSample& s = r.samples[i];
    if (t) *t = s.t;
    if (x) *x = s.x;
    if (p) *p = s.p;
    if (u) *u = s.u;
    if (energy) *energy = s.energy;
  });
}

gng_status gng_trajectory_csv(const gng_trajectory* tr, char** out) {
  return guard([&] { put_string(out, flow_csv(need(tr, "null trajectory").result)); });
}

gng_status gng_trajectory_json(const gng_trajectory* tr, char** out) {
  return guard([&] {
    Json j = report_header("flow");
    j["flow"] = to_json(need(tr, "null trajectory").result);
    put_string(out, dump_json(j));
  });
}

void gng_trajectory_free(gng_trajectory* tr) { delete tr; }

gng_status gng_escape_time(const gng_model* model, double x, double p,
                           const gng_integrator_options* opts, double* out) {
  return guard([&] {
    need_out(out, "null output") = escape_time(need(model, "null model").spec, {x, p}, integrator(opts));
  });
}

// ---- pushed graph

gng_status gng_push(const gng_model* model, const gng_rate* rate, double t,
                    const gng_graph_options* g, const gng_integrator_options* opts,
                    gng_pushforward** out) {
  return guard([&] {
    auto& slot = need_out(out, "null output");
    PushForward pf = push(need(model, "null model").spec, need(rate, "null rate").spec, t, graph(g),
                          integrator(opts));
    OverhangReport rep = detect_overhangs(pf);
    slot = new gng_pushforward{std::move(pf), std::move(rep)};
  });
}

gng_status gng_pushforward_is_graph(const gng_pushforward* pf, int* out) {
  return guard([&] { need_out(out, "null output") = need(pf, "null push-forward").overhangs.is_graph ? 1 : 0; });
}

gng_status gng_pushforward_csv(const gng_pushforward* pf, char** out) {
  return guard([&] { put_string(out, pushforward_csv(need(pf, "null push-forward").pf)); });
}

gng_status gng_pushforward_json(const gng_pushforward* h, char** out) {
  return guard([&] {
    const gng_pushforward& p = need(h, "null push-forward");
    Json j = report_header("pushforward");
    j["t"] = p.pf.t;
    j["samples"] = p.pf.samples.size();
    j["branches"] = p.pf.branches.size();
    j["escaped_fraction"] = p.pf.escaped_fraction;
    j["warnings"] = p.pf.warnings;
    j["overhangs"] = to_json(p.overhangs);
    put_string(out, dump_json(j));
  });
}

gng_status gng_pushforward_svg(const gng_pushforward* pf, const char* title, char** out) {
  return guard([&] {
    put_string(out, svg_pushforward({need(pf, "null push-forward").pf}, title ? title : ""));
  });
}

void gng_pushforward_free(gng_pushforward* pf) { delete pf; }

// ---- profiles

gng_status gng_rate_profile(const gng_model* model, const gng_rate* rate, gng_rate_method method,
                            double t, const gng_profile_options* profile,
                            const gng_graph_options* g, const gng_integrator_options* opts,
                            gng_profile** out) {
  return guard([&] {
    auto& slot = need_out(out, "null output");
    const ModelSpec& m = need(model, "null model").spec;
    const RateFunctionSpec& r = need(rate, "null rate").spec;
    const gng_profile_options po = profile_options(profile);
    const Interval win = window(m, po);
    const std::vector<double> xs = uniform_grid(win.lo, win.hi, po.points);
    auto h = std::make_unique<gng_profile>();
    switch (method) {
      case GNG_METHOD_ENVELOPE:
        h->profile = envelope(push(m, r, t, graph(g), integrator(opts)), xs);
        h->certified = classify_differentiability(h->profile);
        break;
      case GNG_METHOD_HOPF_LAX_DP:
        h->profile = hopf_lax_dp(m, r, t, xs, po.dp_steps);
        break;
      case GNG_METHOD_FINITE_DIFFERENCE: {
        FdOptions fo;
        fo.cfl = po.cfl;
        h->profile = hj_fd_solve(m, r, t, xs, fo);
        break;
      }
      default:
        throw BadArgument{"unknown rate method"};
    }
    slot = h.release();
  });
}

gng_status gng_profile_size(const gng_profile* pr, size_t* out) {
  return guard([&] { need_out(out, "null output") = need(pr, "null profile").profile.xs.size(); });
}

gng_status gng_profile_point(const gng_profile* pr, size_t i, double* x, double* value) {
  return guard([&] {
    const RateProfile& p = need(pr, "null profile").profile;
    if (i >= p.xs.size()) throw BadArgument{"grid index out of range"};
    if (x) *x = p.xs[i];
    if (value) *value = p.values[i];
  });
}

gng_status gng_profile_nondiff_count(const gng_profile* pr, size_t* nondiff, size_t* certified) {
  return guard([&] {
    const gng_profile& p = need(pr, "null profile");
    if (nondiff) *nondiff = p.profile.nondiff_points.size();
    if (certified) *certified = p.certified.size();
  });
}

gng_status gng_profile_csv(const gng_profile* pr, char** out) {
  return guard([&] { put_string(out, profile_csv(need(pr, "null profile").profile)); });
}

gng_status gng_profile_json(const gng_profile* pr, char** out) {
  return guard([&] {
    const gng_profile& p = need(pr, "null profile");
    Json j = report_header("rate_profile");
    j["profile"] = profile_summary(p.profile, p.certified);
    put_string(out, dump_json(j));
  });
}

gng_status gng_profile_linf(const gng_profile* a, const gng_profile* b, double* out) {
  return guard([&] {
    need_out(out, "null output") = linf_distance(need(a, "null profile").profile, need(b, "null profile").profile);
  });
}

gng_status gng_profiles_svg(const gng_profile* const* profiles, size_t n, const char* title, char** out) {
  return guard([&] {
    if (profiles == nullptr && n > 0) throw BadArgument{"null profile array"};
    std::vector<RateProfile> ps;
    for (size_t i = 0; i < n; ++i) ps.push_back(need(profiles[i], "null profile").profile);
    put_string(out, svg_rate_profiles(ps, title ? title : ""));
  });
}

void gng_profile_free(gng_profile* pr) { delete pr; }

// ---- analysis

gng_status gng_linearization_threshold(const gng_model* model, const gng_rate* rate, double x0,
                                       double* out) {
  return guard([&] {
    need_out(out, "null output") = linearization_threshold(
        linearization_data(need(model, "null model").spec, need(rate, "null rate").spec, x0));
  });
}

gng_status gng_slope_zero_crossing(const gng_model* model, const gng_rate* rate, double x0,
                                   double t_lo, double t_hi, double dx,
                                   const gng_integrator_options* opts, double* out) {
  return guard([&] {
    need_out(out, "null output") = slope_zero_crossing(need(model, "null model").spec,
                                                       need(rate, "null rate").spec, x0, t_lo,
                                                       t_hi, dx, integrator(opts));
  });
}

gng_status gng_overhang_onset(const gng_model* model, const gng_rate* rate, double t_lo, double t_hi,
                              double tol, const gng_graph_options* g,
                              const gng_integrator_options* opts, double* out) {
  return guard([&] {
    need_out(out, "null output") = overhang_onset(need(model, "null model").spec,
                                                  need(rate, "null rate").spec, t_lo, t_hi,
                                                  integrator(opts), graph(g), tol);
  });
}

gng_status gng_heating_report_json(const gng_model* model, const gng_rate* rate,
                                   const gng_integrator_options* opts, char** out) {
  return guard([&] {
    Json j = report_header("thresholds");
    j["model"] = to_json(need(model, "null model").spec);
    j["rate0"] = to_json(need(rate, "null rate").spec);
    j["heating"] = to_json(heating_threshold_report(model->spec, rate->spec, integrator(opts)));
    put_string(out, dump_json(j));
  });
}

gng_status gng_order_certificate_json(const gng_model* model, gng_region_kind kind, double y,
                                      double q, size_t samples, int* holds, char** out) {
  return guard([&] {
    OrderRegion region;
    switch (kind) {
      case GNG_REGION_WHOLE: region.kind = RegionKind::Whole; break;
      case GNG_REGION_UPPER_RIGHT: region.kind = RegionKind::UpperRight; break;
      case GNG_REGION_LOWER_LEFT: region.kind = RegionKind::LowerLeft; break;
      default: throw BadArgument{"unknown region kind"};
    }
    region.y = y;
    region.q = q;
    const OrderCertificate cert =
        order_preservation_certificate(need(model, "null model").spec, region, samples);
    Json j = report_header("order_certificate");
    j["model"] = to_json(model->spec);
    j["certificate"] = to_json(region, cert);
    if (holds) *holds = cert.holds ? 1 : 0;
    put_string(out, dump_json(j));
  });
}

gng_status gng_rotating_loop(const gng_model* model, double m1, double m2, double e_frac,
                             gng_loop** out) {
  return guard([&] {
    auto& slot = need_out(out, "null output");
    slot = new gng_loop{rotating_loop(need(model, "null model").spec, m1, m2, e_frac)};
  });
}

gng_status gng_rotating_loop_auto(const gng_model* model, double e_frac, gng_loop** out) {
  return guard([&] {
    auto& slot = need_out(out, "null output");
    slot = new gng_loop{rotating_loop(need(model, "null model").spec, e_frac)};
  });
}

gng_status gng_loop_bounds(const gng_loop* loop, double* a, double* b, double* energy) {
  return guard([&] {
    const Loop& l = need(loop, "null loop").loop;
    if (a) *a = l.a;
    if (b) *b = l.b;
    if (energy) *energy = l.energy;
  });
}

gng_status gng_loop_size(const gng_loop* loop, size_t* out) {
  return guard([&] { need_out(out, "null output") = need(loop, "null loop").loop.upper.size(); });
}

gng_status gng_loop_point(const gng_loop* loop, int upper, size_t i, double* x, double* p) {
  return guard([&] {
    const Loop& l = need(loop, "null loop").loop;
    const auto& side = upper ? l.upper : l.lower;
    if (i >= side.size()) throw BadArgument{"loop index out of range"};
    if (x) *x = side[i].x;
    if (p) *p = side[i].p;
  });
}

gng_status gng_loop_period(const gng_model* model, gng_loop* loop, double x, double p,
                           const gng_integrator_options* opts, double* out) {
  return guard([&] {
    Loop& l = need_out(loop, "null loop").loop;
    const double period = loop_period(need(model, "null model").spec, l, {x, p}, integrator(opts));
    l.period = period;
    need_out(out, "null output") = period;
  });
}

gng_status gng_loop_json(const gng_loop* loop, char** out) {
  return guard([&] {
    Json j = report_header("loop");
    j["loop"] = to_json(need(loop, "null loop").loop);
    put_string(out, dump_json(j));
  });
}

gng_status gng_loop_csv(const gng_loop* loop, char** out) {
  return guard([&] { put_string(out, loop_csv(need(loop, "null loop").loop)); });
}

void gng_loop_free(gng_loop* loop) { delete loop; }

gng_status gng_recovery_constants(double alpha, double* z, double* kappa) {
  return guard([&] {
    const RecoveryConstants c = recovery_constants(alpha);
    if (z) *z = c.z;
    if (kappa) *kappa = c.kappa;
  });
}

gng_status gng_scan_json(const gng_model* model, const gng_rate* rate, const double* times,
                         size_t n_times, int recovery, const gng_graph_options* g,
                         const gng_profile_options* profile, const gng_integrator_options* opts,
                         char** out) {
  return guard([&] {
    const ModelSpec& m = need(model, "null model").spec;
    const RateFunctionSpec& r = need(rate, "null rate").spec;
    if (times == nullptr && n_times > 0) throw BadArgument{"null times array"};
    const std::vector<double> ts(times, times + n_times);
    const gng_profile_options po = profile_options(profile);
    ScanOptions so;
    so.graph = graph(g);
    so.grid_n = po.points;
    so.grid = window(m, po);
    const IntegratorConfig c = integrator(opts);
    Json j = report_header("timeline");
    j["model"] = to_json(m);
    j["rate0"] = to_json(r);
    j["timeline"] = to_json(recovery ? recovery_scan(m, r, ts, c, so) : scan_timeline(m, r, ts, c, so));
    put_string(out, dump_json(j));
  });
}

// ---- scenarios

gng_status gng_scenario_load(const char* path, gng_scenario** out) {
  return guard([&] {
    auto& slot = need_out(out, "null output");
    if (path == nullptr) throw BadArgument{"null path"};
    slot = new gng_scenario{load_scenario(path)};
  });
}

gng_status gng_scenario_parse(const char* text, const char* source_name, gng_scenario** out) {
  return guard([&] {
    auto& slot = need_out(out, "null output");
    if (text == nullptr) throw BadArgument{"null scenario text"};
    slot = new gng_scenario{parse_scenario(text, source_name ? source_name : "<string>")};
  });
}

const char* gng_scenario_name(const gng_scenario* sc) { return sc ? sc->config.name.c_str() : ""; }

gng_status gng_scenario_run(const gng_scenario* sc, const char* base_dir, char** report) {
  return guard([&] {
    const Json j = run_scenario(need(sc, "null scenario").config, base_dir ? base_dir : "");
    if (report) *report = to_c_string(dump_json(j));
  });
}

void gng_scenario_free(gng_scenario* sc) { delete sc; }

}  // extern "C"
