// Acceptance runner: evaluates the ten acceptance criteria and prints one
// PASS/FAIL line per criterion, followed by a summary.
//
//   gnglab_acceptance [--xfail N]...
//
// Exit status is 0 when every criterion passes, except that criteria named
// with --xfail are expected to fail: they are still evaluated and printed,
// but only an unexpected PASS of such a criterion counts against the run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gnglab/analysis.hpp"
#include "gnglab/parallel.hpp"
#include "gnglab/scenario.hpp"

using namespace gnglab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Detail {
 public:
  template <class T>
  Detail& operator()(const std::string& key, T value) {
    if (!os_.str().empty()) os_ << ", ";
    os_ << key << '=' << value;
    return *this;
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

PushForward refined_push(const ModelSpec& m, const RateFunctionSpec& s, double t) {
  return push_graph(m, s, sample_initial_graph(s, SamplingOptions{}), t, IntegratorConfig{}, RefineOptions{});
}

// Root of artanh(x) = beta x on (0, 1).
double magnetization(double beta) {
  double lo = 1e-9, hi = 1.0 - 1e-15;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::atanh(mid) - beta * mid < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Outcome equilibrium_invariance() {
  const auto t_start = std::chrono::steady_clock::now();
  const auto m = ModelSpec::curie_weiss(1.5, 0.0);
  const auto s = RateFunctionSpec::cw_entropy(1.5, 0.0);
  const auto xs = uniform_grid(-0.95, 0.95, 201);
  double p_err = 0.0, env_err = 0.0;
  for (double t : {0.5, 1.0, 2.0}) {
    const auto pf = refined_push(m, s, t);
    for (const auto& b : pf.branches)
      for (const auto& q : b.points) p_err = std::max(p_err, std::abs(q.p - rate0(s, q.x).deriv));
    const auto env = envelope(pf, xs);
    for (std::size_t i = 0; i < xs.size(); ++i)
      env_err = std::max(env_err, std::abs(env.values[i] - rate0(s, xs[i]).value));
  }
  const double secs = seconds_since(t_start);
  return {p_err <= 1e-6 && env_err <= 1e-5 && secs < 5.0,
          Detail()("max|p-I0'(x)|", g(p_err))("envelope Linf", g(env_err))("runtime_s", g(secs)).str()};
}

Outcome escape_quadrature() {
  const auto m = ModelSpec::curie_weiss(0.0, 0.0);
  double worst = 0.0;
  Detail d;
  for (double p0 : {0.5, 1.0, 1.2328}) {
    const double te = escape_time(m, {0.0, p0}, IntegratorConfig{});
    const double ref = -0.5 * std::log(std::tanh(p0));
    worst = std::max(worst, std::abs(te - ref));
    d("t(" + g(p0) + ")", g(te));
  }
  d("max err vs -1/2 ln tanh p0", g(worst));
  return {worst <= 1e-4, d.str()};
}

Outcome heating_onset() {
  const double cw_ref = 0.25 * std::log(2.0), dif_ref = 0.5 * std::log(3.0);
  const auto cw = ModelSpec::curie_weiss(0.0, 0.0);
  const auto cw_rate = RateFunctionSpec::cw_entropy(2.0, 0.0);
  const auto dif = ModelSpec::diffusion(double_well(1.0));
  const auto dif_rate = RateFunctionSpec::polynomial(double_well(3.0));
  IntegratorConfig cfg;

  const double onset = overhang_onset(cw, cw_rate, 0.05, 0.3, cfg);
  const double cw_cross = slope_zero_crossing(cw, cw_rate, 0.0, 0.05, 0.3, 1e-3, cfg);
  const double dif_cross = slope_zero_crossing(dif, dif_rate, 0.0, 0.1, 1.5, 1e-3, cfg);
  const auto rep_cw = heating_threshold_report(cw, cw_rate, cfg);
  const auto rep_dif = heating_threshold_report(dif, dif_rate, cfg);

  const bool onset_ok = std::abs(onset - cw_ref) <= 2e-3;
  const bool cross_ok = std::abs(cw_cross - cw_ref) <= 2e-3;
  const bool dif_ok = std::abs(dif_cross - dif_ref) <= 5e-3;
  const bool flags_ok = rep_cw.discrepancy_flag && rep_dif.discrepancy_flag;
  return {onset_ok && cross_ok && dif_ok && flags_ok,
          Detail()("overhang_onset", g(onset) + (onset_ok ? " ok" : " outside " + g(cw_ref) + "+-2e-3"))(
              "cw slope crossing", g(cw_cross) + (cross_ok ? " ok" : " off"))(
              "diffusion slope crossing", g(dif_cross) + (dif_ok ? " ok" : " off"))(
              "discrepancy flags", flags_ok ? "both set" : "missing")
              .str()};
}

Outcome high_temperature() {
  const auto m = ModelSpec::curie_weiss(1.5, 0.0);
  const auto s = RateFunctionSpec::cw_entropy(0.8, 0.0);
  const auto xs = uniform_grid(-0.95, 0.95, 201);
  bool ok = true;
  std::size_t certified = 0;
  for (double t : {0.5, 1.0, 2.0}) {
    const auto pf = refined_push(m, s, t);
    auto env = envelope(pf, xs);
    ok &= detect_overhangs(pf).is_graph;
    certified += classify_differentiability(env).size();
  }
  return {ok && certified == 0, Detail()("is_graph at 0.5/1/2", ok ? "true" : "false")("certified", certified).str()};
}

Outcome cooling() {
  const double mp = 0.8583;
  std::vector<double> ts;
  for (int k = 0; k <= 10; ++k) ts.push_back(0.5 * k);
  const auto tl = scan_timeline(ModelSpec::curie_weiss(1.5, 0.0), RateFunctionSpec::cw_entropy(1.2, 0.0), ts,
                                IntegratorConfig{});
  // Smallest scanned t2 from which every later scan time shows both kinks.
  std::optional<double> t2;
  std::string kinks;
  for (auto it = tl.entries.rbegin(); it != tl.entries.rend(); ++it) {
    bool left = false, right = false;
    for (const auto& q : it->certified) {
      left |= q.x > -mp && q.x < 0.0;
      right |= q.x > 0.0 && q.x < mp;
    }
    if (!(left && right && it->certified.size() >= 2 && it->error.empty())) break;
    t2 = it->t;
    kinks.clear();
    for (const auto& q : it->certified) kinks += (kinks.empty() ? "" : " ") + g(q.x);
  }
  const bool ok = t2 && *t2 <= 5.0;
  return {ok, Detail()("t2", t2 ? g(*t2) : "none")("certified x at t2", kinks.empty() ? "-" : kinks).str()};
}

Outcome recovery_window() {
  const auto t_start = std::chrono::steady_clock::now();
  std::vector<double> ts;
  for (int k = 0; k <= 150; ++k) ts.push_back(0.01 * k);
  const auto tl = recovery_scan(ModelSpec::curie_weiss(0.0, 0.0), RateFunctionSpec::cw_entropy(2.0, -0.7), ts,
                                IntegratorConfig{});
  const double secs = seconds_since(t_start);

  double ov_lo = kInf, ov_hi = -kInf, ce_lo = kInf, ce_hi = -kInf;
  bool late_clean = true, errors = false, inside = false;
  for (const auto& e : tl.entries) {
    errors |= !e.error.empty();
    if (!e.is_graph) {
      ov_lo = std::min(ov_lo, e.t);
      ov_hi = std::max(ov_hi, e.t);
    }
    if (!e.certified.empty()) {
      ce_lo = std::min(ce_lo, e.t);
      ce_hi = std::max(ce_hi, e.t);
      if (tl.t0 && tl.t1) inside |= e.t > *tl.t0 && e.t < *tl.t1;
    }
    if (std::abs(e.t - 1.2) < 1e-9 || std::abs(e.t - 1.5) < 1e-9) late_clean &= e.is_graph;
  }
  const bool have = tl.t0 && tl.t1 && tl.t2 && tl.t1_ref;
  bool ok = have && !errors && late_clean && secs < 60.0;
  if (have) {
    ok &= 0.0 < *tl.t0 && *tl.t0 < *tl.t2;
    ok &= ov_lo <= ov_hi;                                  // nonempty overhang window
    ok &= inside;
    ok &= *tl.t1 <= *tl.t1_ref + 0.05;
    ok &= ov_lo <= ce_lo && ce_hi <= ov_hi;               // certified within overhang window
    ok &= ov_lo > 0.0 && ov_hi < 1.2;
  }
  Detail d;
  d("t0", tl.t0 ? g(*tl.t0) : "none")("t1", tl.t1 ? g(*tl.t1) : "none")("t2", tl.t2 ? g(*tl.t2) : "none");
  d("t1_ref", tl.t1_ref ? g(*tl.t1_ref) : "none");
  d("overhang window", "[" + g(ov_lo) + ", " + g(ov_hi) + "]")("certified window", "[" + g(ce_lo) + ", " + g(ce_hi) + "]");
  d("runtime_s", g(secs));
  return {ok, d.str()};
}

Outcome rotating_loop_period() {
  const auto m = ModelSpec::curie_weiss(1.5, 0.0);
  const auto loop = rotating_loop(m, 0.0, magnetization(1.5), 0.5);
  IntegratorConfig cfg;
  const std::size_t n = loop.upper.size();
  const std::vector<PhasePoint> starts = {loop.upper[n / 2], loop.upper[n / 5], loop.lower[n / 2],
                                          loop.lower[4 * n / 5]};
  double lo = kInf, hi = -kInf, drift = 0.0;
  for (const auto& q : starts) {
    const double T = loop_period(m, loop, q, cfg);
    lo = std::min(lo, T);
    hi = std::max(hi, T);
    const auto r = integrate(m, q, 0.0, T, cfg);
    for (const auto& s : r.samples) drift = std::max(drift, std::abs(hamiltonian(m, s.x, s.p) - loop.energy));
  }
  const bool ok = std::isfinite(hi) && hi - lo <= 1e-3 && drift <= 1e-7;
  return {ok, Detail()("a", g(loop.a))("b", g(loop.b))("E", g(loop.energy))("period", g(lo))("spread", g(hi - lo))(
                  "max|H-E|", g(drift))
                  .str()};
}

Outcome triple_oracle() {
  const auto m = ModelSpec::curie_weiss(0.0, 0.0);
  const auto s = RateFunctionSpec::cw_entropy(2.0, 0.0);
  const double t = 0.35;
  const auto xs = uniform_grid(-0.95, 0.95, 201);
  const auto env = envelope(refined_push(m, s, t), xs);
  const auto dp = hopf_lax_dp(m, s, t, xs, 8);
  const auto fine = hj_fd_solve(m, s, t, uniform_grid(-0.95, 0.95, 401));
  RateProfile fd = env;  // FD restricted to the shared 201 nodes
  for (std::size_t i = 0; i < xs.size(); ++i) fd.values[i] = fine.values[2 * i];
  const double ed = linf_distance(env, dp), ef = linf_distance(env, fd), df = linf_distance(dp, fd);

  // Convex data: the envelope-FD gap must at least halve with each halving of dx.
  const auto cs = RateFunctionSpec::cw_entropy(0.8, 0.0);
  const auto cpf = refined_push(m, cs, t);
  std::vector<double> gaps;
  for (std::size_t n : {101, 201, 401}) {
    const auto grid = uniform_grid(-0.95, 0.95, n);
    gaps.push_back(linf_distance(envelope(cpf, grid), hj_fd_solve(m, cs, t, grid)));
  }
  const bool halves = gaps[1] <= 0.5 * gaps[0] && gaps[2] <= 0.5 * gaps[1];
  const bool ok = ed <= 5e-2 && ef <= 5e-2 && df <= 5e-2 && halves;
  return {ok, Detail()("env-dp", g(ed))("env-fd", g(ef))("dp-fd", g(df))(
                  "convex gaps n=101/201/401", g(gaps[0]) + "/" + g(gaps[1]) + "/" + g(gaps[2]))
                  .str()};
}

Outcome order_preservation() {
  const auto m = ModelSpec::curie_weiss(0.0, 0.0);
  IntegratorConfig cfg;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> ux(-0.9, 0.9), up(-1.5, 1.5), gap(1e-4, 0.4);
  int pairs = 0, violations = 0, draws = 0;
  while (pairs < 50 && draws < 1000) {
    ++draws;
    const PhasePoint a{ux(rng), up(rng)};
    const PhasePoint b{a.x + gap(rng), a.p + gap(rng)};
    if (!(b.x < 1.0 - 1e-6)) continue;
    const auto ra = integrate(m, a, 0.0, 0.05, cfg);
    const auto rb = integrate(m, b, 0.0, 0.05, cfg);
    if (ra.escaped || rb.escaped) continue;
    ++pairs;
    if (!(ra.last().x < rb.last().x && ra.last().p < rb.last().p)) ++violations;
  }
  const auto cert = order_preservation_certificate(m, {RegionKind::Whole, 0.0, 0.0}, 64);
  return {pairs == 50 && violations == 0 && cert.holds,
          Detail()("pairs", pairs)("violations", violations)("whole-space certificate",
                                                             cert.holds ? cert.criterion : "fails")
              .str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome invariant_suites(const std::string& scenario_dir) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ux(-0.9, 0.9), up(-2.0, 2.0);
  const std::vector<ModelSpec> models = {ModelSpec::curie_weiss(0.0, 0.0), ModelSpec::curie_weiss(1.5, 0.0),
                                         ModelSpec::curie_weiss(0.7, 0.3), ModelSpec::diffusion(double_well(1.0))};
  double deriv_err = 0.0, legendre_err = 0.0, energy_err = 0.0;
  const double e = 1e-5;
  for (const auto& m : models) {
    auto H = [&](double x, double p) { return hamiltonian(m, x, p); };
    auto D = [&](double x, double p) { return derivatives(m, x, p); };
    for (int i = 0; i < 100; ++i) {
      const double x = ux(rng), p = up(rng);
      const auto d = D(x, p);
      const double fd[5] = {(H(x + e, p) - H(x - e, p)) / (2 * e), (H(x, p + e) - H(x, p - e)) / (2 * e),
                            (D(x + e, p).dHdx - D(x - e, p).dHdx) / (2 * e),
                            (D(x + e, p).dHdp - D(x - e, p).dHdp) / (2 * e),
                            (D(x, p + e).dHdp - D(x, p - e).dHdp) / (2 * e)};
      const double an[5] = {d.dHdx, d.dHdp, d.d2Hdx2, d.d2Hdxdp, d.d2Hdp2};
      for (int k = 0; k < 5; ++k)
        deriv_err = std::max(deriv_err, std::abs(an[k] - fd[k]) / std::max(1.0, std::abs(an[k])));
      const auto l = lagrangian(m, x, d.dHdp);
      legendre_err = std::max({legendre_err, std::abs(l.p_star - p), std::abs(p * d.dHdp - l.value - H(x, p))});
    }
  }
  // Moderate momenta, so that most starts stay alive up to t = 1.
  IntegratorConfig cfg;
  std::uniform_real_distribution<double> up_alive(-0.7, 0.7);
  int kept = 0;
  for (int i = 0; i < 4000 && kept < 100; ++i) {
    const auto& m = models[static_cast<std::size_t>(i) % models.size()];
    const auto r = integrate(m, {ux(rng), up_alive(rng)}, 0.0, 1.0, cfg);
    if (r.escaped) continue;
    ++kept;
    energy_err = std::max(energy_err, r.energy_drift);
  }

  // Determinism: the same scenario twice, with different worker counts.
  const fs::path base = fs::temp_directory_path() / "gnglab_acceptance_determinism";
  fs::remove_all(base);
  const auto sc = load_scenario(scenario_dir + "/heating.toml");
  set_thread_count(1);
  run_scenario(sc, (base / "a").string());
  set_thread_count(4);
  run_scenario(sc, (base / "b").string());
  set_thread_count(0);
  std::size_t files = 0, differing = 0;
  for (const auto& f : fs::recursive_directory_iterator(base / "a")) {
    if (!f.is_regular_file()) continue;
    ++files;
    if (slurp(f.path()) != slurp(base / "b" / fs::relative(f.path(), base / "a"))) ++differing;
  }
  fs::remove_all(base);

  const bool ok = deriv_err <= 1e-6 && legendre_err <= 1e-8 && energy_err <= 1e-8 && kept == 100 && files > 0 &&
                  differing == 0;
  return {ok, Detail()("derivative rel err", g(deriv_err))("Legendre err", g(legendre_err))("energy drift",
                                                                                            g(energy_err))(
                  "alive starts", std::to_string(kept))(
                  "determinism", std::to_string(files - differing) + "/" + std::to_string(files) + " files identical")
                  .str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> xfail;
  std::string scenario_dir = GNGLAB_SCENARIO_DIR;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--xfail") == 0 && i + 1 < argc) {
      xfail.insert(std::atoi(argv[++i]));
    } else if (std::strcmp(argv[i], "--scenarios") == 0 && i + 1 < argc) {
      scenario_dir = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--xfail N]... [--scenarios DIR]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"equilibrium invariance", equilibrium_invariance},
      {"escape-time quadrature", escape_quadrature},
      {"heating onset", heating_onset},
      {"high-temperature preservation", high_temperature},
      {"cooling", cooling},
      {"recovery window", recovery_window},
      {"rotating loop", rotating_loop_period},
      {"triple-oracle agreement", triple_oracle},
      {"order preservation", order_preservation},
      {"invariant suites", [&] { return invariant_suites(scenario_dir); }},
  };

  int passed = 0, unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const bool expected_fail = xfail.count(id) > 0;
    if (o.pass) ++passed;
    if (o.pass == expected_fail) ++unexpected;
    std::printf("%s [%d] %s: %s%s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str(),
                expected_fail ? (o.pass ? " (expected to fail; now passes)" : " (known failure)") : "");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", passed, criteria.size());
  return unexpected == 0 ? 0 : 1;
}
