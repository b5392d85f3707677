// gnglab command-line front end. Talks to the library only through the C API.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gnglab/gnglab.h"

namespace {

using Json = nlohmann::ordered_json;

// Exit codes: 0 success, 1 runtime error, 2 usage or configuration error.
struct Failure {
  gng_status status;
  std::string message;
};

int exit_code(gng_status s) {
  return s == GNG_ERR_CONFIG || s == GNG_ERR_INVALID_ARGUMENT ? 2 : 1;
}

void check(gng_status s, const char* op) {
  if (s != GNG_OK)
    throw Failure{s, std::string(op) + ": " + gng_status_name(s) + ": " + gng_last_error()};
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Model = std::unique_ptr<gng_model, Deleter<gng_model, gng_model_free>>;
using Rate = std::unique_ptr<gng_rate, Deleter<gng_rate, gng_rate_free>>;
using Trajectory = std::unique_ptr<gng_trajectory, Deleter<gng_trajectory, gng_trajectory_free>>;
using Push = std::unique_ptr<gng_pushforward, Deleter<gng_pushforward, gng_pushforward_free>>;
using Profile = std::unique_ptr<gng_profile, Deleter<gng_profile, gng_profile_free>>;
using LoopH = std::unique_ptr<gng_loop, Deleter<gng_loop, gng_loop_free>>;
using Scenario = std::unique_ptr<gng_scenario, Deleter<gng_scenario, gng_scenario_free>>;

// Takes ownership of a library string.
std::string take(char* s) {
  std::string out = s ? s : "";
  gng_string_free(s);
  return out;
}

void write_to(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    return;
  }
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{GNG_ERR_IO, "cannot open '" + path + "' for writing"};
  out << content;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// ---- shared flag groups

struct ModelFlags {
  std::string kind = "cw";
  double beta = 0.0;
  double h = 0.0;
  std::vector<double> potential;
  double double_well = NAN;

  void add(CLI::App* app) {
    const std::string g = "Model (Curie-Weiss spin flips or gradient diffusion)";
    app->add_option("--model", kind, "cw | diffusion")
        ->check(CLI::IsMember({"cw", "curie_weiss", "diffusion"}))
        ->group(g);
    app->add_option("--beta", beta, "Curie-Weiss inverse temperature")->group(g);
    app->add_option("--field", h, "Curie-Weiss external field h")->group(g);
    app->add_option("--potential", potential, "diffusion potential W, coefficients low-to-high")
        ->delimiter(',')
        ->group(g);
    app->add_option("--double-well", double_well, "diffusion potential x^4/4 - b x^2/2")->group(g);
  }

  Model build() const {
    gng_model* m = nullptr;
    if (kind == "cw" || kind == "curie_weiss") {
      check(gng_model_curie_weiss(beta, h, &m), "model");
    } else if (!std::isnan(double_well)) {
      check(gng_model_double_well(double_well, &m), "model");
    } else {
      if (potential.empty())
        throw Failure{GNG_ERR_INVALID_ARGUMENT, "diffusion needs --potential or --double-well"};
      check(gng_model_diffusion(potential.data(), potential.size(), &m), "model");
    }
    return Model(m);
  }
};

struct RateFlags {
  std::string kind;
  double alpha = 0.0;
  double theta = 0.0;
  std::vector<double> coeffs;
  double double_well = NAN;

  void add(CLI::App* app) {
    const std::string g = "Initial rate function";
    app->add_option("--rate", kind, "cw_entropy | polynomial (default follows --model)")
        ->check(CLI::IsMember({"cw_entropy", "polynomial"}))
        ->group(g);
    app->add_option("--alpha", alpha, "entropy profile quadratic coefficient")->group(g);
    app->add_option("--theta", theta, "entropy profile linear tilt")->group(g);
    app->add_option("--coeffs", coeffs, "polynomial rate, coefficients low-to-high")
        ->delimiter(',')
        ->group(g);
    app->add_option("--rate-double-well", double_well, "polynomial rate x^4/4 - a x^2/2")->group(g);
  }

  Rate build(const ModelFlags& model) const {
    std::string k = kind;
    if (k.empty()) k = model.kind == "diffusion" ? "polynomial" : "cw_entropy";
    gng_rate* r = nullptr;
    if (k == "cw_entropy") {
      check(gng_rate_cw_entropy(alpha, theta, &r), "rate0");
    } else if (!std::isnan(double_well)) {
      check(gng_rate_double_well(double_well, &r), "rate0");
    } else {
      if (coeffs.empty())
        throw Failure{GNG_ERR_INVALID_ARGUMENT, "polynomial rate needs --coeffs or --rate-double-well"};
      check(gng_rate_polynomial(coeffs.data(), coeffs.size(), &r), "rate0");
    }
    return Rate(r);
  }
};

struct IntegratorFlags {
  gng_integrator_options opts{};
  IntegratorFlags() { gng_integrator_defaults(&opts); }

  void add(CLI::App* app) {
    const std::string g = "Integrator (adaptive Dormand-Prince 5(4))";
    app->add_option("--rel-tol", opts.rel_tol, "relative tolerance")->capture_default_str()->group(g);
    app->add_option("--abs-tol", opts.abs_tol, "absolute tolerance")->capture_default_str()->group(g);
    app->add_option("--max-step", opts.max_step, "largest time step")->capture_default_str()->group(g);
    app->add_option("--p-cap", opts.p_cap, "momentum beyond which a path counts as escaped")
        ->capture_default_str()
        ->group(g);
  }
};

struct GraphFlags {
  gng_graph_options opts{};
  bool no_refine = false;
  GraphFlags() { gng_graph_defaults(&opts); }

  void add(CLI::App* app) {
    const std::string g = "Initial graph sampling";
    app->add_option("--samples", opts.samples, "initial samples of the gradient graph")
        ->capture_default_str()
        ->group(g);
    app->add_option("--margin", opts.margin, "distance kept from the domain ends")
        ->capture_default_str()
        ->group(g);
    app->add_option("--p-window", opts.p_window, "polynomial data: sample where |I0'| <= this")
        ->capture_default_str()
        ->group(g);
    app->add_flag("--no-refine", no_refine, "disable adaptive refinement of the pushed graph")->group(g);
  }

  const gng_graph_options* get() {
    opts.refine = no_refine ? 0 : 1;
    return &opts;
  }
};

struct ProfileFlags {
  gng_profile_options opts{};
  ProfileFlags() { gng_profile_defaults(&opts); }

  void add(CLI::App* app) {
    const std::string g = "Reconstruction grid";
    app->add_option("--lo", opts.lo, "grid start (default: model window)")->group(g);
    app->add_option("--hi", opts.hi, "grid end")->group(g);
    app->add_option("--points", opts.points, "grid points")->capture_default_str()->group(g);
    app->add_option("--dp-steps", opts.dp_steps, "Hopf-Lax time steps")->capture_default_str()->group(g);
    app->add_option("--cfl", opts.cfl, "Lax-Friedrichs CFL number")->capture_default_str()->group(g);
  }
};

struct TimeFlags {
  std::vector<double> times;
  double start = 0.0, stop = NAN, step = NAN;

  void add(CLI::App* app) {
    const std::string g = "Scan times";
    app->add_option("--times", times, "explicit times")->delimiter(',')->group(g);
    app->add_option("--t-start", start, "first time")->group(g);
    app->add_option("--t-stop", stop, "last time")->group(g);
    app->add_option("--t-step", step, "time step")->group(g);
  }

  std::vector<double> get() const {
    if (!times.empty()) return times;
    if (std::isnan(stop) || std::isnan(step) || !(step > 0.0))
      throw Failure{GNG_ERR_INVALID_ARGUMENT, "give --times or --t-stop with a positive --t-step"};
    std::vector<double> out;
    const long n = std::lround(std::floor((stop - start) / step + 1e-9));
    for (long k = 0; k <= n; ++k) out.push_back(start + k * step);
    return out;
  }
};

// ---- subcommands

struct FlowCmd {
  ModelFlags model;
  IntegratorFlags integ;
  double x = 0.0, p = 0.0, t = 1.0, u0 = 0.0;
  std::string csv, json = "-";

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("flow", "Integrate one characteristic and report its escape");
    model.add(app);
    integ.add(app);
    app->add_option("--x", x, "start position")->required();
    app->add_option("--p", p, "start momentum")->required();
    app->add_option("--t", t, "end time")->capture_default_str();
    app->add_option("--u0", u0, "start action")->capture_default_str();
    app->add_option("--csv", csv, "trajectory CSV (t,x,p,u,H); '-' for stdout");
    app->add_option("--json", json, "escape report; '-' for stdout")->capture_default_str();
    app->callback([this] { run(); });
  }

  void run() {
    Model m = model.build();
    gng_trajectory* tr = nullptr;
    check(gng_flow_integrate(m.get(), x, p, u0, t, &integ.opts, &tr), "flow");
    Trajectory owned(tr);
    char* s = nullptr;
    if (!csv.empty()) {
      check(gng_trajectory_csv(tr, &s), "flow csv");
      write_to(csv, take(s));
    }
    check(gng_trajectory_json(tr, &s), "flow json");
    Json j = Json::parse(take(s));
    int escaped = 0;
    check(gng_trajectory_info(tr, nullptr, &escaped, nullptr, nullptr, nullptr), "flow");
    if (!escaped) {
      // The run ended before the escape; report the escape time anyway.
      double te = 0.0;
      check(gng_escape_time(m.get(), x, p, &integ.opts, &te), "escape_time");
      j["flow"]["escape_time_beyond_t"] = std::isfinite(te) ? Json(te) : Json(nullptr);
    }
    write_to(json, j.dump(2) + "\n");
  }
};

struct PushCmd {
  ModelFlags model;
  RateFlags rate;
  IntegratorFlags integ;
  GraphFlags graph;
  double t = 0.0;
  std::string csv, json = "-", svg;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("push", "Push the initial gradient graph forward and find overhangs");
    model.add(app);
    rate.add(app);
    integ.add(app);
    graph.add(app);
    app->add_option("--t", t, "time")->required();
    app->add_option("--csv", csv, "samples CSV (t,x0,p0,x,p,u,branch_id,status); '-' for stdout");
    app->add_option("--json", json, "overhang report; '-' for stdout")->capture_default_str();
    app->add_option("--svg", svg, "plot of the pushed graph");
    app->callback([this] { run(); });
  }

  void run() {
    Model m = model.build();
    Rate r = rate.build(model);
    gng_pushforward* pf = nullptr;
    check(gng_push(m.get(), r.get(), t, graph.get(), &integ.opts, &pf), "push");
    Push owned(pf);
    char* s = nullptr;
    if (!csv.empty()) {
      check(gng_pushforward_csv(pf, &s), "push csv");
      write_to(csv, take(s));
    }
    if (!svg.empty()) {
      check(gng_pushforward_svg(pf, ("pushed graph at t = " + fmt(t)).c_str(), &s), "push svg");
      write_to(svg, take(s));
    }
    check(gng_pushforward_json(pf, &s), "push json");
    write_to(json, take(s));
  }
};

struct RateCmd {
  ModelFlags model;
  RateFlags rate;
  IntegratorFlags integ;
  GraphFlags graph;
  ProfileFlags profile;
  std::string method = "envelope";
  double t = 0.0;
  std::string out_dir, json = "-", svg;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("rate", "Reconstruct the evolved rate function on a grid");
    model.add(app);
    rate.add(app);
    integ.add(app);
    graph.add(app);
    profile.add(app);
    app->add_option("--method", method, "envelope | dp | fd | all")
        ->check(CLI::IsMember({"envelope", "dp", "fd", "all"}))
        ->capture_default_str();
    app->add_option("--t", t, "time")->required();
    app->add_option("--out-dir", out_dir, "directory for rate_<method>.csv files");
    app->add_option("--json", json, "summary and pairwise agreement; '-' for stdout")
        ->capture_default_str();
    app->add_option("--svg", svg, "overlay plot of the profiles");
    app->callback([this] { run(); });
  }

  void run() {
    Model m = model.build();
    Rate r = rate.build(model);
    struct Entry {
      const char* name;
      gng_rate_method method;
    };
    std::vector<Entry> wanted;
    if (method == "envelope" || method == "all") wanted.push_back({"envelope", GNG_METHOD_ENVELOPE});
    if (method == "dp" || method == "all") wanted.push_back({"hopf_lax_dp", GNG_METHOD_HOPF_LAX_DP});
    if (method == "fd" || method == "all")
      wanted.push_back({"finite_difference", GNG_METHOD_FINITE_DIFFERENCE});

    std::vector<Profile> profiles;
    Json j;
    j["schema_version"] = 1;
    j["kind"] = "rate";
    j["t"] = t;
    Json summaries = Json::object();
    for (const Entry& e : wanted) {
      gng_profile* pr = nullptr;
      check(gng_rate_profile(m.get(), r.get(), e.method, t, &profile.opts, graph.get(), &integ.opts, &pr),
            e.name);
      profiles.emplace_back(pr);
      char* s = nullptr;
      check(gng_profile_json(pr, &s), "profile json");
      summaries[e.name] = Json::parse(take(s))["profile"];
      if (!out_dir.empty()) {
        check(gng_profile_csv(pr, &s), "profile csv");
        write_to(out_dir + "/rate_" + e.name + ".csv", take(s));
      }
    }
    j["profiles"] = summaries;
    Json agreement = Json::object();
    for (std::size_t a = 0; a < wanted.size(); ++a)
      for (std::size_t b = a + 1; b < wanted.size(); ++b) {
        double d = 0.0;
        check(gng_profile_linf(profiles[a].get(), profiles[b].get(), &d), "linf");
        agreement[std::string(wanted[a].name) + "_vs_" + wanted[b].name] = d;
      }
    j["linf"] = agreement;
    if (!svg.empty()) {
      std::vector<const gng_profile*> ps;
      for (auto& p : profiles) ps.push_back(p.get());
      char* s = nullptr;
      check(gng_profiles_svg(ps.data(), ps.size(), ("rate function at t = " + fmt(t)).c_str(), &s),
            "svg");
      write_to(svg, take(s));
    }
    write_to(json, j.dump(2) + "\n");
  }
};

struct ThresholdsCmd {
  ModelFlags model;
  RateFlags rate;
  IntegratorFlags integ;
  double x0 = 0.0;
  std::string certificate;
  std::vector<double> corner;
  std::size_t cert_samples = 64;
  std::string json = "-";

  void add(CLI::App& root) {
    auto* app = root.add_subcommand(
        "thresholds", "Overhang-time thresholds from the linearized flow, and order certificates");
    model.add(app);
    rate.add(app);
    integ.add(app);
    app->add_option("--x0", x0, "stationary point to linearize at (non-heating data)")
        ->capture_default_str();
    app->add_option("--certificate", certificate, "also certify order preservation on: whole | upper_right | lower_left")
        ->check(CLI::IsMember({"whole", "upper_right", "lower_left"}));
    app->add_option("--corner", corner, "quadrant corner y,q")->delimiter(',')->expected(2);
    app->add_option("--certificate-samples", cert_samples, "lattice size per axis")->capture_default_str();
    app->add_option("--json", json, "report; '-' for stdout")->capture_default_str();
    app->callback([this] { run(); });
  }

  void run() {
    Model m = model.build();
    Rate r = rate.build(model);
    char* s = nullptr;
    Json j;
    const gng_status st = gng_heating_report_json(m.get(), r.get(), &integ.opts, &s);
    if (st == GNG_OK) {
      j = Json::parse(take(s));
    } else if (st == GNG_ERR_INAPPLICABLE) {
      // Not the heating regime: the general linearization threshold at x0.
      j["schema_version"] = 1;
      j["kind"] = "thresholds";
      j["heating"] = {{"applicable", false}, {"reason", gng_last_error()}};
      double t0 = 0.0;
      const gng_status lt = gng_linearization_threshold(m.get(), r.get(), x0, &t0);
      if (lt == GNG_OK)
        j["linearization"] = {{"x0", x0}, {"t0", t0}};
      else if (lt == GNG_ERR_INAPPLICABLE || lt == GNG_ERR_PRECONDITION)
        j["linearization"] = {{"x0", x0}, {"t0", nullptr}, {"reason", gng_last_error()}};
      else
        check(lt, "linearization_threshold");
    } else {
      check(st, "heating_threshold_report");
    }
    if (!certificate.empty()) {
      gng_region_kind kind = certificate == "whole"         ? GNG_REGION_WHOLE
                             : certificate == "upper_right" ? GNG_REGION_UPPER_RIGHT
                                                            : GNG_REGION_LOWER_LEFT;
      if (kind != GNG_REGION_WHOLE && corner.size() != 2)
        throw Failure{GNG_ERR_INVALID_ARGUMENT, "quadrant certificates need --corner y,q"};
      const double y = corner.size() == 2 ? corner[0] : 0.0;
      const double q = corner.size() == 2 ? corner[1] : 0.0;
      check(gng_order_certificate_json(m.get(), kind, y, q, cert_samples, nullptr, &s), "certificate");
      j["certificate"] = Json::parse(take(s))["certificate"];
    }
    write_to(json, j.dump(2) + "\n");
  }
};

struct LoopCmd {
  ModelFlags model;
  IntegratorFlags integ;
  std::vector<double> between;
  double e_frac = 0.5;
  std::string csv, json = "-";

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("loop", "Extract a rotating loop between stationary points and its period");
    model.add(app);
    integ.add(app);
    app->add_option("--between", between, "stationary points m1,m2 (default: first qualifying pair)")
        ->delimiter(',')
        ->expected(2);
    app->add_option("--e-frac", e_frac, "loop energy as a fraction of the deepest min_p H")
        ->capture_default_str();
    app->add_option("--csv", csv, "loop polylines (side,x,p); '-' for stdout");
    app->add_option("--json", json, "loop report; '-' for stdout")->capture_default_str();
    app->callback([this] { run(); });
  }

  void run() {
    Model m = model.build();
    gng_loop* l = nullptr;
    if (between.size() == 2)
      check(gng_rotating_loop(m.get(), between[0], between[1], e_frac, &l), "rotating_loop");
    else
      check(gng_rotating_loop_auto(m.get(), e_frac, &l), "rotating_loop");
    LoopH owned(l);
    std::size_t n = 0;
    check(gng_loop_size(l, &n), "loop");
    double x = 0.0, p = 0.0, period = 0.0;
    check(gng_loop_point(l, 1, n / 2, &x, &p), "loop");
    check(gng_loop_period(m.get(), l, x, p, &integ.opts, &period), "loop_period");
    char* s = nullptr;
    if (!csv.empty()) {
      check(gng_loop_csv(l, &s), "loop csv");
      write_to(csv, take(s));
    }
    check(gng_loop_json(l, &s), "loop json");
    write_to(json, take(s));
  }
};

struct ScanCmd {
  ModelFlags model;
  RateFlags rate;
  IntegratorFlags integ;
  GraphFlags graph;
  ProfileFlags profile;
  TimeFlags times;
  bool recovery = false;
  std::string json = "-";

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("scan", "Track overhangs and certified kinks over a range of times");
    model.add(app);
    rate.add(app);
    integ.add(app);
    graph.add(app);
    profile.add(app);
    times.add(app);
    app->add_flag("--recovery", recovery, "add the loss-and-recovery constants and reference time");
    app->add_option("--json", json, "timeline; '-' for stdout")->capture_default_str();
    app->callback([this] { run(); });
  }

  void run() {
    Model m = model.build();
    Rate r = rate.build(model);
    const std::vector<double> ts = times.get();
    char* s = nullptr;
    check(gng_scan_json(m.get(), r.get(), ts.data(), ts.size(), recovery ? 1 : 0, graph.get(),
                        &profile.opts, &integ.opts, &s),
          recovery ? "recovery_scan" : "scan_timeline");
    write_to(json, take(s));
  }
};

struct ScenarioCmd {
  std::vector<std::string> files;
  std::string base_dir;
  bool print = false;

  void add(CLI::App& root) {
    auto* app = root.add_subcommand("scenario", "Run scenario files and write their artifacts");
    app->add_option("files", files, "scenario files")->required()->check(CLI::ExistingFile);
    app->add_option("--base-dir", base_dir, "resolve relative output paths against this directory");
    app->add_flag("--print", print, "print each JSON report to stdout");
    app->callback([this] { run(); });
  }

  void run() {
    for (const std::string& f : files) {
      gng_scenario* sc = nullptr;
      check(gng_scenario_load(f.c_str(), &sc), "scenario");
      Scenario owned(sc);
      char* s = nullptr;
      check(gng_scenario_run(sc, base_dir.empty() ? nullptr : base_dir.c_str(), &s), "scenario");
      const std::string report = take(s);
      if (print) {
        std::cout << report;
      } else {
        const Json j = Json::parse(report);
        const Json& tl = j["timeline"];
        std::cerr << gng_scenario_name(sc) << ": " << tl["entries"].size() << " times, t0="
                  << tl["t0"].dump() << " t1=" << tl["t1"].dump() << " t2=" << tl["t2"].dump()
                  << '\n';
      }
    }
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gnglab: Hamiltonian flow of large-deviation rate functions"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0: GNGLAB_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber)
      ->trigger_on_parse()
      ->each([](const std::string& v) { gng_set_threads(std::stoi(v)); });
  app.set_version_flag("--version", gng_version());

  FlowCmd flow;
  PushCmd push;
  RateCmd rate;
  ThresholdsCmd thresholds;
  LoopCmd loop;
  ScanCmd scan;
  ScenarioCmd scenario;
  flow.add(app);
  push.add(app);
  rate.add(app);
  thresholds.add(app);
  loop.add(app);
  scan.add(app);
  scenario.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const Failure& f) {
    std::cerr << "gnglab: " << f.message << '\n';
    return exit_code(f.status);
  } catch (const std::exception& e) {
    std::cerr << "gnglab: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
