// Exercises the shared library through the public C header only.
#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <string>

#include "gnglab/gnglab.h"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  gng_string_free(s);
  return out;
}

}  // namespace

TEST(CApi, VersionAndStatusNames) {
  EXPECT_STRNE(gng_version(), "");
  EXPECT_STREQ(gng_status_name(GNG_OK), "ok");
  EXPECT_STRNE(gng_status_name(GNG_ERR_DOMAIN), gng_status_name(GNG_ERR_CONFIG));
}

TEST(CApi, NullArgumentsRejected) {
  EXPECT_EQ(gng_model_curie_weiss(0.0, 0.0, nullptr), GNG_ERR_INVALID_ARGUMENT);
  double h = 0;
  EXPECT_EQ(gng_hamiltonian(nullptr, 0.0, 0.0, &h), GNG_ERR_INVALID_ARGUMENT);
  EXPECT_STRNE(gng_last_error(), "");
  gng_model_free(nullptr);
  gng_rate_free(nullptr);
}

TEST(CApi, ModelEvaluation) {
  gng_model* m = nullptr;
  ASSERT_EQ(gng_model_curie_weiss(0.0, 0.0, &m), GNG_OK);
  double h = 0;
  ASSERT_EQ(gng_hamiltonian(m, 0.0, 1.0, &h), GNG_OK);
  EXPECT_NEAR(h, std::cosh(2.0) - 1.0, 1e-12);
  EXPECT_EQ(gng_hamiltonian(m, 2.0, 0.0, &h), GNG_ERR_DOMAIN);
  EXPECT_NE(std::string(gng_last_error()).find("2"), std::string::npos);
  double l = -1, ps = -1;
  ASSERT_EQ(gng_lagrangian(m, 0.3, -0.6, &l, &ps), GNG_OK);
  EXPECT_NEAR(l, 0.0, 1e-12);
  gng_model_free(m);

  ASSERT_EQ(gng_model_curie_weiss(1.5, 0.0, &m), GNG_OK);
  double roots[2];
  size_t count = 0;
  ASSERT_EQ(gng_stationary_points(m, roots, 2, &count), GNG_OK);
  EXPECT_EQ(count, 3u);
  EXPECT_LT(roots[0], 0.0);
  gng_model_free(m);
}

TEST(CApi, FlowAndEscape) {
  gng_model* m = nullptr;
  ASSERT_EQ(gng_model_curie_weiss(0.0, 0.0, &m), GNG_OK);
  gng_trajectory* tr = nullptr;
  ASSERT_EQ(gng_flow_integrate(m, 0.0, 1.2328, 0.0, 1.0, nullptr, &tr), GNG_OK);
  size_t n = 0;
  int escaped = 0, corner = 0;
  double te = 0, drift = 0;
  ASSERT_EQ(gng_trajectory_info(tr, &n, &escaped, &corner, &te, &drift), GNG_OK);
  EXPECT_EQ(escaped, 1);
  EXPECT_EQ(corner, 1);
  EXPECT_NEAR(te, -0.5 * std::log(std::tanh(1.2328)), 1e-6);
  EXPECT_GT(n, 1u);
  double t, x, p, u, e;
  EXPECT_EQ(gng_trajectory_sample(tr, n, &t, &x, &p, &u, &e), GNG_ERR_INVALID_ARGUMENT);
  char* csv = nullptr;
  ASSERT_EQ(gng_trajectory_csv(tr, &csv), GNG_OK);
  EXPECT_EQ(take(csv).rfind("t,x,p,u,H", 0), 0u);
  gng_trajectory_free(tr);

  double et = 0;
  ASSERT_EQ(gng_escape_time(m, 0.2, 0.0, nullptr, &et), GNG_OK);
  EXPECT_TRUE(std::isinf(et));
  gng_model_free(m);
}

TEST(CApi, BadOptionsAreConfigErrors) {
  gng_model* m = nullptr;
  ASSERT_EQ(gng_model_curie_weiss(0.0, 0.0, &m), GNG_OK);
  gng_integrator_options o;
  gng_integrator_defaults(&o);
  EXPECT_DOUBLE_EQ(o.p_cap, 30.0);
  o.p_cap = 1.0;
  gng_trajectory* tr = nullptr;
  EXPECT_EQ(gng_flow_integrate(m, 0.0, 0.5, 0.0, 1.0, &o, &tr), GNG_ERR_CONFIG);
  EXPECT_EQ(tr, nullptr);
  gng_model_free(m);
}

TEST(CApi, PushProfilesAndAgreement) {
  gng_model* m = nullptr;
  gng_rate* r = nullptr;
  ASSERT_EQ(gng_model_curie_weiss(0.0, 0.0, &m), GNG_OK);
  ASSERT_EQ(gng_rate_cw_entropy(2.0, 0.0, &r), GNG_OK);

  gng_pushforward* pf = nullptr;
  ASSERT_EQ(gng_push(m, r, 0.25, nullptr, nullptr, &pf), GNG_OK);
  int is_graph = 1;
  ASSERT_EQ(gng_pushforward_is_graph(pf, &is_graph), GNG_OK);
  EXPECT_EQ(is_graph, 0);
  char* js = nullptr;
  ASSERT_EQ(gng_pushforward_json(pf, &js), GNG_OK);
  EXPECT_NE(take(js).find("\"schema_version\""), std::string::npos);
  gng_pushforward_free(pf);

  gng_profile_options po;
  gng_profile_defaults(&po);
  po.lo = -0.95;
  po.hi = 0.95;
  po.points = 101;
  gng_profile* env = nullptr;
  gng_profile* dp = nullptr;
  ASSERT_EQ(gng_rate_profile(m, r, GNG_METHOD_ENVELOPE, 0.35, &po, nullptr, nullptr, &env), GNG_OK);
  ASSERT_EQ(gng_rate_profile(m, r, GNG_METHOD_HOPF_LAX_DP, 0.35, &po, nullptr, nullptr, &dp), GNG_OK);
  double d = 1;
  ASSERT_EQ(gng_profile_linf(env, dp, &d), GNG_OK);
  EXPECT_LE(d, 5e-2);
  size_t nd = 0, cert = 0;
  ASSERT_EQ(gng_profile_nondiff_count(env, &nd, &cert), GNG_OK);
  EXPECT_EQ(nd, 1u);
  const gng_profile* both[2] = {env, dp};
  char* svg = nullptr;
  ASSERT_EQ(gng_profiles_svg(both, 2, "t = 0.35", &svg), GNG_OK);
  EXPECT_EQ(take(svg).rfind("<svg", 0), 0u);
  gng_profile_free(env);
  gng_profile_free(dp);
  gng_rate_free(r);
  gng_model_free(m);
}

TEST(CApi, Thresholds) {
  gng_model* m = nullptr;
  gng_rate* r = nullptr;
  ASSERT_EQ(gng_model_curie_weiss(0.0, 0.0, &m), GNG_OK);
  ASSERT_EQ(gng_rate_cw_entropy(2.0, 0.0, &r), GNG_OK);
  double t0 = 0;
  ASSERT_EQ(gng_linearization_threshold(m, r, 0.0, &t0), GNG_OK);
  EXPECT_NEAR(t0, 0.25 * std::log(2.0), 1e-12);
  char* js = nullptr;
  ASSERT_EQ(gng_heating_report_json(m, r, nullptr, &js), GNG_OK);
  EXPECT_NE(take(js).find("\"discrepancy_flag\": true"), std::string::npos);
  gng_rate_free(r);
  ASSERT_EQ(gng_rate_cw_entropy(0.5, 0.0, &r), GNG_OK);
  EXPECT_EQ(gng_linearization_threshold(m, r, 0.0, &t0), GNG_ERR_INAPPLICABLE);
  gng_rate_free(r);
  gng_model_free(m);

  double z = 0, kappa = 0;
  ASSERT_EQ(gng_recovery_constants(2.0, &z, &kappa), GNG_OK);
  EXPECT_NEAR(z, std::sqrt(0.5), 1e-14);
  EXPECT_EQ(gng_recovery_constants(0.5, &z, &kappa), GNG_ERR_INAPPLICABLE);
}

TEST(CApi, Loop) {
  gng_model* m = nullptr;
  ASSERT_EQ(gng_model_curie_weiss(1.5, 0.0, &m), GNG_OK);
  gng_loop* loop = nullptr;
  ASSERT_EQ(gng_rotating_loop_auto(m, 0.5, &loop), GNG_OK);
  double a, b, e;
  ASSERT_EQ(gng_loop_bounds(loop, &a, &b, &e), GNG_OK);
  EXPECT_LT(a, b);
  EXPECT_LT(e, 0.0);
  size_t n = 0;
  ASSERT_EQ(gng_loop_size(loop, &n), GNG_OK);
  double x, p;
  ASSERT_EQ(gng_loop_point(loop, 1, n / 2, &x, &p), GNG_OK);
  double period = 0;
  ASSERT_EQ(gng_loop_period(m, loop, x, p, nullptr, &period), GNG_OK);
  EXPECT_TRUE(std::isfinite(period));
  char* js = nullptr;
  ASSERT_EQ(gng_loop_json(loop, &js), GNG_OK);
  EXPECT_NE(take(js).find("\"period\""), std::string::npos);
  gng_loop_free(loop);
  gng_model_free(m);

  ASSERT_EQ(gng_model_curie_weiss(0.5, 0.0, &m), GNG_OK);
  EXPECT_EQ(gng_rotating_loop_auto(m, 0.5, &loop), GNG_ERR_INAPPLICABLE);
  gng_model_free(m);
}

TEST(CApi, ScenarioParseErrors) {
  gng_scenario* sc = nullptr;
  EXPECT_EQ(gng_scenario_parse("name = \"x\"\n[times]\nvalues = []\n", "inline.toml", &sc), GNG_ERR_CONFIG);
  EXPECT_EQ(sc, nullptr);
  EXPECT_NE(std::string(gng_last_error()).find("inline.toml"), std::string::npos);
  EXPECT_EQ(gng_scenario_load("/nonexistent.toml", &sc), GNG_ERR_IO);
}

TEST(CApi, Threads) {
  EXPECT_EQ(gng_set_threads(2), GNG_OK);
  EXPECT_EQ(gng_set_threads(-1), GNG_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(gng_set_threads(0), GNG_OK);
}
