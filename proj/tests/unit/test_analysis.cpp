#include <gtest/gtest.h>

#include <cmath>

#include "gnglab/analysis.hpp"

using namespace gnglab;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Io;
}

// Root of artanh(x) = beta x on (0, 1) by bisection.
double magnetization(double beta) {
  double lo = 1e-6, hi = 1.0 - 1e-15;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std::atanh(mid) - beta * mid < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Linearization, ThresholdFormula) {
  EXPECT_NEAR(linearization_threshold({0.0, -2.0, 4.0, -1.0}), 0.25 * std::log(2.0), 1e-12);
  EXPECT_NEAR(linearization_threshold({0.0, 0.0, 4.0, -1.0}), 0.25, 1e-14);
  EXPECT_NEAR(linearization_threshold({0.0, -2.0, 4.0, -0.1}), 0.25 * std::log(11.0), 1e-12);
  EXPECT_NEAR(linearization_threshold({0.0, 1.0, 4.0, -1.0}), -0.5 * std::log(0.5), 1e-12);
}

TEST(Linearization, PreconditionViolations) {
  EXPECT_EQ(code_of([] { linearization_threshold({0.0, -2.0, 4.0, 0.3}); }), ErrorCode::Inapplicable);
  EXPECT_EQ(code_of([] { linearization_threshold({0.0, 1.0, 4.0, -0.3}); }), ErrorCode::Inapplicable);
  EXPECT_EQ(code_of([] { linearization_threshold({0.0, 0.0, 4.0, 0.0}); }), ErrorCode::Inapplicable);
}

TEST(Linearization, DataFromModel) {
  const auto d = linearization_data(ModelSpec::curie_weiss(0.0, 0.0), RateFunctionSpec::cw_entropy(2.0, 0.0), 0.0);
  EXPECT_NEAR(d.m, -2.0, 1e-14);
  EXPECT_NEAR(d.c, 4.0, 1e-14);
  EXPECT_NEAR(d.i0_dd, -1.0, 1e-14);
  EXPECT_EQ(code_of([] {
              linearization_data(ModelSpec::curie_weiss(0.0, 0.0), RateFunctionSpec::cw_entropy(2.0, 0.0), 0.3);
            }),
            ErrorCode::Precondition);
}

TEST(SlopeSign, IdentityAtTimeZero) {
  EXPECT_NEAR(slope_sign_at(ModelSpec::curie_weiss(0.0, 0.0), RateFunctionSpec::cw_entropy(2.0, 0.0), 0.0, 0.0,
                            1e-3, IntegratorConfig{}),
              1.0, 1e-12);
}

TEST(SlopeSign, VanishesAtLinearizedTime) {
  const auto m = ModelSpec::curie_weiss(0.0, 0.0);
  const auto s = RateFunctionSpec::cw_entropy(2.0, 0.0);
  IntegratorConfig cfg;
  EXPECT_LE(std::abs(slope_sign_at(m, s, 0.0, 0.25 * std::log(2.0), 1e-3, cfg)), 5e-3);
  EXPECT_LT(slope_sign_at(m, s, 0.0, 0.25, 1e-3, cfg), 0.0);
  EXPECT_NEAR(slope_zero_crossing(m, s, 0.0, 0.05, 0.3, 1e-3, cfg), 0.25 * std::log(2.0), 2e-3);
}

TEST(SlopeSign, DiffusionCrossing) {
  const auto m = ModelSpec::diffusion(double_well(1.0));
  const auto s = RateFunctionSpec::polynomial(double_well(3.0));
  EXPECT_NEAR(slope_zero_crossing(m, s, 0.0, 0.1, 1.5, 1e-3, IntegratorConfig{}), 0.5 * std::log(3.0), 5e-3);
}

TEST(SlopeSign, NoSignChangeIsBracketError) {
  const auto m = ModelSpec::curie_weiss(1.5, 0.0);
  const auto s = RateFunctionSpec::cw_entropy(1.5, 0.0);
  EXPECT_EQ(code_of([&] { slope_zero_crossing(m, s, 0.0, 0.1, 1.0, 1e-3, IntegratorConfig{}); }),
            ErrorCode::Bracket);
}

TEST(SlopeSign, EscapedNeighbourIsReported) {
  EXPECT_EQ(code_of([] {
              slope_sign_at(ModelSpec::curie_weiss(0.0, 0.0), RateFunctionSpec::cw_entropy(2.0, 0.0), 0.95, 5.0,
                            1e-3, IntegratorConfig{});
            }),
            ErrorCode::Escaped);
}

TEST(Onset, EquilibriumNeverFolds) {
  EXPECT_EQ(code_of([] {
              overhang_onset(ModelSpec::curie_weiss(1.5, 0.0), RateFunctionSpec::cw_entropy(1.5, 0.0), 0.1, 1.0,
                             IntegratorConfig{});
            }),
            ErrorCode::Bracket);
}

TEST(Onset, BracketedAndNoLaterThanCentreTangent) {
  const auto m = ModelSpec::curie_weiss(0.0, 0.0);
  const auto s = RateFunctionSpec::cw_entropy(2.0, 0.0);
  const double t = overhang_onset(m, s, 0.05, 0.3, IntegratorConfig{});
  EXPECT_GT(t, 0.05);
  EXPECT_LE(t, 0.25 * std::log(2.0) + 1e-3);
}

TEST(Certificate, CriteriaFromModels) {
  auto c = order_preservation_certificate(ModelSpec::curie_weiss(0.0, 0.0), {RegionKind::Whole, 0, 0}, 64);
  EXPECT_TRUE(c.holds);
  EXPECT_EQ(c.criterion, "decreasing-in-both");
  c = order_preservation_certificate(ModelSpec::curie_weiss(1.5, 0.0), {RegionKind::UpperRight, 0, 0}, 64);
  EXPECT_TRUE(c.holds);
  c = order_preservation_certificate(ModelSpec::diffusion(double_well(1.0)), {RegionKind::UpperRight, 0.5, 0}, 64);
  EXPECT_TRUE(c.holds);
  EXPECT_EQ(c.criterion, "third-derivative-sign");
}

TEST(Certificate, CounterexampleReported) {
  // W''' = 6x is negative on the left, so the upper-right quadrant at
  // y = -0.5 fails the sign condition.
  const auto c =
      order_preservation_certificate(ModelSpec::diffusion(double_well(1.0)), {RegionKind::UpperRight, -0.5, 0}, 64);
  EXPECT_FALSE(c.holds);
  ASSERT_TRUE(c.counterexample.has_value());
  EXPECT_FALSE(c.counterexample->condition.empty());
}

TEST(Loop, CurieWeissHalfDepth) {
  const auto m = ModelSpec::curie_weiss(1.5, 0.0);
  const double mp = magnetization(1.5);
  const auto loop = rotating_loop(m, 0.0, mp, 0.5);
  EXPECT_GT(loop.a, 0.0);
  EXPECT_LT(loop.b, mp);
  EXPECT_LT(loop.a, loop.b);
  EXPECT_LT(loop.energy, 0.0);
  ASSERT_EQ(loop.upper.size(), loop.lower.size());
  for (std::size_t i = 0; i < loop.upper.size(); ++i) {
    EXPECT_NEAR(hamiltonian(m, loop.upper[i].x, loop.upper[i].p), loop.energy, 1e-8);
    EXPECT_NEAR(hamiltonian(m, loop.lower[i].x, loop.lower[i].p), loop.energy, 1e-8);
    EXPECT_LE(loop.lower[i].p, loop.upper[i].p + 1e-12);
  }
  EXPECT_NEAR(loop.upper.front().p, loop.lower.front().p, 1e-6);
  EXPECT_NEAR(loop.upper.back().p, loop.lower.back().p, 1e-6);
}

TEST(Loop, PeriodIndependentOfStart) {
  const auto m = ModelSpec::curie_weiss(1.5, 0.0);
  const auto loop = rotating_loop(m, 0.0, magnetization(1.5), 0.5);
  IntegratorConfig cfg;
  const std::size_t k = loop.upper.size() / 2;
  const double t1 = loop_period(m, loop, loop.upper[k], cfg);
  const double t2 = loop_period(m, loop, loop.lower[k / 2], cfg);
  EXPECT_TRUE(std::isfinite(t1));
  EXPECT_NEAR(t1, t2, 1e-3);
}

TEST(Loop, DiffusionDoubleWell) {
  const auto m = ModelSpec::diffusion(double_well(1.0));
  const auto loop = rotating_loop(m, 0.0, 1.0, 0.5);
  EXPECT_GT(loop.a, 0.0);
  EXPECT_LT(loop.b, 1.0);
  const double t = loop_period(m, loop, loop.upper[loop.upper.size() / 2], IntegratorConfig{});
  EXPECT_TRUE(std::isfinite(t));
}

TEST(Loop, Errors) {
  EXPECT_EQ(code_of([] { rotating_loop(ModelSpec::curie_weiss(0.5, 0.0)); }), ErrorCode::Inapplicable);
  const auto m = ModelSpec::curie_weiss(1.5, 0.0);
  const auto loop = rotating_loop(m, 0.0, magnetization(1.5), 0.5);
  PhasePoint off = loop.upper[loop.upper.size() / 2];
  // Shift the start so that its energy is roughly 0.1 away from the loop.
  off.p += 0.1 / derivatives(m, off.x, off.p).dHdp;
  EXPECT_EQ(code_of([&] { loop_period(m, loop, off, IntegratorConfig{}); }), ErrorCode::Precondition);
}

TEST(Recovery, ConstantsMatchNumericalMaximum) {
  for (double alpha : {1.2, 2.0, 4.0}) {
    const auto k = recovery_constants(alpha);
    EXPECT_NEAR(k.z, std::sqrt(1.0 - 1.0 / alpha), 1e-14);
    // g0(x) = artanh(x) - alpha x has its local maximum on (-1, 0) at -z.
    auto g0 = [&](double x) { return std::atanh(x) - alpha * x; };
    double a = -1.0 + 1e-12, b = 0.0;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < 200; ++i) {
      const double c = b - r * (b - a), d = a + r * (b - a);
      if (g0(c) > g0(d)) b = d; else a = c;
    }
    EXPECT_NEAR(k.kappa, g0(0.5 * (a + b)), 1e-8) << "alpha=" << alpha;
  }
  EXPECT_NEAR(recovery_constants(2.0).kappa, 0.532840, 1e-6);
  EXPECT_LT(recovery_constants(1.0 + 1e-8).kappa, 1e-6);
  EXPECT_EQ(code_of([] { recovery_constants(1.0); }), ErrorCode::Inapplicable);
}

TEST(Recovery, ConvexDataNeverFolds) {
  std::vector<double> ts;
  for (int i = 0; i <= 10; ++i) ts.push_back(0.2 * i);
  const auto tl = recovery_scan(ModelSpec::curie_weiss(0.0, 0.0), RateFunctionSpec::cw_entropy(0.5, -0.4), ts,
                                IntegratorConfig{});
  EXPECT_FALSE(tl.t0.has_value());
  for (const auto& e : tl.entries) EXPECT_TRUE(e.is_graph);
}

TEST(Recovery, NeedsNoInteraction) {
  EXPECT_EQ(code_of([] {
              recovery_scan(ModelSpec::curie_weiss(1.5, 0.0), RateFunctionSpec::cw_entropy(2.0, -0.7), {0.1},
                            IntegratorConfig{});
            }),
            ErrorCode::Precondition);
}

TEST(Scan, ObserverSeesEveryTimeInOrder) {
  std::vector<double> seen;
  ScanOptions opt;
  opt.observer = [&](const PushForward& pf, const RateProfile*) { seen.push_back(pf.t); };
  const std::vector<double> ts = {0.1, 0.2, 0.3};
  const auto tl = scan_timeline(ModelSpec::curie_weiss(0.0, 0.0), RateFunctionSpec::cw_entropy(2.0, 0.0), ts,
                                IntegratorConfig{}, opt);
  EXPECT_EQ(seen, ts);
  ASSERT_EQ(tl.entries.size(), 3u);
  EXPECT_TRUE(tl.entries[0].is_graph);
  EXPECT_FALSE(tl.entries[2].is_graph);
  ASSERT_TRUE(tl.t0.has_value());
  EXPECT_DOUBLE_EQ(*tl.t0, 0.2);
}

TEST(Heating, CurieWeissReport) {
  const auto r = heating_threshold_report(ModelSpec::curie_weiss(0.0, 0.0), RateFunctionSpec::cw_entropy(2.0, 0.0),
                                          IntegratorConfig{});
  EXPECT_NEAR(r.t0_linearized, 0.25 * std::log(2.0), 1e-12);
  EXPECT_NEAR(r.t1_printed, -0.25 * std::log(2.0), 1e-12);
  EXPECT_TRUE(r.discrepancy_flag);
  EXPECT_NEAR(r.slope_crossing, r.t0_linearized, 2e-3);
}

TEST(Heating, InteractingReport) {
  const auto r = heating_threshold_report(ModelSpec::curie_weiss(1.5, 0.0), RateFunctionSpec::cw_entropy(2.0, 0.0),
                                          IntegratorConfig{});
  EXPECT_NEAR(r.t0_linearized, -0.5 * std::log(0.5), 1e-12);
  EXPECT_GT(r.t0_linearized, 0.0);
}

TEST(Heating, DiffusionReport) {
  const auto r = heating_threshold_report(ModelSpec::diffusion(double_well(1.0)),
                                          RateFunctionSpec::polynomial(double_well(3.0)), IntegratorConfig{});
  EXPECT_NEAR(r.t0_linearized, 0.5 * std::log(3.0), 1e-12);
  EXPECT_NEAR(r.t1_printed, -std::log(2.0 / 3.0), 1e-12);
  EXPECT_TRUE(r.discrepancy_flag);
  EXPECT_NEAR(r.slope_crossing, r.t0_linearized, 5e-3);
}

TEST(Heating, OutsideRegime) {
  EXPECT_EQ(code_of([] {
              heating_threshold_report(ModelSpec::curie_weiss(0.0, 0.0), RateFunctionSpec::cw_entropy(0.5, 0.0),
                                       IntegratorConfig{});
            }),
            ErrorCode::Inapplicable);
}
