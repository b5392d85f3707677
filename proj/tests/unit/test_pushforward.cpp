#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gnglab/pushforward.hpp"

using namespace gnglab;

namespace {

std::vector<GraphSample> graph(const RateFunctionSpec& s, std::size_t n = 256) {
  SamplingOptions o;
  o.n = n;
  return sample_initial_graph(s, o);
}

PushForward refined_push(const ModelSpec& m, const RateFunctionSpec& s, double t, std::size_t n = 256) {
  return push_graph(m, s, graph(s, n), t, IntegratorConfig{}, RefineOptions{});
}

}  // namespace

TEST(Sampling, ConvexDataGivesIncreasingMomentum) {
  const auto g = graph(RateFunctionSpec::cw_entropy(1.0, 0.0), 16);
  ASSERT_GE(g.size(), 16u);
  for (std::size_t i = 1; i < g.size(); ++i) {
    EXPECT_GT(g[i].x0, g[i - 1].x0);
    EXPECT_GT(g[i].p0, g[i - 1].p0);
  }
}

TEST(Sampling, SlopeSignChangesAtInflections) {
  const auto g = graph(RateFunctionSpec::cw_entropy(2.0, 0.0), 400);
  std::vector<double> turns;
  for (std::size_t i = 2; i < g.size(); ++i) {
    const double d0 = g[i - 1].p0 - g[i - 2].p0, d1 = g[i].p0 - g[i - 1].p0;
    if ((d0 > 0) != (d1 > 0)) turns.push_back(g[i - 1].x0);
  }
  ASSERT_EQ(turns.size(), 2u);
  EXPECT_NEAR(turns[0], -std::sqrt(0.5), 1e-2);
  EXPECT_NEAR(turns[1], std::sqrt(0.5), 1e-2);
}

TEST(Sampling, PolynomialMomentumIsDerivative) {
  const auto s = RateFunctionSpec::polynomial(double_well(1.0));
  for (const auto& g : graph(s, 64)) {
    EXPECT_NEAR(g.p0, g.x0 * g.x0 * g.x0 - g.x0, 1e-12);
    EXPECT_LE(std::abs(g.p0), 10.0 + 1e-9);
  }
}

TEST(Sampling, SlopeBudgetHonoured) {
  const auto g = graph(RateFunctionSpec::cw_entropy(2.0, 0.0), 64);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_LE(std::abs(g[i].p0 - g[i - 1].p0), 0.5 + 1e-12);
}

TEST(Sampling, RejectsTooFewSamples) {
  EXPECT_THROW(sample_initial_graph(RateFunctionSpec::cw_entropy(2.0, 0.0), 8, 1e-6), Error);
}

TEST(PushGraph, TimeZeroIsIdentity) {
  const auto s = RateFunctionSpec::cw_entropy(2.0, 0.0);
  const auto g = graph(s, 64);
  const auto pf = push_graph(ModelSpec::curie_weiss(0.0, 0.0), g, 0.0, IntegratorConfig{});
  ASSERT_EQ(pf.branches.size(), 1u);
  ASSERT_EQ(pf.branches[0].points.size(), g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(pf.branches[0].points[i].x, g[i].x0);
    EXPECT_EQ(pf.branches[0].points[i].p, g[i].p0);
    EXPECT_EQ(pf.branches[0].points[i].u, g[i].u0);
  }
  EXPECT_EQ(pf.escaped_fraction, 0.0);
}

TEST(PushGraph, EquilibriumGraphIsInvariant) {
  const auto s = RateFunctionSpec::cw_entropy(1.5, 0.0);
  const auto pf = refined_push(ModelSpec::curie_weiss(1.5, 0.0), s, 1.0);
  std::size_t alive = 0;
  for (const auto& b : pf.branches) {
    for (const auto& q : b.points) {
      ++alive;
      EXPECT_NEAR(q.p, std::atanh(q.x) - 1.5 * q.x, 1e-6);
    }
  }
  EXPECT_GT(alive, 100u);
  EXPECT_TRUE(detect_overhangs(pf).is_graph);
}

TEST(PushGraph, BranchesAreConsistent) {
  const auto m = ModelSpec::curie_weiss(0.0, 0.0);
  const auto s = RateFunctionSpec::cw_entropy(2.0, 0.0);
  const auto pf = refined_push(m, s, 0.35);
  ASSERT_FALSE(pf.branches.empty());
  double prev_hi = -kInf;
  bool connects = false;
  for (const auto& b : pf.branches) {
    EXPECT_LT(b.origin_lo, b.origin_hi);
    EXPECT_GE(b.origin_lo, prev_hi);
    prev_hi = b.origin_hi;
    if (b.left_limit == Corner::Minus && b.right_limit == Corner::Plus) connects = true;
    for (std::size_t i = 0; i < b.points.size(); ++i) {
      const auto& q = b.points[i];
      // Energy stratification along the branch.
      const auto r0 = rate0(s, q.x0);
      EXPECT_NEAR(hamiltonian(m, q.x, q.p), hamiltonian(m, q.x0, r0.deriv),
                  1e-7 * (1 + std::abs(hamiltonian(m, q.x0, r0.deriv))));
      if (i > 0) {
        const auto& r = b.points[i - 1];
        EXPECT_GT(std::hypot(q.x - r.x, q.p - r.p), 1e-9);  // injectivity
      }
    }
  }
  EXPECT_TRUE(connects);
  EXPECT_GT(pf.escaped_fraction, 0.0);
  EXPECT_LT(pf.escaped_fraction, 1.0);
}

TEST(PushGraph, SeriesMatchesSinglePushes) {
  const auto m = ModelSpec::curie_weiss(1.5, 0.0);
  const auto g = graph(RateFunctionSpec::cw_entropy(1.2, 0.0), 64);
  const std::vector<double> ts = {0.2, 0.7};
  const auto series = push_graph_series(m, g, ts, IntegratorConfig{});
  ASSERT_EQ(series.size(), 2u);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const auto single = push_graph(m, g, ts[k], IntegratorConfig{});
    ASSERT_EQ(single.samples.size(), series[k].samples.size());
    for (std::size_t i = 0; i < single.samples.size(); ++i) {
      EXPECT_EQ(single.samples[i].alive, series[k].samples[i].alive);
      if (single.samples[i].alive) EXPECT_NEAR(single.samples[i].x, series[k].samples[i].x, 1e-9);
    }
  }
}

TEST(Overhangs, HighTemperatureStaysGraph) {
  const auto m = ModelSpec::curie_weiss(1.5, 0.0);
  const auto s = RateFunctionSpec::cw_entropy(0.8, 0.0);
  for (double t : {0.5, 1.0, 2.0}) {
    const auto pf = refined_push(m, s, t);
    EXPECT_TRUE(detect_overhangs(pf).is_graph) << "t=" << t;
    // Graph implies x_t increasing across the concatenated branches.
    double prev = -kInf;
    for (const auto& b : pf.branches)
      for (const auto& q : b.points) {
        EXPECT_GT(q.x, prev);
        prev = q.x;
      }
  }
}

TEST(Overhangs, HeatingFoldsThroughCentre) {
  const auto pf = refined_push(ModelSpec::curie_weiss(0.0, 0.0), RateFunctionSpec::cw_entropy(2.0, 0.0), 0.25);
  const auto rep = detect_overhangs(pf);
  ASSERT_FALSE(rep.is_graph);
  bool covers_zero = false;
  for (const auto& r : rep.regions) {
    ASSERT_GE(r.witnesses.size(), 2u);
    double lo = kInf, hi = -kInf;
    for (const auto& w : r.witnesses) {
      lo = std::min(lo, w.p);
      hi = std::max(hi, w.p);
    }
    EXPECT_GE(hi - lo, 1e-6);
    if (r.x_lo <= 0.0 && r.x_hi >= 0.0) covers_zero = true;
  }
  EXPECT_TRUE(covers_zero);

  // The branch through x0 = 0 runs backwards near the centre.
  for (const auto& b : pf.branches) {
    if (!(b.origin_lo < 0.0 && b.origin_hi > 0.0)) continue;
    std::size_t i0 = 0;
    for (std::size_t i = 0; i < b.points.size(); ++i)
      if (std::abs(b.points[i].x0) < std::abs(b.points[i0].x0)) i0 = i;
    ASSERT_GT(i0, 0u);
    EXPECT_LT(b.points[i0 + 1].x, b.points[i0 - 1].x);
  }
}

TEST(Overhangs, RefinementStability) {
  const auto m = ModelSpec::curie_weiss(0.0, 0.0);
  const auto s = RateFunctionSpec::cw_entropy(2.0, 0.0);
  const auto a = detect_overhangs(refined_push(m, s, 0.25, 256));
  const auto b = detect_overhangs(refined_push(m, s, 0.25, 512));
  EXPECT_EQ(a.is_graph, b.is_graph);
  ASSERT_EQ(a.regions.size(), b.regions.size());
  for (std::size_t i = 0; i < a.regions.size(); ++i) {
    EXPECT_NEAR(a.regions[i].x_lo, b.regions[i].x_lo, 0.02);
    EXPECT_NEAR(a.regions[i].x_hi, b.regions[i].x_hi, 0.02);
  }
}

TEST(OrderPreservation, RandomOrderedPairsNoInteraction) {
  const auto m = ModelSpec::curie_weiss(0.0, 0.0);
  IntegratorConfig cfg;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ux(-0.9, 0.9), up(-1.5, 1.5), gap(1e-3, 0.3);
  int checked = 0;
  for (int i = 0; i < 200 && checked < 50; ++i) {
    const PhasePoint a{ux(rng), up(rng)};
    const PhasePoint b{std::min(a.x + gap(rng), 0.95), a.p + gap(rng)};
    const auto ra = integrate(m, a, 0.0, 0.05, cfg);
    const auto rb = integrate(m, b, 0.0, 0.05, cfg);
    if (ra.escaped || rb.escaped) continue;
    ++checked;
    EXPECT_LT(ra.last().x, rb.last().x);
    EXPECT_LT(ra.last().p, rb.last().p);
  }
  EXPECT_EQ(checked, 50);
}

TEST(PushCsv, HeaderAndStatus) {
  const auto s = RateFunctionSpec::cw_entropy(2.0, 0.0);
  const auto pf = push_graph(ModelSpec::curie_weiss(0.0, 0.0), graph(s, 32), 0.3, IntegratorConfig{});
  const auto csv = pushforward_csv(pf);
  EXPECT_EQ(csv.rfind("t,x0,p0,x,p,u,branch_id,status\n", 0), 0u);
  EXPECT_NE(csv.find("alive"), std::string::npos);
}
