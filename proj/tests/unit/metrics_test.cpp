// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "kbc/error.hpp"
#include "kbc/metrics.hpp"
#include "test_util.hpp"

namespace kbc {
namespace {

using testing::node_rule;

constexpr double kTol = 1e-9;

TEST(Support, SingleEdge) {
  CoverageGraph g({"+", "-"});
  g.add_node(node_rule(1, std::nullopt, 2));
  g.add_node(node_rule(2, "+", 5));
  g.add_coverage(1, 2);
  const SupportTable s = compute_support(g);
  EXPECT_DOUBLE_EQ(s.at(1)[0], 5.0);
  EXPECT_DOUBLE_EQ(s.at(1)[1], 0.0);
  EXPECT_DOUBLE_EQ(s.at(2)[0], 5.0);
}

CoverageGraph diamond() {
  // t covers a and b, which both cover the leaf e (L = 8).
  CoverageGraph g({"+"});
  g.add_node(node_rule(1, std::nullopt, 1));  // t
  g.add_node(node_rule(2, std::nullopt, 1));  // a
  g.add_node(node_rule(3, std::nullopt, 1));  // b
  g.add_node(node_rule(4, "+", 8));           // e
  g.add_coverage(1, 2);
  g.add_coverage(1, 3);
  g.add_coverage(2, 4);
  g.add_coverage(3, 4);
  return g;
}

TEST(Support, Diamond) {
  const CoverageGraph g = diamond();
  for (const SupportTable& s : {compute_support(g), brute_force_support(g)}) {
    EXPECT_DOUBLE_EQ(s.at(2)[0], 4.0);
    EXPECT_DOUBLE_EQ(s.at(3)[0], 4.0);
    EXPECT_DOUBLE_EQ(s.at(1)[0], 8.0);
  }
}

TEST(Support, ChainCarriesFullMass) {
  CoverageGraph g({"+"});
  g.add_node(node_rule(1, std::nullopt, 1));
  g.add_node(node_rule(2, std::nullopt, 1));
  g.add_node(node_rule(3, "+", 6));
  g.add_coverage(1, 2);
  g.add_coverage(2, 3);
  for (const SupportTable& s : {compute_support(g), brute_force_support(g)})
    for (RuleId id : {1, 2, 3}) EXPECT_DOUBLE_EQ(s.at(id)[0], 6.0);
}

TEST(Support, ResidualsAndUnlabelledLeaves) {
  CoverageGraph g({"+", "-"});
  g.add_node(node_rule(1, std::nullopt, 1));
  g.add_node(node_rule(2, std::nullopt, 1));  // unlabelled leaf
  g.add_node(node_rule(3, "-", 4));
  g.add_coverage(1, 2);
  g.add_coverage(1, 3);
  g.set_residual(2, {1.0, 0.5});
  g.set_residual(3, {0.25, 0.0});
  g.set_residual(1, {2.0, 0.0});
  for (const SupportTable& s : {compute_support(g), brute_force_support(g)}) {
    EXPECT_DOUBLE_EQ(s.at(2)[0], 1.0);
    EXPECT_DOUBLE_EQ(s.at(2)[1], 0.5);
    EXPECT_DOUBLE_EQ(s.at(3)[0], 0.25);
    EXPECT_DOUBLE_EQ(s.at(3)[1], 4.0);
    EXPECT_DOUBLE_EQ(s.at(1)[0], 3.25);
    EXPECT_DOUBLE_EQ(s.at(1)[1], 4.5);
  }
}

TEST(Support, LengthMapOverrides) {
  const CoverageGraph g = diamond();
  const SupportTable s = compute_support(g, {{4, 2.0}});
  EXPECT_DOUBLE_EQ(s.at(1)[0], 2.0);
  EXPECT_DOUBLE_EQ(s.at(2)[0], 1.0);
}

TEST(Support, FamilyFixture) {
  const CoverageGraph g = testing::family_graph();
  const SupportTable s = compute_support(g);
  const SupportTable b = brute_force_support(g);
  for (RuleId id : g.node_ids())
    for (std::size_t c = 0; c < 2; ++c) EXPECT_NEAR(s.at(id)[c], b.at(id)[c], kTol);
  // Cells where the fixture graph reproduces the reference support table.
  EXPECT_NEAR(s.at(100)[0], 8.922, 1e-9);
  EXPECT_NEAR(s.at(100)[1], 26.766, 1e-9);
  EXPECT_NEAR(s.at(20)[0], 8.922, 1e-9);
  EXPECT_NEAR(s.at(35)[0], 8.922, 1e-9);
  EXPECT_NEAR(s.at(35)[1], 8.922, 1e-9);
  EXPECT_NEAR(s.at(73)[0], 26.766, 1e-9);
  EXPECT_NEAR(s.at(110)[0], 35.688, 1e-9);
  EXPECT_NEAR(s.at(110)[1], 0.0, 1e-9);
  EXPECT_NEAR(s.at(138)[0], 44.61, 1e-9);
  EXPECT_NEAR(s.at(138)[1], 26.766, 1e-9);
  EXPECT_TRUE(conservation_check(g, s).holds());
}

TEST(Support, OracleSizeCap) {
  CoverageGraph g({"+"});
  for (RuleId i = 1; i <= 13; ++i) g.add_node(node_rule(i, "+", 1));
  EXPECT_THROW(brute_force_support(g), Error);
}

TEST(Conservation, EmptyGraph) {
  CoverageGraph g({"+", "-"});
  const auto rep = conservation_check(g, compute_support(g));
  EXPECT_TRUE(rep.holds());
  for (double b : rep.balance()) EXPECT_EQ(b, 0.0);
}

TEST(Conservation, RandomDags) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 100; ++i) {
    const auto n = static_cast<std::size_t>(1 + i % 40);
    const CoverageGraph g = testing::random_dag(rng, n, 1 + i % 3, 0.15);
    const auto rep = conservation_check(g, compute_support(g));
    EXPECT_TRUE(rep.holds(1e-9));
  }
}

TEST(Oracle, MatchesOnRandomSmallDags) {
  std::mt19937_64 rng(37);
  for (int i = 0; i < 300; ++i) {
    CoverageGraph g = testing::random_dag(rng, 1 + i % 12, 3, 0.35);
    for (RuleId id : g.node_ids())
      if (id % 3 == 0) g.set_residual(id, {0.5 * id, 0.0, 1.0});
    const SupportTable s = compute_support(g);
    const SupportTable b = brute_force_support(g);
    for (RuleId id : g.node_ids())
      for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(s.at(id)[c], b.at(id)[c], kTol);
  }
}

TEST(Oracle, EveryPosetUpToFiveNodes) {
  std::size_t shapes = 0;
  for (std::size_t n = 1; n <= 5; ++n)
    testing::for_each_poset(n, [&](const testing::Poset& p) {
      ++shapes;
      const CoverageGraph g = testing::graph_from_edges(
          n, testing::hasse_edges(p), {"+", "-"},
          [](RuleId id) { return std::optional<std::string>(id % 2 ? "+" : "-"); },
          [](RuleId id) { return 1.0 + static_cast<double>(id); });
      const SupportTable s = compute_support(g);
      const SupportTable b = brute_force_support(g);
      for (RuleId id : g.node_ids())
        for (std::size_t c = 0; c < 2; ++c) EXPECT_NEAR(s.at(id)[c], b.at(id)[c], kTol);
    });
  // Unlabelled posets on 1..5 points.
  EXPECT_EQ(shapes, 1u + 2 + 5 + 16 + 63);
}

TEST(Optimality, ReferenceRows) {
  const ClassScores r110 = optimality(9.962, std::vector<double>{35.688, 0.0}, 0.5);
  EXPECT_NEAR(r110.per_class[0], 12.863, 0.005);
  EXPECT_NEAR(r110.per_class[1], -22.825, 0.005);
  EXPECT_NEAR(r110.generic, 12.863, 0.005);
  EXPECT_EQ(r110.argmax, 0u);

  const ClassScores r138 = optimality(12.462, std::vector<double>{44.61, 26.766}, 0.5);
  EXPECT_NEAR(r138.per_class[0], 2.69, 0.005);
  EXPECT_NEAR(r138.per_class[1], -15.153, 0.005);

  const ClassScores ev = optimality(17.844, std::vector<double>{17.844, 0.0}, 0.5);
  EXPECT_DOUBLE_EQ(ev.per_class[0], 0.0);
  EXPECT_DOUBLE_EQ(ev.generic, 0.0);
}

TEST(Optimality, TiesPickTheFirstClass) {
  const ClassScores s = optimality(9.284, std::vector<double>{8.922, 8.922}, 0.5);
  EXPECT_DOUBLE_EQ(s.per_class[0], s.per_class[1]);
  EXPECT_EQ(s.argmax, 0u);
}

TEST(Optimality, BetaExtremes) {
  const std::vector<double> sup{7.0, 3.0, 2.0};
  const ClassScores one = optimality(4.0, sup, 1.0);
  EXPECT_DOUBLE_EQ(one.per_class[0], 3.0);
  EXPECT_DOUBLE_EQ(one.per_class[1], -1.0);
  EXPECT_DOUBLE_EQ(one.per_class[2], -2.0);
  const ClassScores zero = optimality(4.0, sup, 0.0);
  EXPECT_DOUBLE_EQ(zero.per_class[0], -5.0);
  EXPECT_DOUBLE_EQ(zero.per_class[1], -9.0);
  EXPECT_DOUBLE_EQ(zero.per_class[2], -10.0);
  for (double v : zero.per_class) EXPECT_LE(v, 0.0);
}

TEST(Optimality, RejectsBadBeta) {
  EXPECT_THROW(optimality(1.0, std::vector<double>{1.0}, 1.5), Error);
  EXPECT_THROW(optimality(1.0, std::vector<double>{1.0}, -0.1), Error);
  EXPECT_THROW(compute_metrics(diamond(), 2.0), Error);
}

ClassScores scores(double plus, double minus) {
  ClassScores s;
  s.per_class = {plus, minus};
  s.generic = std::max(plus, minus);
  s.argmax = plus >= minus ? 0 : 1;
  return s;
}

TEST(Permanence, Rule59AgainstItsBestCoverer) {
  const ClassScores own = scores(-5.557, -14.479);
  const ClassScores r110 = scores(12.863, -22.825);
  const ClassScores r20 = scores(-1.334, -10.256);
  const ClassScores* coverers[] = {&r20, &r110};
  const ClassScores p = permanence(own, coverers);
  EXPECT_NEAR(p.per_class[0], -18.42, 1e-9);
  EXPECT_NEAR(p.per_class[1], -14.479, 1e-9);
  EXPECT_NEAR(p.generic, -14.479, 1e-9);
}

TEST(Permanence, RootKeepsItsOptimality) {
  const ClassScores own = scores(2.5, -3.0);
  const ClassScores p = permanence(own, {});
  EXPECT_EQ(p.per_class, own.per_class);
  EXPECT_EQ(p.generic, own.generic);
}

TEST(Permanence, UsesTransitiveCoverers) {
  // 1 -> 2 -> 3: node 3's best coverer is the root, two hops up.
  CoverageGraph g({"+"});
  g.add_node(node_rule(1, std::nullopt, 1));
  g.add_node(node_rule(2, std::nullopt, 30));
  g.add_node(node_rule(3, "+", 10));
  g.add_coverage(1, 2);
  g.add_coverage(2, 3);
  const MetricsTable m = compute_metrics(g, 0.5);
  EXPECT_DOUBLE_EQ(m.at(1).opt.generic, 4.5);
  EXPECT_DOUBLE_EQ(m.at(2).opt.generic, -10.0);
  EXPECT_DOUBLE_EQ(m.at(3).perm.generic, 0.0 - 4.5);
  EXPECT_DOUBLE_EQ(m.at(2).perm.generic, -10.0 - 4.5);
  EXPECT_DOUBLE_EQ(m.at(1).perm.generic, 4.5);
}

TEST(Metrics, EvidenceLeafInvariants) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 30; ++i) {
    const CoverageGraph g = testing::random_dag(rng, 20, 3, 0.2);
    for (double beta : {0.0, 0.3, 1.0}) {
      const MetricsTable m = compute_metrics(g, beta);
      for (const auto& row : m.rows()) {
        for (double s : row.support) EXPECT_GE(s, 0.0);
        if (!row.label) continue;
        const std::size_t c = g.class_index(*row.label);
        EXPECT_DOUBLE_EQ(row.lhat[c], 0.0);
        EXPECT_DOUBLE_EQ(row.opt.per_class[c], 0.0);
      }
    }
  }
}

TEST(Metrics, ScaleCovariance) {
  std::mt19937_64 rng(43);
  for (int i = 0; i < 30; ++i) {
    const CoverageGraph g = testing::random_dag(rng, 25, 3, 0.2);
    const double k = 0.5 + i;
    LengthMap scaled;
    for (RuleId id : g.node_ids()) scaled[id] = k * g.length(id);
    const MetricsTable a = compute_metrics(g, 0.3);
    const MetricsTable b = compute_metrics(g, 0.3, scaled);
    for (const auto& ra : a.rows()) {
      const auto& rb = b.at(ra.id);
      const double tol = 1e-9 * k * (1 + std::abs(ra.opt.generic) + std::abs(ra.perm.generic));
      for (std::size_t c = 0; c < ra.support.size(); ++c) {
        EXPECT_NEAR(rb.support[c], k * ra.support[c], 1e-9 * k * (1 + ra.support[c]));
        EXPECT_NEAR(rb.lhat[c], k * ra.lhat[c], 1e-9 * k * (1 + std::abs(ra.lhat[c])));
        EXPECT_NEAR(rb.opt.per_class[c], k * ra.opt.per_class[c], tol * (1 + ra.support[c]));
      }
      EXPECT_NEAR(rb.opt.generic, k * ra.opt.generic, tol * 100);
      EXPECT_NEAR(rb.perm.generic, k * ra.perm.generic, tol * 100);
      // Exact ties can resolve either way after rounding.
      const auto& pc = ra.opt.per_class;
      bool tied = false;
      for (std::size_t c = 0; c < pc.size(); ++c)
        if (c != ra.opt.argmax && std::abs(pc[c] - pc[ra.opt.argmax]) < 1e-9 * (1 + k)) tied = true;
      if (!tied) {
        EXPECT_EQ(rb.opt.argmax, ra.opt.argmax);
      }
    }
  }
}

TEST(Metrics, TableLookup) {
  const MetricsTable m = compute_metrics(diamond(), 0.5);
  EXPECT_EQ(m.size(), 4u);
  EXPECT_TRUE(m.contains(4));
  EXPECT_FALSE(m.contains(5));
  EXPECT_THROW(m.at(5), Error);
  EXPECT_EQ(m.beta(), 0.5);
  EXPECT_EQ(m.rows().front().id, 1);
}

}  // namespace
}  // namespace kbc
