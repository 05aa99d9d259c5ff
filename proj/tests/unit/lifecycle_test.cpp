// Copyright 2026 The kbcons Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <vector>

#include "kbc/error.hpp"
#include "kbc/lifecycle.hpp"
#include "test_util.hpp"

namespace kbc {
namespace {

using testing::clause;
using testing::load_family;
using Ids = std::vector<RuleId>;

Policy family_policy(std::size_t capacity = 0) {
  Policy p;
  p.beta = 0.5;
  p.theta_p = Threshold::parse("avg_opt");
  p.theta_d = Threshold::parse("avg_opt");
  p.capacity = capacity;
  p.forget_fraction = 0.01;
  return p;
}

KnowledgeBase family_kb(const Policy& policy) {
  const auto f = load_family();
  KnowledgeBase kb(f.classes, f.background, policy);
  kb.ingest(f.working);
  return kb;
}

TEST(Threshold, ParseAndEvaluate) {
  const std::vector<double> opts{-4.0, 1.0, 6.0};
  EXPECT_DOUBLE_EQ(Threshold::parse("avg_opt").evaluate(opts), 1.0);
  EXPECT_DOUBLE_EQ(Threshold::parse("avg_opt_clamped").evaluate(opts), 1.0);
  EXPECT_DOUBLE_EQ(Threshold::parse("avg_opt_clamped").evaluate(std::vector<double>{-3, -1}), 0.0);
  EXPECT_DOUBLE_EQ(Threshold::parse("avg_opt").evaluate(std::vector<double>{-3, -1}), -2.0);
  EXPECT_DOUBLE_EQ(Threshold::parse("fixed:2.5").evaluate(opts), 2.5);
  EXPECT_EQ(Threshold::parse("fixed:-inf").evaluate(opts), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(Threshold::parse("avg_opt_clamped").to_string(), "avg_opt_clamped");
  EXPECT_EQ(Threshold::parse(Threshold::parse("fixed:1.5").to_string()).value, 1.5);
}

TEST(Threshold, RejectsBadText) {
  for (const char* bad : {"", "avg", "fixed:", "fixed:abc", "fixed:1x", "fixed:nan"})
    EXPECT_THROW(Threshold::parse(bad), ConfigError) << bad;
}

TEST(Policy, Validation) {
  const std::vector<std::string> classes{"+", "-"};
  Policy p;
  EXPECT_NO_THROW(p.validate(classes));
  p.beta = 1.5;
  EXPECT_THROW(p.validate(classes), ConfigError);
  p = Policy{};
  p.forget_fraction = 0;
  EXPECT_THROW(p.validate(classes), ConfigError);
  p = Policy{};
  p.consolidation_class = "x";
  EXPECT_THROW(p.validate(classes), ConfigError);
  p = Policy{};
  p.coverage.limits.max_facts = 0;
  EXPECT_THROW(p.validate(classes), ConfigError);
  EXPECT_THROW(KnowledgeBase(classes, {}, p), ConfigError);
}

TEST(Ingest, DuplicatesAreDropped) {
  KnowledgeBase kb({"+"}, {}, Policy{});
  EXPECT_EQ(kb.ingest(std::vector<Rule>{clause("p(X) :- q(X).", 1)}).inserted, (Ids{1}));
  const IngestResult again = kb.ingest(std::vector<Rule>{clause("p(Y) :- q(Y).", 2)});
  EXPECT_TRUE(again.inserted.empty());
  EXPECT_EQ(again.duplicates, 1u);
  EXPECT_EQ(kb.population(), 1u);
  EXPECT_THROW(kb.ingest(std::vector<Rule>{clause("r(a).", 1)}), Error);
}

TEST(Ingest, SameFactWithDifferentClassesIsKept) {
  const Program p = parse_program("#classes + -\n#evidence +\np(a).\n#evidence -\np(a).\n");
  KnowledgeBase kb(p.classes, {}, Policy{});
  EXPECT_EQ(kb.ingest(p.rules).inserted.size(), 2u);
}

TEST(Ingest, EmptyStateTakesTheWholeBatch) {
  const auto f = load_family();
  KnowledgeBase kb(f.classes, f.background, family_policy());
  EXPECT_EQ(kb.ingest(f.working).inserted.size(), f.working.size());
  EXPECT_EQ(kb.population(), 12u);
  // Background rules are never graph nodes.
  for (const auto& r : f.background) EXPECT_FALSE(kb.graph().contains(r.id));
}

TEST(Forget, FamilyDropsRule59First) {
  KnowledgeBase kb = family_kb(family_policy(11));
  const MetricsTable& m = kb.metrics();
  for (const auto& row : m.rows())
    if (row.id != 59) EXPECT_GT(row.perm.generic, m.at(59).perm.generic) << row.id;
  EXPECT_EQ(kb.forget_step(), (Ids{59}));
  EXPECT_EQ(kb.population(), 11u);
}

TEST(Forget, FractionIsACeilingOfThePopulation) {
  KnowledgeBase kb({"+"}, {}, [] {
    Policy p;
    p.capacity = 7;
    p.forget_fraction = 0.5;
    return p;
  }());
  std::vector<Rule> rules;
  for (int i = 1; i <= 8; ++i) rules.push_back(clause("p" + std::to_string(i) + "(a).", i));
  kb.ingest(rules);
  EXPECT_EQ(kb.forget_step().size(), 4u);
  EXPECT_EQ(kb.population(), 4u);
}

TEST(Forget, AllProtectedWarnsAndKeepsEverything) {
  Policy p;
  p.capacity = 1;
  KnowledgeBase kb({"+"}, {}, p);
  for (int i = 1; i <= 3; ++i) {
    Rule r = clause("p" + std::to_string(i) + "(X) :- q(X).", i);
    r.is_protected = true;
    kb.restore(r, {});
  }
  EXPECT_EQ(kb.consolidated_count(), 3u);
  EXPECT_TRUE(kb.forget_step().empty());
  EXPECT_EQ(kb.population(), 3u);
  const auto w = kb.take_warnings();
  ASSERT_EQ(w.size(), 1u);
  EXPECT_NE(w[0].find("OverCapacityStuck"), std::string::npos);
}

TEST(Forget, RootSupportNeverGrows) {
  std::vector<double> last;
  for (std::size_t cap = 12; cap >= 1; --cap) {
    KnowledgeBase kb = family_kb(family_policy(cap));
    kb.forget_step();
    const auto now = kb.root_support();
    if (!last.empty())
      for (std::size_t c = 0; c < now.size(); ++c) EXPECT_LE(now[c], last[c] + 1e-9);
    last = now;
  }
}

TEST(Promote, FamilyAboveTheMean) {
  KnowledgeBase kb = family_kb(family_policy());
  const Ids promoted = kb.promote_pass();
  EXPECT_EQ(promoted, (Ids{73, 100, 110, 138}));
  for (RuleId id : promoted) {
    EXPECT_TRUE(kb.is_consolidated(id));
    EXPECT_TRUE(kb.graph().rule(id).is_protected);
  }
  // Evidence at opt 0 is never promoted even when the threshold is below it.
  for (RuleId e : {1, 2, 3, 4, 5}) EXPECT_FALSE(kb.is_consolidated(e));
}

Policy isolated_policy(const char* theta_p) {
  Policy p;
  p.theta_p = Threshold::parse(theta_p);
  p.theta_d = Threshold::parse("fixed:-inf");
  return p;
}

TEST(Promote, EqualOptsPromoteNothing) {
  KnowledgeBase kb({"+"}, {}, isolated_policy("avg_opt"));
  Rule a = clause("p(X) :- q(X).", 1);
  Rule b = clause("r(X) :- s(X).", 2);
  a.length_override = b.length_override = 4.0;
  kb.ingest(std::vector<Rule>{a, b});
  EXPECT_TRUE(kb.promote_pass().empty());
}

TEST(Promote, ClampedThresholdBlocksNegativeRules) {
  Rule a = clause("p(X) :- q(X).", 1);
  Rule b = clause("r(X) :- s(X).", 2);
  a.length_override = 2.0;
  b.length_override = 8.0;
  KnowledgeBase clamped({"+"}, {}, isolated_policy("avg_opt_clamped"));
  clamped.ingest(std::vector<Rule>{a, b});
  EXPECT_TRUE(clamped.promote_pass().empty());
  KnowledgeBase plain({"+"}, {}, isolated_policy("avg_opt"));
  plain.ingest(std::vector<Rule>{a, b});
  EXPECT_EQ(plain.promote_pass(), (Ids{1}));
}

TEST(Promote, OneStrongRuleAmongZeros) {
  const Program p = parse_program(
      "#classes +\n#evidence +\n#length 24\np(a).\n#length 6\nr(b).\n"
      "#candidates\n#length 4\np(X) :- q(X).\n");
  KnowledgeBase kb(p.classes, {clause("q(a).", 100)}, isolated_policy("avg_opt"));
  kb.ingest(p.rules);
  EXPECT_DOUBLE_EQ(kb.metrics().at(3).opt.generic, 10.0);
  EXPECT_EQ(kb.promote_pass(), (Ids{3}));
}

TEST(Promote, RespectsConsolidationClass) {
  Policy pol = family_policy();
  pol.consolidation_class = "+";
  KnowledgeBase kb = family_kb(pol);
  // 100's best class is "-".
  EXPECT_EQ(kb.promote_pass(), (Ids{73, 110, 138}));
}

TEST(Promote, LeavesNoUnprotectedRuleAboveThreshold) {
  const auto f = load_family();
  for (const char* mode : {"avg_opt", "avg_opt_clamped", "fixed:2"}) {
    Policy p = family_policy();
    p.theta_p = Threshold::parse(mode);
    KnowledgeBase kb(f.classes, f.background, p);
    kb.ingest(f.working);
    std::vector<double> opts;
    for (const auto& row : kb.metrics().rows()) opts.push_back(row.opt.generic);
    const double theta = p.theta_p.evaluate(opts);
    kb.promote_pass();
    for (const auto& row : kb.metrics().rows())
      if (!row.is_protected && !row.label) EXPECT_LE(row.opt.generic, theta) << mode << row.id;
  }
}

// p(X) :- q(X) is promoted on a positive example, then demoted once an
// equally heavy negative example arrives.
struct Flip {
  Program evidence = parse_program(
      "#classes + -\n#evidence +\n#length 10\n#id 1\np(a).\n"
      "#evidence -\n#length 10\n#id 2\np(b).\n");
  Rule rule = [] {
    Rule r = clause("p(X) :- q(X).", 3);
    r.length_override = 2.0;
    return r;
  }();
  std::vector<Rule> b0{clause("q(a).", 101), clause("q(b).", 102)};

  KnowledgeBase kb(const char* theta_d) const {
    Policy p;
    p.beta = 0.5;
    p.theta_p = Threshold::parse("fixed:0");
    p.theta_d = Threshold::parse(theta_d);
    return KnowledgeBase(evidence.classes, b0, p);
  }
};

TEST(Demote, ContradictingEvidenceDemotes) {
  const Flip flip;
  KnowledgeBase kb = flip.kb("fixed:0");
  const StepLog s1 = kb.step(std::vector<Rule>{flip.rule, flip.evidence.rules[0]});
  EXPECT_EQ(s1.promoted, (Ids{3}));
  EXPECT_TRUE(kb.is_consolidated(3));
  const StepLog s2 = kb.step(std::vector<Rule>{flip.evidence.rules[1]});
  EXPECT_DOUBLE_EQ(kb.metrics().at(3).opt.generic, -1.0);
  EXPECT_EQ(s2.demoted, (Ids{3}));
  EXPECT_TRUE(s2.promoted.empty());
  EXPECT_FALSE(kb.is_consolidated(3));
  EXPECT_FALSE(kb.graph().rule(3).is_protected);
  // The seed background is untouched.
  EXPECT_EQ(kb.seed_background().size(), 2u);
}

TEST(Demote, MinusInfinityNeverDemotes) {
  const Flip flip;
  KnowledgeBase kb = flip.kb("fixed:-inf");
  kb.step(std::vector<Rule>{flip.rule, flip.evidence.rules[0]});
  const StepLog s2 = kb.step(std::vector<Rule>{flip.evidence.rules[1]});
  EXPECT_TRUE(s2.demoted.empty());
  EXPECT_TRUE(kb.is_consolidated(3));
}

TEST(Demote, CoverageAfterDemotionUsesTheSmallerBackground) {
  // r(X) :- p(X) covers r(a) only while p(X) :- q(X) is consolidated.
  const Flip flip;
  KnowledgeBase kb = flip.kb("fixed:0");
  kb.step(std::vector<Rule>{flip.rule, flip.evidence.rules[0]});
  Rule user = clause("r(X) :- p(X).", 4);
  Rule ev = clause("#classes + -\n#evidence +\nr(a).", 5);
  kb.step(std::vector<Rule>{user, ev});
  EXPECT_EQ(kb.graph().ancestors(5), (Ids{4}));
  kb.step(std::vector<Rule>{flip.evidence.rules[1]});
  ASSERT_FALSE(kb.is_consolidated(3));
  Rule ev2 = clause("#classes + -\n#evidence +\nr(b).", 6);
  kb.step(std::vector<Rule>{ev2});
  EXPECT_TRUE(kb.graph().ancestors(6).empty());
}

TEST(Step, ZeroArrivalsUnderCapacity) {
  KnowledgeBase kb = family_kb([] {
    Policy p = family_policy(20);
    p.theta_p = Threshold::parse("fixed:inf");
    p.theta_d = Threshold::parse("fixed:-inf");
    return p;
  }());
  const EdgeSet before = kb.graph().reduced_edges();
  const StepLog log = kb.step({});
  EXPECT_EQ(kb.graph().reduced_edges(), before);
  EXPECT_EQ(log.step, 1u);
  EXPECT_EQ(log.inserted, 0u);
  EXPECT_EQ(log.population_w, 12u);
  EXPECT_TRUE(log.forgotten.empty());
  EXPECT_TRUE(log.promoted.empty());
  EXPECT_TRUE(log.demoted.empty());
  EXPECT_EQ(log.root_support.size(), 2u);
  EXPECT_EQ(kb.steps_taken(), 1u);
}

TEST(Step, OverCapacityRecordsForgetting) {
  const auto f = load_family();
  KnowledgeBase kb(f.classes, f.background, family_policy(11));
  const StepLog log = kb.step(f.working);
  EXPECT_EQ(log.inserted, 12u);
  EXPECT_EQ(log.arrivals_examples, 5u);
  EXPECT_EQ(log.arrivals_rules, 7u);
  EXPECT_EQ(log.forgotten, (Ids{59}));
  EXPECT_EQ(log.population_w, 11u);
}

std::vector<StepLog> random_trace(std::uint64_t seed, std::size_t capacity) {
  const auto f = load_family();
  Policy p = family_policy(capacity);
  p.forget_fraction = 0.25;
  KnowledgeBase kb(f.classes, f.background, p);
  std::mt19937_64 rng(seed);
  std::vector<StepLog> logs;
  std::size_t last_population = 0;
  for (int t = 0; t < 40; ++t) {
    std::vector<Rule> batch;
    const int k = std::uniform_int_distribution<int>(0, 3)(rng);
    for (int i = 0; i < k; ++i)
      batch.push_back(f.working[std::uniform_int_distribution<std::size_t>(0, 11)(rng)]);
    logs.push_back(kb.step(batch));
    const StepLog& log = logs.back();
    bool stuck = false;
    for (const auto& w : log.warnings)
      if (w.find("OverCapacityStuck") != std::string::npos) stuck = true;
    EXPECT_TRUE(log.population_w <= capacity || stuck);
    EXPECT_EQ(log.population_w, last_population + log.inserted - log.forgotten.size());
    for (RuleId id : log.forgotten)
      EXPECT_TRUE(std::find(log.promoted.begin(), log.promoted.end(), id) == log.promoted.end());
    last_population = log.population_w;
    EXPECT_EQ(log.consolidated_count, kb.consolidated_count());
    for (RuleId id : kb.consolidated()) EXPECT_TRUE(kb.graph().contains(id));
  }
  return logs;
}

TEST(Step, CapacityAndLogConsistency) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    for (std::size_t cap : {3u, 6u, 9u}) random_trace(seed, cap);
}

TEST(Step, ReplayIsDeterministic) {
  const auto a = random_trace(9, 6);
  const auto b = random_trace(9, 6);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].forgotten, b[i].forgotten);
    EXPECT_EQ(a[i].promoted, b[i].promoted);
    EXPECT_EQ(a[i].demoted, b[i].demoted);
    EXPECT_EQ(a[i].avg_opt_w, b[i].avg_opt_w);
    EXPECT_EQ(a[i].root_support, b[i].root_support);
  }
}

TEST(Step, ForgettingSparesConsolidatedRules) {
  const auto f = load_family();
  Policy p = family_policy(4);
  p.theta_d = Threshold::parse("fixed:-inf");
  KnowledgeBase kb(f.classes, f.background, p);
  kb.ingest(f.working);
  const Ids promoted = kb.promote_pass();
  ASSERT_FALSE(promoted.empty());
  const Ids forgotten = kb.forget_step();
  for (RuleId id : promoted) {
    EXPECT_TRUE(kb.graph().contains(id));
    EXPECT_TRUE(std::find(forgotten.begin(), forgotten.end(), id) == forgotten.end());
  }
  EXPECT_EQ(kb.population(), 4u);
}

}  // namespace
}  // namespace kbc
