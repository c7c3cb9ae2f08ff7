#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "safegames/builder.hpp"
#include "safegames/decomp.hpp"
#include "safegames/random_games.hpp"
#include "safegames/solvers.hpp"
#include "support.hpp"

using namespace safegames;
using bdd::Bdd;

namespace {

Bdd disjunction(const Decomposition& d, bdd::Manager& m) {
  Bdd acc = m.zero();
  for (const auto& p : d.parts) acc |= p.error;
  return acc;
}

/// v1 = x1 & !v2 with v2 the 3-input AND of x2, !x3, x4.
aiger::AigCircuit four_input_example() {
  aiger::AigBuilder b;
  auto x1 = b.input("x1"), x2 = b.input("x2"), x3 = b.input("x3"), x4 = b.input("x4");
  auto v2 = b.land(x2, b.land(aiger::lit_not(x3), x4));
  b.output(b.land(x1, aiger::lit_not(v2)), "error");
  return b.build();
}

}  // namespace

TEST(Decomp, MinputAndCollectsMaximalTree) {
  auto c = four_input_example();
  AigView view(c);
  auto root = aiger::lit_var(c.error());
  auto top = get_minput_and(view, root);
  EXPECT_EQ(top.pos, (std::set<std::uint32_t>{1}));
  ASSERT_EQ(top.neg.size(), 1u);
  auto inner = get_minput_and(view, *top.neg.begin());
  EXPECT_EQ(inner.pos, (std::set<std::uint32_t>{2, 4}));
  EXPECT_EQ(inner.neg, (std::set<std::uint32_t>{3}));
  EXPECT_EQ(inner.size(), 3u);
  // A leaf is its own tree.
  EXPECT_EQ(get_minput_and(view, 1).pos, (std::set<std::uint32_t>{1}));
}

TEST(Decomp, FourInputExampleGivesThreeParts) {
  auto c = four_input_example();
  auto g = build_game(c);
  auto d = decompose_game(g);
  auto& m = *g.manager;
  ASSERT_EQ(d.parts.size(), 3u);
  EXPECT_EQ(disjunction(d, m), g.error());
  std::vector<Bdd> expected{m.var(0) & m.nvar(1), m.var(0) & m.var(2), m.var(0) & m.nvar(3)};
  for (const auto& e : expected) {
    auto hits = std::count_if(d.parts.begin(), d.parts.end(), [&](const Part& p) { return p.error == e; });
    EXPECT_EQ(hits, 1);
  }
}

TEST(Decomp, PureConjunctionIsNotSplit) {
  aiger::AigBuilder b;
  auto x1 = b.input("x1"), x2 = b.input("x2");
  b.output(b.land(x1, x2), "error");
  auto g = build_game(b.build());
  auto d = decompose_game(g);
  ASSERT_EQ(d.parts.size(), 1u);
  EXPECT_FALSE(d.decomposable());
  EXPECT_EQ(d.parts[0].error, g.error());
}

TEST(Decomp, LeafErrorIsSingleton) {
  aiger::AigBuilder b;
  auto x = b.input("x");
  b.output(aiger::lit_not(x), "error");
  auto parts = decompose(b.build(), aiger::lit_not(x));
  ASSERT_EQ(parts.size(), 1u);
  EXPECT_EQ(parts[0], Conjunction{aiger::lit_not(x)});
}

TEST(Decomp, AssumptionGuaranteeShape) {
  // error = A1 & A2 & !(G1 & G2 & G3): the environment respects its
  // assumptions and some guarantee fails.
  aiger::AigBuilder b;
  std::vector<aiger::Literal> u, c;
  for (int i = 0; i < 4; ++i) u.push_back(b.input("u" + std::to_string(i)));
  for (int i = 0; i < 3; ++i) c.push_back(b.controllable("c" + std::to_string(i)));
  auto l = b.latch("l");
  b.set_next(l, u[0]);
  auto a1 = b.lor(u[0], u[1]);
  auto a2 = b.lor(aiger::lit_not(u[2]), l);
  std::vector<aiger::Literal> guarantees{b.lor(c[0], u[3]), b.lxnor(c[1], u[1]), b.lor(aiger::lit_not(c[2]), l)};
  auto err = b.land(b.land(a1, a2), aiger::lit_not(b.land_all(guarantees)));
  b.output(err, "error");
  auto g = build_game(b.build());
  auto d = decompose_game(g);
  ASSERT_GE(d.parts.size(), 3u);
  EXPECT_EQ(disjunction(d, *g.manager), g.error());
  for (const auto& p : d.parts) EXPECT_TRUE(p.error.implies(g.error()));
}

TEST(Decomp, ArgmaxTieBreakPicksLowestVertex) {
  // x & !(a & b) & !(c & d): both negated vertices have two inputs.
  aiger::AigBuilder b;
  auto x = b.input("x"), a = b.input("a"), bb = b.input("b"), c = b.input("c"), d = b.input("d");
  auto left = b.land(a, bb), right = b.land(c, d);
  auto err = b.land(x, b.land(aiger::lit_not(left), aiger::lit_not(right)));
  b.output(err, "error");
  auto circuit = b.build();
  auto parts = decompose(circuit, err);
  ASSERT_EQ(parts.size(), 2u);
  // The vertex with the smaller id (left) is split; !right stays in every part.
  for (const auto& p : parts) EXPECT_NE(std::find(p.begin(), p.end(), aiger::lit_not(right)), p.end());
}

TEST(Decomp, DeepModeSplitsFurtherWithinCap) {
  // x & !(y & !(z & !(p & q)))
  aiger::AigBuilder b;
  auto x = b.input("x"), y = b.input("y"), z = b.input("z"), p = b.input("p"), q = b.input("q");
  auto inner = b.land(z, aiger::lit_not(b.land(p, q)));
  auto err = b.land(x, aiger::lit_not(b.land(y, aiger::lit_not(inner))));
  b.output(err, "error");
  auto circuit = b.build();
  auto g = build_game(circuit);
  EXPECT_EQ(decompose(circuit, err).size(), 2u);
  DecomposeOptions deep;
  deep.deep = true;
  auto d = decompose_game(g, deep);
  EXPECT_EQ(d.parts.size(), 3u);
  EXPECT_EQ(disjunction(d, *g.manager), g.error());
  deep.cap = 2;
  EXPECT_EQ(decompose(circuit, err, deep).size(), 2u);
}

TEST(Decomp, ConstantMembersAreSimplified) {
  Conjunction c{aiger::kTrue, 4, 2, 4};
  EXPECT_TRUE(detail::simplify_conjunction(c));
  EXPECT_EQ(c, (Conjunction{2, 4}));
  Conjunction f{2, aiger::kFalse};
  EXPECT_FALSE(detail::simplify_conjunction(f));
  Conjunction contradiction{2, 3};
  EXPECT_FALSE(detail::simplify_conjunction(contradiction));
  auto parts = detail::finish_parts({{2, 3}, {4}, {4}});
  EXPECT_EQ(parts, (std::vector<Conjunction>{{4}}));
  EXPECT_EQ(detail::finish_parts({{2, 3}}), (std::vector<Conjunction>{{aiger::kFalse}}));
}

TEST(Decomp, DisjunctionEqualsErrorOnRandomCircuits) {
  std::mt19937_64 rng(61);
  std::size_t split = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto c = random_game(seed * 7919 + 1);
    auto g = build_game(c);
    for (bool deep : {false, true}) {
      DecomposeOptions o;
      o.deep = deep;
      auto d = decompose_game(g, o);
      ASSERT_EQ(disjunction(d, *g.manager), g.error()) << "seed " << seed;
      ASSERT_LE(d.parts.size(), deep ? o.cap : d.parts.size());
      if (d.decomposable()) ++split;
    }
  }
  for (int round = 0; round < 200; ++round) {
    auto c = testsupport::random_compact_circuit(rng, 6, 3, 30, 1);
    auto g = build_game(c);
    DecomposeOptions o;
    o.deep = round % 2 == 1;
    ASSERT_EQ(disjunction(decompose_game(g, o), *g.manager), g.error());
  }
  EXPECT_GT(split, 100u);
}

TEST(Decomp, PartCircuitEncodesPart) {
  for (std::uint64_t seed = 1; seed < 60; ++seed) {
    auto c = random_game(seed);
    auto g = build_game(c);
    auto conjs = decompose(c, c.error());
    for (const auto& conj : conjs) {
      auto pc = part_circuit(c, conj);
      auto reparsed = aiger::parse(aiger::write_ascii(pc));
      auto h = build_game(reparsed);
      ASSERT_EQ(h.manager->transfer(h.error(), *g.manager), g.encoder->encode_conjunction(conj));
    }
  }
}

TEST(Decomp, SubgameProperties) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    auto g = build_game(random_game(seed + 1000));
    auto empty = make_subgame(g, g.manager->zero());
    EXPECT_TRUE(empty.game.latches.empty());
    EXPECT_TRUE(solve(empty.game).realizable);
    auto whole = make_subgame(g, g.error());
    EXPECT_EQ(solve(whole.game, false).winning_states, solve(g, false).winning_states);
    for (const auto& p : decompose_game(g).parts) {
      auto sub = make_subgame(g, p.error);
      ASSERT_LE(sub.game.latches.size(), g.latches.size());
      auto cone = cone_semantic(g, p.error);
      ASSERT_EQ(sub.game.latches.size(), cone.size());
      // Transition functions are shared with the parent game.
      for (const auto& l : sub.game.latches) ASSERT_EQ(l.next, g.latches[g.latch_index(l.var)].next);
    }
  }
}

TEST(Decomp, WinningValuationsShrinkUnderComposition) {
  std::size_t checked = 0, early = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    auto g = build_game(random_game(seed * 31 + 5));
    auto d = decompose_game(g);
    if (!d.decomposable()) continue;
    ++checked;
    auto full = solve(g, true);
    for (const auto& p : d.parts) {
      auto sub = make_subgame(g, p.error);
      auto local = solve(sub.game, true);
      ASSERT_TRUE(full.winning_valuations.implies(local.winning_valuations)) << "seed " << seed;
      ASSERT_TRUE(full.winning_states.implies(local.winning_states));
      if (!local.realizable) {
        ++early;
        ASSERT_EQ(oracle_explicit(g).verdict, Verdict::kUnrealizable);
      }
    }
  }
  EXPECT_GT(checked, 50u);
  EXPECT_GT(early, 0u);
}
