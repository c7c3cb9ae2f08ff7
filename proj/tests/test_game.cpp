#include <gtest/gtest.h>

#include <random>

#include "safegames/builder.hpp"
#include "safegames/game.hpp"
#include "safegames/random_games.hpp"
#include "safegames/solvers.hpp"
#include "support.hpp"

using namespace safegames;
using bdd::Bdd;
using bdd::var_t;

namespace {

// Inputs u, controllable c, one latch l. Variables: u = 0, c = 1, l = 2.
enum class Toy { kT, kAndNotC, kFollowC, kErrorU, kNoError };

SymbolicGame toy(Toy kind) {
  aiger::AigBuilder b;
  auto u = b.input("u");
  auto c = b.controllable("c");
  auto l = b.latch("l");
  aiger::Literal err = aiger::kFalse;
  switch (kind) {
    case Toy::kT:
      b.set_next(l, u);
      err = b.land(l, aiger::lit_not(c));
      break;
    case Toy::kAndNotC:
      b.set_next(l, b.land(u, aiger::lit_not(c)));
      err = b.land(l, aiger::lit_not(c));
      break;
    case Toy::kFollowC:
      b.set_next(l, c);
      err = b.land(l, aiger::lit_not(c));
      break;
    case Toy::kErrorU:
      b.set_next(l, u);
      err = u;
      break;
    case Toy::kNoError:
      b.set_next(l, u);
      break;
  }
  b.output(err, "error");
  return build_game(b.build());
}

std::vector<SymbolicGame> random_games(std::size_t count, std::uint64_t seed, RandomGameSpec spec = {}) {
  std::vector<SymbolicGame> out;
  for (const auto& c : random_corpus(count, seed, spec)) out.push_back(build_game(c));
  return out;
}

/// Random subset of latch states as a BDD over the latch variables.
Bdd random_state_set(const SymbolicGame& g, std::mt19937_64& rng) {
  auto vars = g.latch_vars();
  std::vector<bool> bits(std::size_t{1} << vars.size());
  for (std::size_t k = 0; k < bits.size(); ++k) bits[k] = rng() & 1u;
  return detail::from_truth_table(*g.manager, vars, bits);
}

}  // namespace

TEST(Game, ToyVariableLayout) {
  auto g = toy(Toy::kT);
  EXPECT_EQ(g.uncontrollable, std::vector<var_t>{0});
  EXPECT_EQ(g.controllable, std::vector<var_t>{1});
  ASSERT_EQ(g.latches.size(), 1u);
  EXPECT_EQ(g.latches[0].var, 2u);
  EXPECT_EQ(g.var_name(1), "controllable_c");
}

TEST(Game, UpreExamples) {
  auto t = toy(Toy::kT);
  auto& m = *t.manager;
  EXPECT_EQ(upre(t, m.zero()), m.zero());
  EXPECT_EQ(upre(t, m.var(2)), m.one());
  auto a = toy(Toy::kAndNotC);
  EXPECT_EQ(upre(a, a.manager->var(2)), a.manager->zero());
}

TEST(Game, CpreExamples) {
  auto t = toy(Toy::kT);
  EXPECT_EQ(cpre(t, t.manager->one()), t.manager->one());
  auto f = toy(Toy::kFollowC);
  EXPECT_EQ(cpre(f, ~f.manager->var(2)), f.manager->one());
  EXPECT_EQ(upre_star(f, f.manager->zero()), f.manager->zero());
}

TEST(Game, SolveToyGame) {
  auto t = toy(Toy::kT);
  auto& m = *t.manager;
  auto sol = solve(t);
  EXPECT_TRUE(sol.realizable);
  EXPECT_EQ(sol.winning_states, m.one());
  EXPECT_EQ(solve_states(t), m.one());
  // Enumerate the 8 valuations: winning iff not (l and not c).
  for (int k = 0; k < 8; ++k) {
    bool u = k & 1, c = k & 2, l = k & 4;
    EXPECT_EQ(sol.winning_valuations.eval({u, c, l}), !(l && !c));
  }
}

TEST(Game, ErrorOnUncontrollableInputIsLost) {
  auto g = toy(Toy::kErrorU);
  auto sol = solve(g);
  EXPECT_FALSE(sol.realizable);
  EXPECT_EQ(sol.winning_states, g.manager->zero());
  EXPECT_EQ(solve_states(g), g.manager->zero());
  std::size_t iterations = 0;
  EXPECT_EQ(losing_states(g, g.error(), &iterations), g.manager->one());
  // One step adds every state, one more confirms the fixpoint.
  EXPECT_EQ(iterations, 2u);
}

TEST(Game, NoErrorIsWon) {
  auto g = toy(Toy::kNoError);
  auto sol = solve(g);
  EXPECT_TRUE(sol.realizable);
  EXPECT_EQ(sol.winning_states, g.manager->one());
  EXPECT_EQ(sol.winning_valuations, g.manager->one());
  EXPECT_EQ(solve_states(g), g.manager->one());
}

TEST(Game, ErrorIsBuiltLazily) {
  aiger::AigBuilder b;
  auto u = b.input("u");
  auto c = b.controllable("c");
  b.output(b.lxor(u, c), "error");
  auto g = build_game(b.build());
  EXPECT_FALSE(g.error_built());
  EXPECT_EQ(g.error(), g.manager->var(0) ^ g.manager->var(1));
  EXPECT_TRUE(g.error_built());
}

TEST(Game, ExplicitVariableOrder) {
  aiger::AigBuilder b;
  auto u = b.input("u");
  auto c = b.controllable("c");
  auto l = b.latch("l");
  b.set_next(l, u);
  b.output(b.land(l, aiger::lit_not(c)), "error");
  BuildOptions opts;
  opts.order = {"l", "controllable_c", "u"};
  auto g = build_game(b.build(), opts);
  EXPECT_EQ(g.latches[0].var, 0u);
  EXPECT_EQ(g.controllable, std::vector<var_t>{1});
  EXPECT_EQ(g.uncontrollable, std::vector<var_t>{2});
  EXPECT_TRUE(solve(g).realizable);
}

TEST(Game, PredecessorDualityAndMonotonicity) {
  std::mt19937_64 rng(41);
  for (auto& g : random_games(150, 101)) {
    Bdd s = random_state_set(g, rng);
    Bdd t = s | random_state_set(g, rng);
    ASSERT_EQ(cpre(g, s), ~upre(g, ~s));
    ASSERT_TRUE(upre(g, s).implies(upre(g, t)));
    ASSERT_TRUE(cpre(g, s).implies(cpre(g, t)));
    Bdd us = upre_star(g, s), cs = cpre_star(g, s);
    ASSERT_TRUE(s.implies(us));
    ASSERT_TRUE(cs.implies(s));
    ASSERT_EQ(us, s | upre(g, us));
    ASSERT_EQ(cs, s & cpre(g, cs));
  }
}

TEST(Game, DualityWithMaterializedErrorLatch) {
  for (auto& g : random_games(200, 202)) {
    var_t out = 0;
    auto h = materialize_error_latch(g, &out);
    auto& m = *h.manager;
    Bdd bad = m.var(out);
    Bdd safe_fix = cpre_star(h, ~bad);
    Bdd bad_fix = upre_star(h, bad);
    ASSERT_EQ(safe_fix, ~bad_fix);
    // Restricted to out = 0 it is the virtual-latch result.
    Bdd at_zero = m.compose(safe_fix, {{out, m.zero()}});
    ASSERT_EQ(at_zero, solve(g, false).winning_states);
    ASSERT_EQ(at_zero, solve_states(g));
  }
}

TEST(Game, SolveAgreesWithExplicitOracle) {
  for (auto& g : random_games(300, 303)) {
    auto sol = solve(g, true);
    SolveOptions o;
    o.compute_valuations = true;
    auto ref = oracle_explicit(g, o);
    ASSERT_EQ(sol.winning_states, ref.winning_states);
    ASSERT_EQ(sol.realizable, ref.verdict == Verdict::kRealizable);
    ASSERT_EQ(sol.winning_valuations, ref.winning_valuations);
    ASSERT_EQ(solve_states(g), sol.winning_states);
  }
}

TEST(Game, ValuationsDetermineStates) {
  for (auto& g : random_games(100, 404)) {
    auto sol = solve(g, true);
    auto& m = *g.manager;
    Bdd s = m.forall_cube(m.exists_cube(sol.winning_valuations, g.c_cube()), g.u_cube());
    ASSERT_EQ(s, sol.winning_states);
  }
}

TEST(Game, SemanticConeMatchesBruteForceDependencies) {
  std::mt19937_64 rng(43);
  for (auto& g : random_games(100, 505)) {
    auto& m = *g.manager;
    const std::size_t n = m.var_count();
    auto depends = [&](const Bdd& f, var_t v) {
      for (std::uint64_t k = 0; k < (std::uint64_t{1} << n); ++k) {
        auto x = testsupport::assignment(k, n);
        auto y = x;
        y[v] = !y[v];
        if (f.eval(x) != f.eval(y)) return true;
      }
      return false;
    };
    std::set<var_t> expected;
    std::vector<var_t> stack;
    for (const auto& l : g.latches)
      if (depends(g.error(), l.var)) stack.push_back(l.var);
    while (!stack.empty()) {
      var_t v = stack.back();
      stack.pop_back();
      if (!expected.insert(v).second) continue;
      const auto& next = g.latches[g.latch_index(v)].next;
      for (const auto& l : g.latches)
        if (depends(next, l.var)) stack.push_back(l.var);
    }
    auto cone = cone_semantic(g, g.error());
    ASSERT_EQ(std::set<var_t>(cone.begin(), cone.end()), expected);
    (void)rng;
  }
}

TEST(Game, SyntacticConeContainsSemanticCone) {
  for (const auto& c : random_corpus(100, 606)) {
    auto g = build_game(c);
    auto syn = cone_syntactic(c, c.error());
    std::set<std::uint32_t> syn_set(syn.begin(), syn.end());
    for (var_t v : cone_semantic(g, g.error())) {
      auto lit = g.latches[g.latch_index(v)].lit;
      ASSERT_TRUE(syn_set.count(aiger::lit_var(lit)));
    }
  }
}

TEST(Game, CofactoredGameOnOverapproximationKeepsSolution) {
  std::mt19937_64 rng(47);
  for (auto& g : random_games(200, 707)) {
    auto& m = *g.manager;
    auto sol = solve(g, true);
    // Random cube over all variables, kept inside the safe valuations.
    std::vector<Bdd> lits;
    for (var_t v = 0; v < m.var_count(); ++v) {
      int r = static_cast<int>(rng() % 3);
      if (r == 1) lits.push_back(m.var(v));
      if (r == 2) lits.push_back(m.nvar(v));
    }
    Bdd cube = m.one();
    for (const auto& l : lits) cube &= l;
    Bdd lambda = sol.winning_valuations | (cube & ~g.error());
    SymbolicGame h = restrict_latches(g, cone_semantic(g, lambda), ~lambda);
    cofactor_transitions(h, lambda);
    auto modified = solve_with_error(h, ~lambda, true);
    ASSERT_EQ(modified.winning_valuations, sol.winning_valuations);
    ASSERT_EQ(modified.winning_states, sol.winning_states);
  }
}

TEST(Game, CloneGamePreservesSolution) {
  for (auto& g : random_games(40, 808)) {
    auto copy = clone_game(g, std::make_shared<bdd::Manager>(0));
    auto a = solve(g, true), b = solve(copy, true);
    EXPECT_EQ(a.realizable, b.realizable);
    EXPECT_EQ(copy.manager->transfer(b.winning_states, *g.manager), a.winning_states);
  }
}

TEST(Game, RebuildProducesIndependentGame) {
  auto g = toy(Toy::kT);
  ASSERT_TRUE(static_cast<bool>(g.rebuild));
  auto h = g.rebuild(bdd::ManagerOptions{});
  EXPECT_NE(h.manager.get(), g.manager.get());
  EXPECT_EQ(solve(h).realizable, solve(g).realizable);
}
