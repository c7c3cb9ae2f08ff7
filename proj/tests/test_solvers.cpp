#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "safegames/benchgen.hpp"
#include "safegames/builder.hpp"
#include "safegames/random_games.hpp"
#include "safegames/solvers.hpp"

using namespace safegames;
using bdd::Bdd;

namespace {

using SolverFn = SolveOutcome (*)(const SymbolicGame&, const SolveOptions&);

const std::vector<std::pair<const char*, SolverFn>> kCompositional = {
    {"comp1", &comp_1}, {"comp2", &comp_2}, {"comp3", &comp_3}};

/// Two copies of a one-latch game with separate inputs; the error is the
/// disjunction of the two local errors.
aiger::AigCircuit independent_pair() {
  aiger::AigBuilder b;
  std::vector<aiger::Literal> errs;
  for (int i = 0; i < 2; ++i) {
    auto u = b.input("u" + std::to_string(i));
    auto c = b.controllable("c" + std::to_string(i));
    auto l = b.latch("l" + std::to_string(i));
    b.set_next(l, u);
    errs.push_back(b.land(l, aiger::lit_not(c)));
  }
  b.output(b.lor_all(errs), "error");
  return b.build();
}

/// Two sub-specifications competing for one controllable input: the
/// environment's u decides which of them c must serve.
aiger::AigCircuit shared_control() {
  aiger::AigBuilder b;
  auto u = b.input("u");
  auto c = b.controllable("c");
  auto l = b.latch("l");
  b.set_next(l, u);
  auto e1 = b.land(l, aiger::lit_not(c));
  auto e2 = b.land(aiger::lit_not(l), c);
  b.output(b.lor(e1, e2), "error");
  return b.build();
}

}  // namespace

TEST(Solvers, NamesAndExitCodes) {
  for (auto a : {Algorithm::kClassical, Algorithm::kComp1, Algorithm::kComp2, Algorithm::kComp3, Algorithm::kOracle,
                 Algorithm::kPortfolio})
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
  EXPECT_THROW(parse_algorithm("comp4"), std::invalid_argument);
  EXPECT_EQ(exit_code(Verdict::kRealizable), 10);
  EXPECT_EQ(exit_code(Verdict::kUnrealizable), 20);
  EXPECT_EQ(exit_code(Verdict::kTimeout), 30);
  EXPECT_EQ(exit_code(Verdict::kError), 1);
  EXPECT_EQ(parse_verdict(to_string(Verdict::kTimeout)), Verdict::kTimeout);
}

TEST(Solvers, FromTruthTableMatchesBits) {
  bdd::Manager m(4);
  std::vector<bdd::var_t> vars{3, 0, 2};
  std::vector<bool> bits{true, false, false, true, true, true, false, false};
  Bdd f = detail::from_truth_table(m, vars, bits);
  for (std::size_t k = 0; k < 8; ++k) {
    std::vector<bool> x(4);
    x[3] = (k >> 2) & 1u;
    x[0] = (k >> 1) & 1u;
    x[2] = k & 1u;
    EXPECT_EQ(f.eval(x), bits[k]);
  }
}

TEST(Solvers, OracleGuard) {
  auto g = build_game(gen_mult(MultSpec{3}));
  SolveOptions o;
  o.oracle_max_vars = 10;
  EXPECT_THROW(oracle_explicit(g, o), std::length_error);
}

TEST(Solvers, AllAlgorithmsAgreeOnRandomGames) {
  SolveOptions o;
  o.early_exit = false;
  o.compute_valuations = true;
  std::size_t decomposable = 0, unrealizable = 0;
  for (const auto& c : random_corpus(250, 11)) {
    auto g = build_game(c);
    auto ref = classical(g, o);
    auto oracle = oracle_explicit(g, o);
    ASSERT_EQ(ref.winning_states, oracle.winning_states);
    ASSERT_EQ(ref.winning_valuations, oracle.winning_valuations);
    if (ref.verdict == Verdict::kUnrealizable) ++unrealizable;
    for (const auto& [name, fn] : kCompositional) {
      auto r = fn(g, o);
      if (r.stats.decomposable && name == std::string("comp1")) ++decomposable;
      ASSERT_EQ(r.verdict, ref.verdict) << name;
      ASSERT_EQ(r.winning_states, ref.winning_states) << name;
      ASSERT_EQ(r.winning_valuations, ref.winning_valuations) << name;
    }
  }
  EXPECT_GT(decomposable, 80u);
  EXPECT_GT(unrealizable, 20u);
}

TEST(Solvers, AgreementWithoutIndependenceShortcut) {
  SolveOptions o;
  o.early_exit = false;
  o.independence_shortcut = false;
  for (const auto& c : random_corpus(150, 12)) {
    auto g = build_game(c);
    ASSERT_EQ(comp_1(g, o).winning_states, classical(g, o).winning_states);
  }
}

TEST(Solvers, DeepDecompositionAgrees) {
  SolveOptions o;
  o.early_exit = false;
  o.decompose.deep = true;
  for (const auto& c : random_corpus(150, 13)) {
    auto g = build_game(c);
    auto ref = classical(g, o);
    for (const auto& [name, fn] : kCompositional) ASSERT_EQ(fn(g, o).winning_states, ref.winning_states) << name;
  }
}

TEST(Solvers, EarlyExitIsSound) {
  std::size_t exits = 0;
  for (const auto& c : random_corpus(250, 14)) {
    auto g = build_game(c);
    auto ref = oracle_explicit(g);
    for (const auto& [name, fn] : kCompositional) {
      auto r = fn(g, SolveOptions{});
      ASSERT_EQ(r.verdict, ref.verdict) << name;
      if (r.stats.early_exit) {
        ++exits;
        ASSERT_EQ(ref.verdict, Verdict::kUnrealizable);
      }
    }
  }
  EXPECT_GT(exits, 0u);
}

TEST(Solvers, IndependentSubgamesUseShortcut) {
  auto g = build_game(independent_pair());
  auto r = comp_1(g);
  EXPECT_TRUE(r.stats.independent);
  EXPECT_EQ(r.stats.subgames, 2u);
  EXPECT_EQ(r.verdict, Verdict::kRealizable);
  EXPECT_EQ(r.winning_states, g.manager->one());
  auto s = build_game(shared_control());
  auto rs = comp_1(s);
  EXPECT_FALSE(rs.stats.independent);
  EXPECT_EQ(rs.winning_states, classical(s).winning_states);
}

TEST(Solvers, Comp2MergeOrderIsDeterministic) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto c = random_game(seed * 13 + 3);
    SolveOptions o;
    o.early_exit = false;
    auto a = comp_2(build_game(c), o);
    auto b = comp_2(build_game(c), o);
    ASSERT_EQ(a.stats.merges_done, b.stats.merges_done);
    if (a.stats.decomposable && !a.stats.early_exit) {
      ASSERT_EQ(a.stats.merges, a.stats.subgames - 1);
    }
  }
}

TEST(Solvers, Comp2WeightsChangeOrderNotResult) {
  auto g = build_game(gen_mult(MultSpec{2}));
  SolveOptions o;
  o.early_exit = false;
  auto base = comp_2(g, o);
  o.weights = ScoreWeights{1, -1, 1};
  auto other = comp_2(g, o);
  EXPECT_EQ(base.winning_states, other.winning_states);
  EXPECT_EQ(base.stats.merges, other.stats.merges);
}

TEST(Solvers, Comp3InvariantHolds) {
  for (const auto& c : random_corpus(200, 15)) {
    auto g = build_game(c);
    SolveOptions o;
    o.early_exit = false;
    o.reference_states = classical(g).winning_states;
    SolveOutcome r;
    ASSERT_NO_THROW(r = comp_3(g, o));
    ASSERT_EQ(r.winning_states, *o.reference_states);
  }
}

TEST(Solvers, Comp3IndependentSubgamesNeedNoResolve) {
  auto g = build_game(independent_pair());
  auto r = comp_3(g);
  EXPECT_EQ(r.stats.resolves, 0u);
  EXPECT_EQ(r.stats.iterations, 3u);  // one step per sub-game fixpoint, one loop step
  EXPECT_EQ(r.winning_states, g.manager->one());
}

TEST(Solvers, NoErrorIsWonImmediately) {
  aiger::AigBuilder b;
  auto u = b.input("u");
  auto l = b.latch("l");
  b.set_next(l, u);
  b.controllable("c");
  b.output(aiger::kFalse, "error");
  auto g = build_game(b.build());
  for (auto a : {Algorithm::kClassical, Algorithm::kComp1, Algorithm::kComp2, Algorithm::kComp3}) {
    auto r = run_algorithm(g, a);
    EXPECT_EQ(r.verdict, Verdict::kRealizable);
    EXPECT_EQ(r.winning_states, g.manager->one());
    EXPECT_EQ(r.stats.iterations, 1u);
  }
}

TEST(Solvers, MultiplicationGamesAreRealizable) {
  for (int n = 1; n <= 3; ++n) {
    auto g = build_game(gen_mult(MultSpec{n}));
    for (auto a : {Algorithm::kClassical, Algorithm::kComp1, Algorithm::kComp2, Algorithm::kComp3}) {
      auto r = run_algorithm(g, a);
      EXPECT_EQ(r.verdict, Verdict::kRealizable) << to_string(a) << " n=" << n;
    }
  }
}

TEST(Solvers, NodeLimitBecomesTimeout) {
  SolveOptions o;
  o.manager.max_nodes = 200;
  BuildOptions bo;
  bo.manager = o.manager;
  auto g = build_game(std::make_shared<const aiger::AigCircuit>(gen_mult(MultSpec{4})),
                      aiger::classify_inputs(gen_mult(MultSpec{4})), bo);
  auto r = run_algorithm(g, Algorithm::kClassical, o);
  EXPECT_EQ(r.verdict, Verdict::kTimeout);
  EXPECT_FALSE(r.decided());
}

TEST(Solvers, ExpiredDeadlineBecomesTimeout) {
  auto g = build_game(gen_mult(MultSpec{5}));
  SolveOptions o;
  o.deadline = std::chrono::steady_clock::now();
  auto r = run_algorithm(g, Algorithm::kClassical, o);
  EXPECT_EQ(r.verdict, Verdict::kTimeout);
}

TEST(Solvers, PortfolioZeroTimeout) {
  auto g = build_game(gen_mult(MultSpec{2}));
  EXPECT_EQ(portfolio(g, SolveOptions{}, 0).verdict, Verdict::kTimeout);
}

TEST(Solvers, PortfolioSingleMemberMatchesMember) {
  for (const auto& c : random_corpus(30, 16)) {
    auto g = build_game(c);
    SolveOptions o;
    o.portfolio = {Algorithm::kClassical};
    auto p = portfolio(g, o, 30);
    auto r = classical(g);
    ASSERT_EQ(p.verdict, r.verdict);
    ASSERT_EQ(p.stats.winner, "classical");
    // The winner's states live in its private manager.
    ASSERT_EQ(p.manager->var_count(), g.manager->var_count());
    ASSERT_EQ(p.manager->transfer(p.winning_states, *g.manager), r.winning_states);
  }
}

TEST(Solvers, PortfolioOnGamesWithoutCircuit) {
  auto g = build_game(shared_control());
  auto copy = clone_game(g, std::make_shared<bdd::Manager>(0));
  ASSERT_FALSE(static_cast<bool>(copy.rebuild));
  auto p = portfolio(copy, SolveOptions{}, 30);
  EXPECT_EQ(p.verdict, classical(g).verdict);
}

TEST(Solvers, PortfolioAgreesOnRandomGames) {
  for (const auto& c : random_corpus(40, 17)) {
    auto g = build_game(c);
    auto p = run_algorithm(g, Algorithm::kPortfolio);
    ASSERT_EQ(p.verdict, classical(g).verdict);
    ASSERT_FALSE(p.stats.winner.empty());
  }
}

TEST(Solvers, PortfolioStopsOnExternalFlag) {
  auto g = build_game(gen_mult(MultSpec{7}));
  SolveOptions o;
  o.portfolio = {Algorithm::kClassical};
  std::atomic<bool> stop{false};
  o.stop = &stop;
  std::thread t([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
    stop = true;
  });
  auto start = std::chrono::steady_clock::now();
  auto r = portfolio(g, o, 120);
  t.join();
  EXPECT_EQ(r.verdict, Verdict::kTimeout);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(20));
}
