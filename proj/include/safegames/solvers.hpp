#pragma once

// Realizability procedures: the classical backward fixpoint, three
// compositional procedures that first solve the sub-games of a decomposed
// error function, an explicit-state reference solver, and a portfolio runner.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "safegames/decomp.hpp"
#include "safegames/game.hpp"

namespace safegames {

enum class Verdict { kRealizable, kUnrealizable, kTimeout, kError };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kRealizable: return "REALIZABLE";
    case Verdict::kUnrealizable: return "UNREALIZABLE";
    case Verdict::kTimeout: return "TIMEOUT";
    case Verdict::kError: return "ERROR";
  }
  return "ERROR";
}

inline Verdict parse_verdict(std::string_view s) {
  if (s == "REALIZABLE") return Verdict::kRealizable;
  if (s == "UNREALIZABLE") return Verdict::kUnrealizable;
  if (s == "TIMEOUT") return Verdict::kTimeout;
  if (s == "ERROR") return Verdict::kError;
  throw std::invalid_argument("unknown verdict " + std::string(s));
}

/// Process exit codes used by the command line tool.
inline int exit_code(Verdict v) {
  switch (v) {
    case Verdict::kRealizable: return 10;
    case Verdict::kUnrealizable: return 20;
    case Verdict::kTimeout: return 30;
    case Verdict::kError: return 1;
  }
  return 1;
}

enum class Algorithm { kClassical, kComp1, kComp2, kComp3, kOracle, kPortfolio };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kClassical: return "classical";
    case Algorithm::kComp1: return "comp1";
    case Algorithm::kComp2: return "comp2";
    case Algorithm::kComp3: return "comp3";
    case Algorithm::kOracle: return "oracle";
    case Algorithm::kPortfolio: return "portfolio";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  for (auto a : {Algorithm::kClassical, Algorithm::kComp1, Algorithm::kComp2, Algorithm::kComp3,
                 Algorithm::kOracle, Algorithm::kPortfolio})
    if (to_string(a) == s) return a;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

struct ScoreWeights {
  long long alpha = -2;
  long long beta = 1;
  long long gamma = -1;
};

struct SolveOptions {
  /// Report UNREALIZABLE as soon as some sub-game loses from its initial
  /// state. When set, winning_states is left unset on such exits.
  bool early_exit = true;
  /// Also compute the winning valuations W(L, X_u, X_c).
  bool compute_valuations = false;
  ScoreWeights weights;
  DecomposeOptions decompose;
  /// comp1 only: when the sub-games share no controllable input, conjoin
  /// their winning states instead of solving the aggregated game.
  bool independence_shortcut = true;
  /// comp3 only: winning states of the whole game, used to assert the loop
  /// invariant at every iteration.
  std::optional<Bdd> reference_states;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  const std::atomic<bool>* stop = nullptr;
  /// Variable guard for the explicit-state solver.
  std::size_t oracle_max_vars = 22;
  /// Members of a portfolio run.
  std::vector<Algorithm> portfolio = {Algorithm::kClassical, Algorithm::kComp1, Algorithm::kComp2,
                                      Algorithm::kComp3};
  bdd::ManagerOptions manager;
};

struct SolveStats {
  std::size_t iterations = 0;
  std::size_t subgames = 0;
  std::size_t resolves = 0;
  std::size_t merges = 0;
  bool decomposable = false;
  bool independent = false;
  bool early_exit = false;
  std::size_t peak_nodes = 0;
  double time_ms = 0;
  std::map<std::string, double> phase_ms;
  /// comp2: member sets of each merged pair, in merge order.
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> merges_done;
  /// portfolio: algorithm whose result was taken.
  std::string winner;
};

struct SolveOutcome {
  // Keeps the manager of the BDDs below alive.
  std::shared_ptr<Manager> manager;
  Verdict verdict = Verdict::kError;
  Bdd winning_states;
  Bdd winning_valuations;
  SolveStats stats;
  std::string algorithm;
  std::string message;

  [[nodiscard]] bool decided() const {
    return verdict == Verdict::kRealizable || verdict == Verdict::kUnrealizable;
  }
};

namespace detail {

class PhaseTimer {
 public:
  PhaseTimer(SolveStats& stats, std::string name)
      : stats_(stats), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~PhaseTimer() {
    stats_.phase_ms[name_] +=
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  SolveStats& stats_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

inline SolveOutcome make_outcome(const SymbolicGame& g, std::string_view algorithm) {
  SolveOutcome out;
  out.manager = g.manager;
  out.algorithm = std::string(algorithm);
  return out;
}

inline void set_verdict_from_states(SolveOutcome& out) {
  out.verdict = out.winning_states.eval_all_false() ? Verdict::kRealizable : Verdict::kUnrealizable;
}

/// Controllable inputs a sub-game can observe through its error function
/// and the transition functions of its latches.
inline std::vector<var_t> controllable_support(const SymbolicGame& g, const SubGame& sub) {
  std::set<var_t> ctrl(g.controllable.begin(), g.controllable.end());
  std::set<var_t> out;
  for (var_t v : sub.game.error().support())
    if (ctrl.count(v)) out.insert(v);
  for (const auto& l : sub.game.latches)
    for (var_t v : l.next.support())
      if (ctrl.count(v)) out.insert(v);
  return {out.begin(), out.end()};
}

inline bool pairwise_disjoint(const std::vector<std::vector<var_t>>& sets) {
  std::set<var_t> seen;
  for (const auto& s : sets)
    for (var_t v : s)
      if (!seen.insert(v).second) return false;
  return true;
}

/// Solves G restricted to cone(care) with transitions cofactored by care and
/// error not(care).
inline GameSolution solve_aggregated(const SymbolicGame& g, const Bdd& care, bool valuations) {
  SymbolicGame h = restrict_latches(g, cone_semantic(g, care), ~care);
  cofactor_transitions(h, care);
  return solve_with_error(h, h.error(), valuations);
}

inline std::size_t intersection_size(const std::vector<var_t>& a, const std::vector<var_t>& b) {
  std::vector<var_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out.size();
}

inline std::size_t union_size(const std::vector<var_t>& a, const std::vector<var_t>& b) {
  std::vector<var_t> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out.size();
}

}  // namespace detail

inline SolveOutcome classical(const SymbolicGame& g, const SolveOptions& opts = {}) {
  SolveOutcome out = detail::make_outcome(g, "classical");
  detail::PhaseTimer t(out.stats, "global");
  auto sol = solve(g, opts.compute_valuations);
  out.winning_states = sol.winning_states;
  out.winning_valuations = sol.winning_valuations;
  out.stats.iterations = sol.iterations;
  out.verdict = sol.realizable ? Verdict::kRealizable : Verdict::kUnrealizable;
  return out;
}

/// Global aggregation: conjoin the sub-game winning valuations and solve the
/// game of staying inside the conjunction.
inline SolveOutcome comp_1(const SymbolicGame& g, const SolveOptions& opts = {}) {
  SolveOutcome out = detail::make_outcome(g, "comp1");
  Decomposition d;
  {
    detail::PhaseTimer t(out.stats, "decompose");
    d = decompose_game(g, opts.decompose);
  }
  out.stats.subgames = d.parts.size();
  out.stats.decomposable = d.decomposable();
  if (!d.decomposable()) {
    auto c = classical(g, opts);
    c.algorithm = out.algorithm;
    c.stats.subgames = out.stats.subgames;
    c.stats.phase_ms.insert(out.stats.phase_ms.begin(), out.stats.phase_ms.end());
    return c;
  }

  // Decide up front whether the shortcut applies, so that the sub-game
  // valuations are only built when they are needed.
  std::vector<SubGame> subs;
  std::vector<std::vector<var_t>> ctrl;
  for (std::size_t i = 0; i < d.parts.size(); ++i) {
    subs.push_back(make_subgame(g, d.parts[i].error, i));
    ctrl.push_back(detail::controllable_support(g, subs.back()));
  }
  bool independent = opts.independence_shortcut && detail::pairwise_disjoint(ctrl);
  out.stats.independent = independent;
  bool need_w = !independent || opts.compute_valuations;

  std::vector<Bdd> ws, ss;
  {
    detail::PhaseTimer t(out.stats, "subgames");
    for (auto& sub : subs) {
      auto sol = solve(sub.game, need_w);
      out.stats.iterations += sol.iterations;
      if (!sol.realizable && opts.early_exit) {
        out.verdict = Verdict::kUnrealizable;
        out.stats.early_exit = true;
        return out;
      }
      ws.push_back(sol.winning_valuations);
      ss.push_back(sol.winning_states);
    }
  }

  detail::PhaseTimer t(out.stats, "global");
  if (independent) {
    Bdd s = g.manager->one();
    for (const auto& si : ss) s &= si;
    out.winning_states = s;
    if (opts.compute_valuations) {
      Bdd w = g.manager->one();
      for (const auto& wi : ws) w &= wi;
      out.winning_valuations = w;
    }
    detail::set_verdict_from_states(out);
    return out;
  }

  Bdd lambda = g.manager->one();
  for (const auto& wi : ws) {
    lambda &= wi;
    if (lambda.is_false()) break;
  }
  if (lambda.is_false()) {
    out.winning_states = g.manager->zero();
    if (opts.compute_valuations) out.winning_valuations = g.manager->zero();
    out.verdict = Verdict::kUnrealizable;
    return out;
  }
  auto sol = detail::solve_aggregated(g, lambda, opts.compute_valuations);
  out.stats.iterations += sol.iterations;
  out.winning_states = sol.winning_states;
  out.winning_valuations = sol.winning_valuations;
  detail::set_verdict_from_states(out);
  return out;
}

/// Incremental aggregation: repeatedly merge the best-scoring pair of
/// solved sub-games until one remains.
inline SolveOutcome comp_2(const SymbolicGame& g, const SolveOptions& opts = {}) {
  SolveOutcome out = detail::make_outcome(g, "comp2");
  Decomposition d;
  {
    detail::PhaseTimer t(out.stats, "decompose");
    d = decompose_game(g, opts.decompose);
  }
  out.stats.subgames = d.parts.size();
  out.stats.decomposable = d.decomposable();
  if (!d.decomposable()) {
    auto c = classical(g, opts);
    c.algorithm = out.algorithm;
    c.stats.subgames = out.stats.subgames;
    c.stats.phase_ms.insert(out.stats.phase_ms.begin(), out.stats.phase_ms.end());
    return c;
  }

  struct Entry {
    std::size_t id;
    Bdd w;
    Bdd s;
    std::vector<var_t> cone;
    std::vector<std::size_t> members;
  };
  std::vector<Entry> pool;
  std::size_t next_id = 0;
  {
    detail::PhaseTimer t(out.stats, "subgames");
    for (std::size_t i = 0; i < d.parts.size(); ++i) {
      auto sub = make_subgame(g, d.parts[i].error, i);
      auto sol = solve(sub.game, true);
      out.stats.iterations += sol.iterations;
      if (!sol.realizable && opts.early_exit) {
        out.verdict = Verdict::kUnrealizable;
        out.stats.early_exit = true;
        return out;
      }
      pool.push_back(Entry{next_id++, sol.winning_valuations, sol.winning_states,
                           cone_semantic(g, sol.winning_valuations), {i}});
    }
  }

  detail::PhaseTimer t(out.stats, "merge");
  std::map<std::pair<std::size_t, std::size_t>, long long> scores;
  const auto& wt = opts.weights;
  while (pool.size() > 1) {
    std::size_t best_i = 0, best_j = 1;
    long long best = 0;
    bool have = false;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      for (std::size_t j = i + 1; j < pool.size(); ++j) {
        auto key = std::make_pair(pool[i].id, pool[j].id);
        auto it = scores.find(key);
        if (it == scores.end()) {
          g.manager->poll();
          Bdd both = pool[i].w & pool[j].w;
          long long sc = wt.alpha * static_cast<long long>(both.node_count()) +
                         wt.beta * static_cast<long long>(detail::intersection_size(pool[i].cone, pool[j].cone)) +
                         wt.gamma * static_cast<long long>(detail::union_size(pool[i].cone, pool[j].cone));
          it = scores.emplace(key, sc).first;
        }
        if (!have || it->second > best) {
          have = true;
          best = it->second;
          best_i = i;
          best_j = j;
        }
      }
    }

    Entry r = std::move(pool[best_i]);
    Entry s = std::move(pool[best_j]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best_j));
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best_i));
    out.stats.merges_done.emplace_back(r.members, s.members);
    ++out.stats.merges;

    Bdd care = r.w & s.w;
    Entry merged;
    merged.id = next_id++;
    merged.members = r.members;
    merged.members.insert(merged.members.end(), s.members.begin(), s.members.end());
    std::sort(merged.members.begin(), merged.members.end());
    if (care.is_false()) {
      merged.w = g.manager->zero();
      merged.s = g.manager->zero();
    } else {
      auto sol = detail::solve_aggregated(g, care, true);
      out.stats.iterations += sol.iterations;
      merged.w = sol.winning_valuations;
      merged.s = sol.winning_states;
    }
    if (!merged.s.eval_all_false() && opts.early_exit) {
      out.verdict = Verdict::kUnrealizable;
      out.stats.early_exit = true;
      return out;
    }
    merged.cone = cone_semantic(g, merged.w);
    pool.push_back(std::move(merged));
  }

  out.winning_states = pool.front().s;
  if (opts.compute_valuations) out.winning_valuations = pool.front().w;
  detail::set_verdict_from_states(out);
  return out;
}

/// Back-and-forth: grow the global losing states one predecessor step at a
/// time and feed them back into the sub-games.
inline SolveOutcome comp_3(const SymbolicGame& g, const SolveOptions& opts = {}) {
  SolveOutcome out = detail::make_outcome(g, "comp3");
  Decomposition d;
  {
    detail::PhaseTimer t(out.stats, "decompose");
    d = decompose_game(g, opts.decompose);
  }
  out.stats.subgames = d.parts.size();
  out.stats.decomposable = d.decomposable();
  if (!d.decomposable()) {
    auto c = classical(g, opts);
    c.algorithm = out.algorithm;
    c.stats.subgames = out.stats.subgames;
    c.stats.phase_ms.insert(out.stats.phase_ms.begin(), out.stats.phase_ms.end());
    return c;
  }
  Manager& m = *g.manager;

  std::vector<SubGame> subs;
  std::vector<Bdd> s;
  Bdd lambda = m.one();
  {
    detail::PhaseTimer t(out.stats, "subgames");
    for (std::size_t i = 0; i < d.parts.size(); ++i) {
      subs.push_back(make_subgame(g, d.parts[i].error, i));
      auto sol = solve(subs.back().game, true);
      out.stats.iterations += sol.iterations;
      if (!sol.realizable && opts.early_exit) {
        out.verdict = Verdict::kUnrealizable;
        out.stats.early_exit = true;
        return out;
      }
      lambda &= sol.winning_valuations;
      s.push_back(sol.winning_states);
    }
  }

  detail::PhaseTimer t(out.stats, "loop");
  SymbolicGame global = restrict_latches(g, cone_semantic(g, lambda), ~lambda);
  auto not_all_s = [&] {
    Bdd all = m.one();
    for (const auto& si : s) all &= si;
    return ~all;
  };
  auto check_invariant = [&](const Bdd& u_next) {
    if (!opts.reference_states) return;
    const Bdd& win = *opts.reference_states;
    for (const auto& si : s)
      if (!win.implies(si)) throw std::logic_error("comp3 invariant violated: winning states not within s_i");
    if (!u_next.implies(~win)) throw std::logic_error("comp3 invariant violated: u' meets winning states");
    if (!not_all_s().implies(u_next)) throw std::logic_error("comp3 invariant violated: local losing states not in u'");
  };

  Bdd u = m.zero();
  Bdd u_next = not_all_s();
  check_invariant(u_next);
  // The body runs at least once: when every s_i is true the first
  // predecessor step is still needed to account for leaving the conjunction.
  do {
    m.poll();
    ++out.stats.iterations;
    u = u_next;
    u_next = u | force_pre(global, global.error(), u);
    for (std::size_t i = 0; i < subs.size(); ++i) {
      const auto& sub = subs[i].game;
      std::vector<var_t> outside;
      std::set<var_t> local;
      for (const auto& l : sub.latches) local.insert(l.var);
      for (const auto& l : g.latches)
        if (!local.count(l.var)) outside.push_back(l.var);
      Bdd p = m.forall(u_next, outside);
      if ((p & s[i]).is_false()) continue;
      ++out.stats.resolves;
      if (p.is_true()) {
        s[i] = m.zero();
        continue;
      }
      SymbolicGame h = restrict_latches(g, cone_semantic(g, p), p);
      cofactor_transitions(h, ~p);
      s[i] = solve_states_with_error(h, p);
    }
    u_next = u_next | not_all_s();
    check_invariant(u_next);
    if (opts.early_exit && u_next.eval_all_false()) {
      out.verdict = Verdict::kUnrealizable;
      out.stats.early_exit = true;
      return out;
    }
  } while (!(u == u_next));

  out.winning_states = ~u;
  if (opts.compute_valuations) out.winning_valuations = lambda & successor_in(g, out.winning_states);
  detail::set_verdict_from_states(out);
  return out;
}

namespace detail {

/// BDD over `vars` (most significant first) whose value at assignment index
/// k is bits[k]; bit j of k is the value of vars[vars.size() - 1 - j].
inline Bdd from_truth_table(Manager& m, const std::vector<var_t>& vars, const std::vector<bool>& bits) {
  // Order the variables by level so the construction is bottom-up.
  std::vector<std::size_t> perm(vars.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return vars[a] < vars[b]; });
  const std::size_t n = vars.size();
  std::vector<Bdd> layer(std::size_t{1} << n);
  for (std::size_t k = 0; k < layer.size(); ++k) {
    // Index k enumerates assignments in level order; translate to table order.
    std::size_t idx = 0;
    for (std::size_t p = 0; p < n; ++p) {
      bool bit = (k >> (n - 1 - p)) & 1u;
      if (bit) idx |= std::size_t{1} << (n - 1 - perm[p]);
    }
    layer[k] = bits[idx] ? m.one() : m.zero();
  }
  for (std::size_t p = n; p-- > 0;) {
    Bdd x = m.var(vars[perm[p]]);
    std::vector<Bdd> next(layer.size() / 2);
    for (std::size_t k = 0; k < next.size(); ++k) next[k] = m.ite(x, layer[2 * k + 1], layer[2 * k]);
    layer = std::move(next);
  }
  return layer.front();
}

}  // namespace detail

/// Explicit-state reference solver. Enumerates every valuation, evaluates
/// the game's functions pointwise and computes the environment attractor of
/// the error.
inline SolveOutcome oracle_explicit(const SymbolicGame& g, const SolveOptions& opts = {}) {
  SolveOutcome out = detail::make_outcome(g, "oracle");
  const std::size_t nl = g.latches.size(), nu = g.uncontrollable.size(), nc = g.controllable.size();
  if (nl + nu + nc > opts.oracle_max_vars)
    throw std::length_error("game too large for explicit enumeration");
  detail::PhaseTimer t(out.stats, "enumerate");
  const std::size_t ns = std::size_t{1} << nl, nus = std::size_t{1} << nu, ncs = std::size_t{1} << nc;
  const Bdd& error = g.error();
  std::vector<bool> assignment(g.manager->var_count(), false);
  auto load = [&](std::size_t q, std::size_t xu, std::size_t xc) {
    for (std::size_t i = 0; i < nl; ++i) assignment[g.latches[i].var] = (q >> (nl - 1 - i)) & 1u;
    for (std::size_t i = 0; i < nu; ++i) assignment[g.uncontrollable[i]] = (xu >> (nu - 1 - i)) & 1u;
    for (std::size_t i = 0; i < nc; ++i) assignment[g.controllable[i]] = (xc >> (nc - 1 - i)) & 1u;
  };
  const std::size_t total = ns * nus * ncs;
  std::vector<std::uint32_t> succ(total);
  std::vector<bool> bad(total);
  for (std::size_t q = 0; q < ns; ++q)
    for (std::size_t xu = 0; xu < nus; ++xu)
      for (std::size_t xc = 0; xc < ncs; ++xc) {
        std::size_t k = (q * nus + xu) * ncs + xc;
        load(q, xu, xc);
        bad[k] = error.eval(assignment);
        std::uint32_t nq = 0;
        for (std::size_t i = 0; i < nl; ++i)
          if (g.latches[i].next.eval(assignment)) nq |= 1u << (nl - 1 - i);
        succ[k] = nq;
      }

  // losing(q) iff some x_u such that every x_c is bad or leads to a losing state.
  std::vector<bool> losing(ns, false);
  bool changed = true;
  while (changed) {
    changed = false;
    ++out.stats.iterations;
    for (std::size_t q = 0; q < ns; ++q) {
      if (losing[q]) continue;
      for (std::size_t xu = 0; xu < nus && !losing[q]; ++xu) {
        bool forced = true;
        for (std::size_t xc = 0; xc < ncs && forced; ++xc) {
          std::size_t k = (q * nus + xu) * ncs + xc;
          forced = bad[k] || losing[succ[k]];
        }
        if (forced) {
          losing[q] = true;
          changed = true;
        }
      }
    }
  }

  std::vector<bool> win(ns);
  for (std::size_t q = 0; q < ns; ++q) win[q] = !losing[q];
  out.winning_states = detail::from_truth_table(*g.manager, g.latch_vars(), win);
  out.verdict = win[0] ? Verdict::kRealizable : Verdict::kUnrealizable;
  if (opts.compute_valuations) {
    std::vector<var_t> vars = g.latch_vars();
    vars.insert(vars.end(), g.uncontrollable.begin(), g.uncontrollable.end());
    vars.insert(vars.end(), g.controllable.begin(), g.controllable.end());
    std::vector<bool> wv(total);
    for (std::size_t k = 0; k < total; ++k) wv[k] = !bad[k] && win[succ[k]];
    out.winning_valuations = detail::from_truth_table(*g.manager, vars, wv);
  }
  return out;
}

SolveOutcome portfolio(const SymbolicGame& g, const SolveOptions& opts, double timeout_seconds);

/// Runs one algorithm with cancellation and resource errors mapped to
/// verdicts. Node-limit exhaustion is reported as TIMEOUT.
inline SolveOutcome run_algorithm(const SymbolicGame& g, Algorithm a, const SolveOptions& opts = {}) {
  auto start = std::chrono::steady_clock::now();
  g.manager->set_stop_flag(opts.stop);
  g.manager->set_deadline(opts.deadline);
  SolveOutcome out;
  try {
    switch (a) {
      case Algorithm::kClassical: out = classical(g, opts); break;
      case Algorithm::kComp1: out = comp_1(g, opts); break;
      case Algorithm::kComp2: out = comp_2(g, opts); break;
      case Algorithm::kComp3: out = comp_3(g, opts); break;
      case Algorithm::kOracle: out = oracle_explicit(g, opts); break;
      case Algorithm::kPortfolio: {
        double secs = 0;
        if (opts.deadline)
          secs = std::chrono::duration<double>(*opts.deadline - std::chrono::steady_clock::now()).count();
        else
          secs = 1e9;
        out = portfolio(g, opts, std::max(0.0, secs));
        break;
      }
    }
  } catch (const bdd::Interrupted&) {
    out = detail::make_outcome(g, to_string(a));
    out.verdict = Verdict::kTimeout;
    out.message = "interrupted";
  } catch (const bdd::NodeLimitExceeded& e) {
    out = detail::make_outcome(g, to_string(a));
    out.verdict = Verdict::kTimeout;
    out.message = e.what();
  }
  g.manager->set_stop_flag(nullptr);
  g.manager->set_deadline(std::nullopt);
  out.stats.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  out.stats.peak_nodes = std::max(out.stats.peak_nodes, g.manager->peak_nodes());
  return out;
}

/// Runs several algorithms concurrently, each on a private copy of the game,
/// and returns the first decided outcome. The other runs are cancelled.
/// Throws std::logic_error if two runs decide differently.
inline SolveOutcome portfolio(const SymbolicGame& g, const SolveOptions& opts, double timeout_seconds) {
  using clock = std::chrono::steady_clock;
  auto start = clock::now();
  SolveOutcome timeout = detail::make_outcome(g, "portfolio");
  timeout.verdict = Verdict::kTimeout;
  std::vector<Algorithm> algos;
  for (auto a : opts.portfolio)
    if (a != Algorithm::kPortfolio) algos.push_back(a);
  if (algos.empty()) throw std::invalid_argument("portfolio needs at least one algorithm");
  if (timeout_seconds <= 0) {
    timeout.message = "zero timeout";
    return timeout;
  }
  auto deadline = start + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(timeout_seconds));
  if (opts.deadline) deadline = std::min(deadline, *opts.deadline);

  // Private games: rebuilt from the circuit inside each worker when possible,
  // otherwise copied here before any thread starts.
  std::vector<std::optional<SymbolicGame>> copies(algos.size());
  if (!g.rebuild) {
    for (std::size_t i = 0; i < algos.size(); ++i)
      copies[i] = clone_game(g, std::make_shared<Manager>(0, opts.manager));
  }

  std::atomic<bool> stop{false};
  std::mutex mu;
  std::condition_variable cv;
  std::optional<SolveOutcome> winner;
  std::vector<std::pair<std::string, Verdict>> decided;
  std::size_t finished = 0;
  std::string failure;

  auto worker = [&](std::size_t i) {
    SolveOutcome res;
    try {
      SymbolicGame local = copies[i] ? std::move(*copies[i]) : g.rebuild(opts.manager);
      SolveOptions o = opts;
      o.stop = &stop;
      o.deadline = deadline;
      o.reference_states.reset();
      res = run_algorithm(local, algos[i], o);
    } catch (const std::exception& e) {
      res.verdict = Verdict::kError;
      res.algorithm = std::string(to_string(algos[i]));
      res.message = e.what();
    }
    std::lock_guard<std::mutex> lock(mu);
    ++finished;
    if (res.decided()) {
      decided.emplace_back(res.algorithm, res.verdict);
      if (!winner) {
        res.stats.winner = res.algorithm;
        winner = std::move(res);
        stop = true;
      }
    } else if (res.verdict == Verdict::kError && failure.empty()) {
      failure = res.algorithm + ": " + res.message;
    }
    cv.notify_all();
  };

  std::vector<std::thread> threads;
  threads.reserve(algos.size());
  for (std::size_t i = 0; i < algos.size(); ++i) threads.emplace_back(worker, i);
  {
    std::unique_lock<std::mutex> lock(mu);
    auto done = [&] { return winner.has_value() || finished == algos.size(); };
    while (!done() && clock::now() < deadline) {
      if (opts.stop != nullptr && opts.stop->load()) break;
      cv.wait_until(lock, std::min(deadline, clock::now() + std::chrono::milliseconds(20)), done);
    }
    stop = true;
  }
  for (auto& t : threads) t.join();

  for (const auto& [name, v] : decided)
    if (v != decided.front().second)
      throw std::logic_error("portfolio members disagree: " + decided.front().first + " says " +
                             std::string(to_string(decided.front().second)) + ", " + name + " says " +
                             std::string(to_string(v)));
  if (!winner) {
    if (!failure.empty()) {
      timeout.verdict = Verdict::kError;
      timeout.message = failure;
    }
    return timeout;
  }
  SolveOutcome out = std::move(*winner);
  out.algorithm = "portfolio";
  out.stats.time_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
  return out;
}

}  // namespace safegames
