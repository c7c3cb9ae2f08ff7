#pragma once

// Symbolic safety games built from AIGER circuits, predecessor operators and
// their fixpoints.
//
// The error output is kept as a one-step condition on (L, X_u, X_c); reaching
// it is folded into the losing-state fixpoint instead of being tracked by an
// extra sticky latch. materialize_error_latch() builds the sticky-latch form
// for cross-checking.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "safegames/aiger.hpp"
#include "safegames/bdd.hpp"

namespace safegames {

using bdd::Bdd;
using bdd::Manager;
using bdd::var_t;

inline constexpr var_t kNoVar = std::numeric_limits<var_t>::max();

/// Translates AIG literals of one circuit into BDDs, memoizing every gate.
class AigEncoder {
 public:
  AigEncoder(std::shared_ptr<Manager> manager, std::shared_ptr<const aiger::AigCircuit> circuit,
             std::vector<var_t> bdd_var_of)
      : manager_(std::move(manager)), circuit_(std::move(circuit)), bdd_var_of_(std::move(bdd_var_of)) {
    gate_of_.assign(circuit_->max_var + 1, kNoGate);
    for (std::size_t i = 0; i < circuit_->ands.size(); ++i)
      gate_of_[aiger::lit_var(circuit_->ands[i].lhs)] = static_cast<std::uint32_t>(i);
    memo_.resize(circuit_->max_var + 1);
  }

  [[nodiscard]] const aiger::AigCircuit& circuit() const { return *circuit_; }
  [[nodiscard]] const std::shared_ptr<const aiger::AigCircuit>& circuit_ptr() const { return circuit_; }
  [[nodiscard]] Manager& manager() const { return *manager_; }

  Bdd encode(aiger::Literal lit) {
    Bdd f = encode_var(aiger::lit_var(lit));
    return aiger::lit_negated(lit) ? ~f : f;
  }

  /// Conjunction of the given literals.
  Bdd encode_conjunction(const std::vector<aiger::Literal>& lits) {
    Bdd r = manager_->one();
    for (auto l : lits) {
      r &= encode(l);
      if (r.is_false()) break;
    }
    return r;
  }

 private:
  static constexpr std::uint32_t kNoGate = std::numeric_limits<std::uint32_t>::max();

  Bdd encode_var(std::uint32_t v) {
    if (v == 0) return manager_->zero();
    if (memo_[v].valid()) return memo_[v];
    if (gate_of_[v] == kNoGate) {
      if (bdd_var_of_.at(v) == kNoVar) throw std::logic_error("aig variable without bdd variable");
      memo_[v] = manager_->var(bdd_var_of_[v]);
      return memo_[v];
    }
    // Iterative post-order so deep circuits do not exhaust the stack.
    std::vector<std::pair<std::uint32_t, bool>> stack{{v, false}};
    while (!stack.empty()) {
      auto [x, expanded] = stack.back();
      stack.pop_back();
      if (memo_[x].valid()) continue;
      if (gate_of_[x] == kNoGate) {
        if (bdd_var_of_.at(x) == kNoVar) throw std::logic_error("aig variable without bdd variable");
        memo_[x] = manager_->var(bdd_var_of_[x]);
        continue;
      }
      const auto& g = circuit_->ands[gate_of_[x]];
      std::uint32_t a = aiger::lit_var(g.rhs0), b = aiger::lit_var(g.rhs1);
      if (!expanded) {
        stack.emplace_back(x, true);
        if (a != 0 && !memo_[a].valid()) stack.emplace_back(a, false);
        if (b != 0 && !memo_[b].valid()) stack.emplace_back(b, false);
        continue;
      }
      auto operand = [&](aiger::Literal l) {
        Bdd f = aiger::lit_var(l) == 0 ? manager_->zero() : memo_[aiger::lit_var(l)];
        return aiger::lit_negated(l) ? ~f : f;
      };
      memo_[x] = operand(g.rhs0) & operand(g.rhs1);
    }
    return memo_[v];
  }

  std::shared_ptr<Manager> manager_;
  std::shared_ptr<const aiger::AigCircuit> circuit_;
  std::vector<var_t> bdd_var_of_;
  std::vector<std::uint32_t> gate_of_;
  std::vector<Bdd> memo_;
};

struct GameLatch {
  var_t var = 0;
  Bdd next;
  aiger::Literal lit = 0;  ///< 0 for latches that do not come from a circuit
  std::string name;
};

struct SymbolicGame {
  // Declared first so it outlives every handle below.
  std::shared_ptr<Manager> manager;
  std::vector<var_t> uncontrollable;
  std::vector<var_t> controllable;
  std::vector<GameLatch> latches;
  std::shared_ptr<AigEncoder> encoder;
  /// Error literal in the encoder's circuit; used when `error_fn` is unset.
  std::optional<aiger::Literal> error_lit;
  std::vector<std::string> var_names;
  /// Rebuilds this game from its source circuit in a fresh manager. Only set
  /// on games returned by build_game.
  std::function<SymbolicGame(const bdd::ManagerOptions&)> rebuild;

  /// The error function. Built from the circuit on first use.
  const Bdd& error() const {
    if (!error_fn.valid()) {
      if (!encoder || !error_lit) throw std::logic_error("game has no error function");
      error_fn = encoder->encode(*error_lit);
    }
    return error_fn;
  }
  void set_error(Bdd e) { error_fn = std::move(e); }
  [[nodiscard]] bool error_built() const { return error_fn.valid(); }

  const Bdd& u_cube() const {
    if (!u_cube_.valid()) u_cube_ = manager->cube(uncontrollable);
    return u_cube_;
  }
  const Bdd& c_cube() const {
    if (!c_cube_.valid()) c_cube_ = manager->cube(controllable);
    return c_cube_;
  }

  [[nodiscard]] std::vector<var_t> latch_vars() const {
    std::vector<var_t> out;
    out.reserve(latches.size());
    for (const auto& l : latches) out.push_back(l.var);
    return out;
  }

  /// Index into `latches` of the latch with the given variable, or -1.
  [[nodiscard]] int latch_index(var_t v) const {
    if (latch_pos_.size() != manager->var_count() || latch_pos_dirty_) rebuild_latch_pos();
    return v < latch_pos_.size() ? latch_pos_[v] : -1;
  }

  /// Latches appearing in the support of each transition function.
  const std::vector<std::vector<var_t>>& latch_deps() const {
    if (deps_.size() != latches.size()) {
      deps_.clear();
      for (const auto& l : latches) {
        std::vector<var_t> d;
        for (var_t v : l.next.support())
          if (latch_index(v) >= 0) d.push_back(v);
        deps_.push_back(std::move(d));
      }
    }
    return deps_;
  }

  /// Drops cached derived data after `latches` was modified.
  void invalidate() {
    deps_.clear();
    latch_pos_dirty_ = true;
  }

  [[nodiscard]] std::string var_name(var_t v) const {
    return v < var_names.size() && !var_names[v].empty() ? var_names[v] : "v" + std::to_string(v);
  }

 private:
  void rebuild_latch_pos() const {
    latch_pos_.assign(manager->var_count(), -1);
    for (std::size_t i = 0; i < latches.size(); ++i) latch_pos_[latches[i].var] = static_cast<int>(i);
    latch_pos_dirty_ = false;
  }

  mutable Bdd error_fn;
  mutable Bdd u_cube_;
  mutable Bdd c_cube_;
  mutable std::vector<std::vector<var_t>> deps_;
  mutable std::vector<int> latch_pos_;
  mutable bool latch_pos_dirty_ = true;
};

struct BuildOptions {
  /// Preferred variable order: symbol names or decimal literals of inputs and
  /// latches. Unlisted variables follow in the default order.
  std::vector<std::string> order;
  /// Build the error BDD immediately rather than on first use.
  bool eager_error = false;
  bdd::ManagerOptions manager;
};

/// Default order: uncontrollable inputs, controllable inputs, latches, each
/// in declaration order.
inline SymbolicGame build_game(std::shared_ptr<const aiger::AigCircuit> circuit,
                               const aiger::InputClassification& cls, const BuildOptions& opts = {}) {
  const auto& c = *circuit;
  aiger::validate(c, aiger::ParseMode::kGame);

  std::vector<aiger::Literal> sequence;
  std::unordered_map<aiger::Literal, std::string> names;
  for (const auto& in : c.inputs) names[in.lit] = in.name;
  for (const auto& la : c.latches) names[la.lit] = la.name;
  for (auto l : cls.uncontrollable) sequence.push_back(l);
  for (auto l : cls.controllable) sequence.push_back(l);
  for (const auto& la : c.latches) sequence.push_back(la.lit);
  if (sequence.size() != c.inputs.size() + c.latches.size())
    throw std::invalid_argument("input classification does not cover the circuit inputs");

  if (!opts.order.empty()) {
    std::unordered_map<std::string, aiger::Literal> by_name;
    for (auto l : sequence) {
      if (!names[l].empty()) by_name.emplace(names[l], l);
      by_name.emplace(std::to_string(l), l);
    }
    std::vector<aiger::Literal> ordered;
    std::unordered_set<aiger::Literal> placed;
    for (const auto& token : opts.order) {
      auto it = by_name.find(token);
      if (it == by_name.end()) throw std::invalid_argument("unknown variable in order: " + token);
      if (placed.insert(it->second).second) ordered.push_back(it->second);
    }
    for (auto l : sequence)
      if (!placed.count(l)) ordered.push_back(l);
    sequence = std::move(ordered);
  }

  SymbolicGame g;
  g.manager = std::make_shared<Manager>(sequence.size(), opts.manager);
  std::vector<var_t> bdd_var_of(c.max_var + 1, kNoVar);
  g.var_names.resize(sequence.size());
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    bdd_var_of[aiger::lit_var(sequence[i])] = static_cast<var_t>(i);
    const auto& n = names[sequence[i]];
    g.var_names[i] = n.empty() ? "lit" + std::to_string(sequence[i]) : n;
  }
  for (auto l : cls.uncontrollable) g.uncontrollable.push_back(bdd_var_of[aiger::lit_var(l)]);
  for (auto l : cls.controllable) g.controllable.push_back(bdd_var_of[aiger::lit_var(l)]);
  g.encoder = std::make_shared<AigEncoder>(g.manager, circuit, bdd_var_of);
  for (const auto& la : c.latches) {
    GameLatch gl;
    gl.var = bdd_var_of[aiger::lit_var(la.lit)];
    gl.lit = la.lit;
    gl.name = la.name;
    gl.next = g.encoder->encode(la.next);
    g.latches.push_back(std::move(gl));
  }
  g.error_lit = c.error();
  g.invalidate();
  g.rebuild = [circuit, cls, opts](const bdd::ManagerOptions& mo) {
    BuildOptions o = opts;
    o.manager = mo;
    return build_game(circuit, cls, o);
  };
  if (opts.eager_error) (void)g.error();
  return g;
}

inline SymbolicGame build_game(const aiger::AigCircuit& circuit, const BuildOptions& opts = {}) {
  auto ptr = std::make_shared<const aiger::AigCircuit>(circuit);
  return build_game(ptr, aiger::classify_inputs(circuit), opts);
}

/// Inputs and latches (as AIG variables) that the literal transitively
/// depends on, closing over latch next-state functions.
inline std::vector<std::uint32_t> cone_syntactic(const aiger::AigCircuit& c, aiger::Literal root) {
  std::vector<std::int64_t> gate_of(c.max_var + 1, -1), latch_of(c.max_var + 1, -1);
  std::vector<std::uint8_t> is_input(c.max_var + 1, 0);
  for (std::size_t i = 0; i < c.ands.size(); ++i) gate_of[aiger::lit_var(c.ands[i].lhs)] = static_cast<std::int64_t>(i);
  for (std::size_t i = 0; i < c.latches.size(); ++i) latch_of[aiger::lit_var(c.latches[i].lit)] = static_cast<std::int64_t>(i);
  for (const auto& in : c.inputs) is_input[aiger::lit_var(in.lit)] = 1;
  std::vector<std::uint8_t> seen(c.max_var + 1, 0);
  std::vector<std::uint32_t> stack{aiger::lit_var(root)}, out;
  while (!stack.empty()) {
    std::uint32_t v = stack.back();
    stack.pop_back();
    if (v == 0 || seen[v]) continue;
    seen[v] = 1;
    if (gate_of[v] >= 0) {
      const auto& g = c.ands[static_cast<std::size_t>(gate_of[v])];
      stack.push_back(aiger::lit_var(g.rhs0));
      stack.push_back(aiger::lit_var(g.rhs1));
    } else if (latch_of[v] >= 0) {
      out.push_back(v);
      stack.push_back(aiger::lit_var(c.latches[static_cast<std::size_t>(latch_of[v])].next));
    } else if (is_input[v]) {
      out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Least set of latch variables containing the latches of `seeds` and closed
/// under transition-function dependencies.
inline std::vector<var_t> latch_closure(const SymbolicGame& g, const std::vector<var_t>& seeds) {
  const auto& deps = g.latch_deps();
  std::vector<std::uint8_t> in(g.latches.size(), 0);
  std::vector<int> stack;
  for (var_t v : seeds) {
    int i = g.latch_index(v);
    if (i >= 0 && !in[i]) {
      in[i] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    int i = stack.back();
    stack.pop_back();
    for (var_t v : deps[i]) {
      int j = g.latch_index(v);
      if (j >= 0 && !in[j]) {
        in[j] = 1;
        stack.push_back(j);
      }
    }
  }
  std::vector<var_t> out;
  for (std::size_t i = 0; i < g.latches.size(); ++i)
    if (in[i]) out.push_back(g.latches[i].var);
  std::sort(out.begin(), out.end());
  return out;
}

/// Latch cone of a function, computed from BDD supports.
inline std::vector<var_t> cone_semantic(const SymbolicGame& g, const Bdd& f) {
  return latch_closure(g, f.support());
}

/// Same game over a subset of its latches with a new error function. The
/// subset is expected to be closed under dependencies.
inline SymbolicGame restrict_latches(const SymbolicGame& g, const std::vector<var_t>& keep, Bdd error) {
  SymbolicGame h;
  h.manager = g.manager;
  h.uncontrollable = g.uncontrollable;
  h.controllable = g.controllable;
  h.encoder = g.encoder;
  h.var_names = g.var_names;
  std::unordered_set<var_t> keep_set(keep.begin(), keep.end());
  for (const auto& l : g.latches)
    if (keep_set.count(l.var)) h.latches.push_back(l);
  h.set_error(std::move(error));
  h.invalidate();
  return h;
}

/// Replaces every transition function by its generalized cofactor w.r.t. care.
inline void cofactor_transitions(SymbolicGame& g, const Bdd& care) {
  for (auto& l : g.latches) l.next = g.manager->gencof(l.next, care);
  g.invalidate();
}

/// compose(S, {l -> f_l}): valuations whose successor lies in S.
inline Bdd successor_in(const SymbolicGame& g, const Bdd& s) {
  bdd::Substitution sub;
  sub.reserve(g.latches.size());
  auto supp = s.support();
  for (var_t v : supp) {
    int i = g.latch_index(v);
    if (i >= 0) sub.emplace_back(v, g.latches[i].next);
  }
  return g.manager->compose(s, sub);
}

inline Bdd upre(const SymbolicGame& g, const Bdd& s) {
  Bdd t = g.manager->forall_cube(successor_in(g, s), g.c_cube());
  return g.manager->exists_cube(t, g.u_cube());
}

inline Bdd cpre(const SymbolicGame& g, const Bdd& s) {
  Bdd t = g.manager->exists_cube(successor_in(g, s), g.c_cube());
  return g.manager->forall_cube(t, g.u_cube());
}

inline Bdd upre_star(const SymbolicGame& g, const Bdd& s0) {
  Bdd x = s0;
  while (true) {
    g.manager->poll();
    Bdd next = s0 | upre(g, x);
    if (next == x) return x;
    x = std::move(next);
  }
}

inline Bdd cpre_star(const SymbolicGame& g, const Bdd& s0) {
  Bdd x = s0;
  while (true) {
    g.manager->poll();
    Bdd next = s0 & cpre(g, x);
    if (next == x) return x;
    x = std::move(next);
  }
}

/// States from which the environment can, in one step, either trigger
/// `error` or move into X: exists X_u forall X_c (error | X o f).
inline Bdd force_pre(const SymbolicGame& g, const Bdd& error, const Bdd& x) {
  Bdd t = g.manager->forall_cube(error | successor_in(g, x), g.c_cube());
  return g.manager->exists_cube(t, g.u_cube());
}

struct GameSolution {
  bool realizable = false;
  Bdd winning_states;
  /// Unset when valuations were not requested.
  Bdd winning_valuations;
  std::size_t iterations = 0;
};

/// Least fixpoint of force_pre from the empty set.
inline Bdd losing_states(const SymbolicGame& g, const Bdd& error, std::size_t* iterations = nullptr) {
  Bdd x = g.manager->zero();
  std::size_t it = 0;
  while (true) {
    g.manager->poll();
    ++it;
    Bdd next = x | force_pre(g, error, x);
    if (next == x) break;
    x = std::move(next);
  }
  if (iterations) *iterations = it;
  return x;
}

inline Bdd winning_valuations(const SymbolicGame& g, const Bdd& error, const Bdd& winning_states) {
  return ~error & successor_in(g, winning_states);
}

inline GameSolution solve_with_error(const SymbolicGame& g, const Bdd& error, bool with_valuations = true) {
  GameSolution sol;
  sol.winning_states = ~losing_states(g, error, &sol.iterations);
  sol.realizable = sol.winning_states.eval_all_false();
  if (with_valuations) sol.winning_valuations = winning_valuations(g, error, sol.winning_states);
  return sol;
}

inline GameSolution solve(const SymbolicGame& g, bool with_valuations = true) {
  return solve_with_error(g, g.error(), with_valuations);
}

/// Greatest fixpoint of the controllable safe predecessor from all states.
inline Bdd solve_states_with_error(const SymbolicGame& g, const Bdd& error, std::size_t* iterations = nullptr) {
  Bdd x = g.manager->one();
  Bdd safe = ~error;
  std::size_t it = 0;
  while (true) {
    g.manager->poll();
    ++it;
    Bdd t = g.manager->exists_cube(safe & successor_in(g, x), g.c_cube());
    Bdd next = x & g.manager->forall_cube(t, g.u_cube());
    if (next == x) break;
    x = std::move(next);
  }
  if (iterations) *iterations = it;
  return x;
}

inline Bdd solve_states(const SymbolicGame& g) { return solve_states_with_error(g, g.error()); }

/// Adds an explicit sticky error latch `out` with next state out | error.
/// The returned game's error function is the latch itself.
inline SymbolicGame materialize_error_latch(const SymbolicGame& g, var_t* out_var = nullptr) {
  SymbolicGame h;
  h.manager = g.manager;
  h.uncontrollable = g.uncontrollable;
  h.controllable = g.controllable;
  h.latches = g.latches;
  h.encoder = g.encoder;
  h.var_names = g.var_names;
  var_t out = h.manager->new_var();
  h.var_names.resize(h.manager->var_count());
  h.var_names[out] = "out";
  Bdd out_bdd = h.manager->var(out);
  h.latches.push_back(GameLatch{out, out_bdd | g.error(), 0, "out"});
  h.set_error(out_bdd);
  h.invalidate();
  if (out_var) *out_var = out;
  return h;
}

/// Copies a game into another manager. Lazily built data is materialized.
inline SymbolicGame clone_game(const SymbolicGame& g, std::shared_ptr<Manager> destination) {
  SymbolicGame h;
  h.manager = std::move(destination);
  while (h.manager->var_count() < g.manager->var_count()) h.manager->new_var();
  h.uncontrollable = g.uncontrollable;
  h.controllable = g.controllable;
  h.var_names = g.var_names;
  h.error_lit = g.error_lit;
  for (const auto& l : g.latches)
    h.latches.push_back(GameLatch{l.var, g.manager->transfer(l.next, *h.manager), l.lit, l.name});
  h.set_error(g.manager->transfer(g.error(), *h.manager));
  h.invalidate();
  return h;
}

}  // namespace safegames
