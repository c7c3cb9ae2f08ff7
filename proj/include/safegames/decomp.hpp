#pragma once

// Static splitting of an AIG error function into a disjunction of smaller
// error functions, and the sub-games they induce.

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "safegames/aiger.hpp"
#include "safegames/game.hpp"

namespace safegames {

/// Gate lookup over a circuit: which variables are AND vertices.
class AigView {
 public:
  explicit AigView(const aiger::AigCircuit& c) : circuit_(&c), gate_of_(c.max_var + 1, -1) {
    for (std::size_t i = 0; i < c.ands.size(); ++i)
      gate_of_[aiger::lit_var(c.ands[i].lhs)] = static_cast<std::int64_t>(i);
  }

  [[nodiscard]] bool is_gate(std::uint32_t v) const { return v < gate_of_.size() && gate_of_[v] >= 0; }
  [[nodiscard]] const aiger::AndGate& gate(std::uint32_t v) const {
    return circuit_->ands[static_cast<std::size_t>(gate_of_[v])];
  }
  [[nodiscard]] const aiger::AigCircuit& circuit() const { return *circuit_; }

 private:
  const aiger::AigCircuit* circuit_;
  std::vector<std::int64_t> gate_of_;
};

/// Maximal AND-tree below a vertex: `pos` holds leaves reached through
/// non-inverted edges only, `neg` the vertices entered through an inverted
/// edge. The vertex equals  AND(pos) & AND(not neg).
struct MinputAnd {
  std::set<std::uint32_t> pos;
  std::set<std::uint32_t> neg;

  [[nodiscard]] std::size_t size() const { return pos.size() + neg.size(); }
};

inline MinputAnd get_minput_and(const AigView& view, std::uint32_t root) {
  MinputAnd r;
  if (!view.is_gate(root)) {
    r.pos.insert(root);
    return r;
  }
  std::vector<std::uint32_t> stack{root};
  std::unordered_set<std::uint32_t> seen{root};
  while (!stack.empty()) {
    std::uint32_t v = stack.back();
    stack.pop_back();
    const auto& g = view.gate(v);
    for (aiger::Literal e : {g.rhs0, g.rhs1}) {
      std::uint32_t child = aiger::lit_var(e);
      if (aiger::lit_negated(e)) {
        r.neg.insert(child);
      } else if (!view.is_gate(child)) {
        r.pos.insert(child);
      } else if (seen.insert(child).second) {
        stack.push_back(child);
      }
    }
  }
  return r;
}

/// A part is a conjunction of AIG literals.
using Conjunction = std::vector<aiger::Literal>;

struct DecomposeOptions {
  /// Keep splitting parts while possible.
  bool deep = false;
  /// Upper bound on the number of parts when splitting deeply.
  std::size_t cap = 64;
};

namespace detail {

/// Drops constant-true literals and duplicates; returns false if the
/// conjunction is constant false.
inline bool simplify_conjunction(Conjunction& c) {
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  c.erase(std::remove(c.begin(), c.end(), aiger::kTrue), c.end());
  if (std::find(c.begin(), c.end(), aiger::kFalse) != c.end()) return false;
  for (std::size_t i = 1; i < c.size(); ++i)
    if (c[i] == (c[i - 1] ^ 1u)) return false;
  return true;
}

inline std::vector<Conjunction> finish_parts(std::vector<Conjunction> parts) {
  std::vector<Conjunction> kept;
  std::set<Conjunction> unique;
  for (auto& p : parts) {
    if (!simplify_conjunction(p)) continue;
    if (unique.insert(p).second) kept.push_back(std::move(p));
  }
  if (kept.empty()) kept.push_back(Conjunction{aiger::kFalse});
  return kept;
}

}  // namespace detail

/// Splits a conjunction of literals into a disjunction of conjunctions when
/// one of its negated members is itself an AND vertex. Returns a single part
/// when no split is possible.
inline std::vector<Conjunction> decompose_conj(const AigView& view, const Conjunction& conj) {
  // Flatten positive AND members so their negated inputs become candidates.
  std::set<std::uint32_t> pos, neg;
  for (aiger::Literal l : conj) {
    std::uint32_t v = aiger::lit_var(l);
    if (aiger::lit_negated(l)) {
      neg.insert(v);
    } else {
      auto m = get_minput_and(view, v);
      pos.insert(m.pos.begin(), m.pos.end());
      neg.insert(m.neg.begin(), m.neg.end());
    }
  }
  std::int64_t best = -1;
  std::size_t best_size = 0;
  MinputAnd best_m;
  for (std::uint32_t v : neg) {  // ascending, so ties keep the lowest id
    if (!view.is_gate(v)) continue;
    auto m = get_minput_and(view, v);
    if (best < 0 || m.size() > best_size) {
      best = v;
      best_size = m.size();
      best_m = std::move(m);
    }
  }
  if (best < 0) return {conj};

  Conjunction rest;
  for (std::uint32_t v : pos) rest.push_back(aiger::make_lit(v));
  for (std::uint32_t v : neg)
    if (v != static_cast<std::uint32_t>(best)) rest.push_back(aiger::make_lit(v, true));
  std::vector<Conjunction> parts;
  for (std::uint32_t u : best_m.pos) {
    Conjunction p = rest;
    p.push_back(aiger::make_lit(u, true));
    parts.push_back(std::move(p));
  }
  for (std::uint32_t u : best_m.neg) {
    Conjunction p = rest;
    p.push_back(aiger::make_lit(u));
    parts.push_back(std::move(p));
  }
  return parts;
}

/// Splits the error literal into parts whose disjunction is the error.
inline std::vector<Conjunction> decompose(const aiger::AigCircuit& c, aiger::Literal error,
                                          const DecomposeOptions& opts = {}) {
  AigView view(c);
  std::uint32_t root = aiger::lit_var(error);
  std::vector<Conjunction> parts;
  if (!view.is_gate(root)) {
    parts.push_back({error});
  } else if (aiger::lit_negated(error)) {
    auto m = get_minput_and(view, root);
    for (std::uint32_t v : m.pos) parts.push_back({aiger::make_lit(v, true)});
    for (std::uint32_t v : m.neg) parts.push_back({aiger::make_lit(v)});
  } else {
    parts = decompose_conj(view, {error});
  }
  parts = detail::finish_parts(std::move(parts));

  if (opts.deep) {
    bool changed = true;
    while (changed && parts.size() < opts.cap) {
      changed = false;
      std::vector<Conjunction> next;
      for (std::size_t i = 0; i < parts.size(); ++i) {
        auto split = detail::finish_parts(decompose_conj(view, parts[i]));
        std::size_t remaining = parts.size() - i - 1;
        if (split.size() > 1 && next.size() + split.size() + remaining <= opts.cap) {
          next.insert(next.end(), split.begin(), split.end());
          changed = true;
        } else {
          next.push_back(parts[i]);
        }
      }
      parts = detail::finish_parts(std::move(next));
    }
  }
  return parts;
}

struct Part {
  Conjunction conj;
  Bdd error;
};

struct Decomposition {
  std::vector<Part> parts;

  [[nodiscard]] bool decomposable() const { return parts.size() >= 2; }
};

/// Decomposes a game built from a circuit, encoding each part as a BDD.
/// Parts that are equal as BDDs are merged; false parts are dropped unless
/// nothing else remains. Games without a circuit yield a single part.
inline Decomposition decompose_game(const SymbolicGame& g, const DecomposeOptions& opts = {}) {
  Decomposition d;
  if (!g.encoder || !g.error_lit) {
    d.parts.push_back(Part{{}, g.error()});
    return d;
  }
  auto conjs = decompose(g.encoder->circuit(), *g.error_lit, opts);
  std::unordered_set<Bdd> seen;
  for (auto& conj : conjs) {
    Bdd e = g.encoder->encode_conjunction(conj);
    if (e.is_false() && conjs.size() > 1) continue;
    if (!seen.insert(e).second) continue;
    d.parts.push_back(Part{std::move(conj), std::move(e)});
  }
  if (d.parts.empty()) d.parts.push_back(Part{{aiger::kFalse}, g.manager->zero()});
  return d;
}

struct SubGame {
  SymbolicGame game;
  std::size_t index = 0;
};

/// The game restricted to the latch cone of `error`, with `error` as its
/// error function.
inline SubGame make_subgame(const SymbolicGame& g, const Bdd& error, std::size_t index = 0) {
  return SubGame{restrict_latches(g, cone_semantic(g, error), error), index};
}

/// Standalone circuit whose single output is the given part.
inline aiger::AigCircuit part_circuit(const aiger::AigCircuit& c, const Conjunction& conj,
                                      const std::string& output_name = "error") {
  aiger::AigCircuit out = c;
  out.outputs.clear();
  aiger::Literal acc = aiger::kTrue;
  for (aiger::Literal l : conj) {
    if (acc == aiger::kTrue) {
      acc = l;
      continue;
    }
    std::uint32_t v = ++out.max_var;
    out.ands.push_back(aiger::AndGate{aiger::make_lit(v), std::max(acc, l), std::min(acc, l)});
    acc = aiger::make_lit(v);
  }
  out.outputs.push_back(aiger::Output{acc, output_name});
  return out;
}

}  // namespace safegames
