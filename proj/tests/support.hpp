#pragma once

// Independent reference implementations used by the tests: formula trees
// evaluated directly, truth tables, explicit successor enumeration, and a
// hand-written binary AIGER encoder.

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "safegames/aiger.hpp"
#include "safegames/bdd.hpp"
#include "safegames/game.hpp"

namespace testsupport {

using safegames::bdd::Bdd;
using safegames::bdd::Manager;
using safegames::bdd::var_t;

/// Boolean formula over variables 0..n-1, evaluated without BDDs.
struct Formula {
  enum Kind { kVar, kConst, kNot, kAnd, kOr, kXor } kind = kConst;
  var_t var = 0;
  bool value = false;
  std::shared_ptr<Formula> a, b;

  [[nodiscard]] bool eval(const std::vector<bool>& x) const {
    switch (kind) {
      case kVar: return x[var];
      case kConst: return value;
      case kNot: return !a->eval(x);
      case kAnd: return a->eval(x) && b->eval(x);
      case kOr: return a->eval(x) || b->eval(x);
      case kXor: return a->eval(x) != b->eval(x);
    }
    return false;
  }

  Bdd build(Manager& m) const {
    switch (kind) {
      case kVar: return m.var(var);
      case kConst: return value ? m.one() : m.zero();
      case kNot: return ~a->build(m);
      case kAnd: return a->build(m) & b->build(m);
      case kOr: return a->build(m) | b->build(m);
      case kXor: return a->build(m) ^ b->build(m);
    }
    return m.zero();
  }
};

inline std::shared_ptr<Formula> random_formula(std::mt19937_64& rng, std::size_t nvars, int depth) {
  auto f = std::make_shared<Formula>();
  std::uniform_int_distribution<int> kind(0, depth <= 0 ? 1 : 5);
  int k = kind(rng);
  if (k <= 1 || depth <= 0) {
    if (std::uniform_int_distribution<int>(0, 9)(rng) == 0) {
      f->kind = Formula::kConst;
      f->value = rng() & 1u;
    } else {
      f->kind = Formula::kVar;
      f->var = static_cast<var_t>(std::uniform_int_distribution<std::size_t>(0, nvars - 1)(rng));
    }
    return f;
  }
  if (k == 2) {
    f->kind = Formula::kNot;
    f->a = random_formula(rng, nvars, depth - 1);
    return f;
  }
  f->kind = k == 3 ? Formula::kAnd : k == 4 ? Formula::kOr : Formula::kXor;
  f->a = random_formula(rng, nvars, depth - 1);
  f->b = random_formula(rng, nvars, depth - 1);
  return f;
}

inline std::vector<bool> assignment(std::uint64_t bits, std::size_t n) {
  std::vector<bool> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = (bits >> i) & 1u;
  return x;
}

/// Truth table of a BDD over variables 0..n-1 by path evaluation.
inline std::vector<bool> truth_table(const Bdd& f, std::size_t n) {
  std::vector<bool> t(std::size_t{1} << n);
  for (std::uint64_t k = 0; k < t.size(); ++k) t[k] = f.eval(assignment(k, n));
  return t;
}

inline std::vector<bool> truth_table(const Formula& f, std::size_t n) {
  std::vector<bool> t(std::size_t{1} << n);
  for (std::uint64_t k = 0; k < t.size(); ++k) t[k] = f.eval(assignment(k, n));
  return t;
}

/// Reference binary AIGER writer, written from the format description and
/// independent of the library's encoder. Expects the compact layout.
inline std::string reference_binary(const safegames::aiger::AigCircuit& c) {
  std::string out = "aig " + std::to_string(c.max_var) + " " + std::to_string(c.inputs.size()) + " " +
                    std::to_string(c.latches.size()) + " " + std::to_string(c.outputs.size()) + " " +
                    std::to_string(c.ands.size()) + "\n";
  for (const auto& l : c.latches) out += std::to_string(l.next) + "\n";
  for (const auto& o : c.outputs) out += std::to_string(o.lit) + "\n";
  auto put = [&out](std::uint32_t x) {
    do {
      unsigned char byte = x % 128;
      x /= 128;
      if (x != 0) byte += 128;
      out.push_back(static_cast<char>(byte));
    } while (x != 0);
  };
  for (const auto& g : c.ands) {
    put(g.lhs - g.rhs0);
    put(g.rhs0 - g.rhs1);
  }
  for (std::size_t i = 0; i < c.inputs.size(); ++i)
    if (!c.inputs[i].name.empty()) out += "i" + std::to_string(i) + " " + c.inputs[i].name + "\n";
  for (std::size_t i = 0; i < c.latches.size(); ++i)
    if (!c.latches[i].name.empty()) out += "l" + std::to_string(i) + " " + c.latches[i].name + "\n";
  for (std::size_t i = 0; i < c.outputs.size(); ++i)
    if (!c.outputs[i].name.empty()) out += "o" + std::to_string(i) + " " + c.outputs[i].name + "\n";
  if (!c.comments.empty()) out += "c\n" + c.comments;
  return out;
}

/// Random circuit in the compact binary layout: inputs, then latches, then
/// gates with rhs0 >= rhs1. Some symbols are left unnamed.
inline safegames::aiger::AigCircuit random_compact_circuit(std::mt19937_64& rng, std::size_t max_inputs = 6,
                                                           std::size_t max_latches = 4, std::size_t max_ands = 20,
                                                           std::size_t max_outputs = 3) {
  using namespace safegames::aiger;
  auto uni = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  AigCircuit c;
  std::size_t I = uni(0, max_inputs), L = uni(0, max_latches), A = uni(0, max_ands), O = uni(1, max_outputs);
  c.max_var = static_cast<std::uint32_t>(I + L + A);
  auto any_lit = [&](std::uint32_t below_var) {
    std::uint32_t v = static_cast<std::uint32_t>(uni(0, below_var - 1));
    return make_lit(v, uni(0, 1) == 1);
  };
  for (std::size_t i = 0; i < I; ++i)
    c.inputs.push_back(Input{make_lit(static_cast<std::uint32_t>(i + 1)), uni(0, 3) ? "in" + std::to_string(i) : ""});
  if (!c.inputs.empty() && uni(0, 1)) c.inputs[0].name = "controllable_go";
  for (std::size_t i = 0; i < L; ++i)
    c.latches.push_back(Latch{make_lit(static_cast<std::uint32_t>(I + i + 1)), 0, uni(0, 3) ? "q" + std::to_string(i) : ""});
  for (std::size_t i = 0; i < A; ++i) {
    std::uint32_t v = static_cast<std::uint32_t>(I + L + i + 1);
    Literal a = any_lit(v), b = any_lit(v);
    if (a < b) std::swap(a, b);
    c.ands.push_back(AndGate{make_lit(v), a, b});
  }
  for (auto& l : c.latches) l.next = any_lit(c.max_var + 1);
  for (std::size_t i = 0; i < O; ++i) c.outputs.push_back(Output{any_lit(c.max_var + 1), uni(0, 1) ? "out" + std::to_string(i) : ""});
  if (uni(0, 2) == 0) c.comments = "generated\nseed " + std::to_string(rng() % 1000) + "\n";
  return c;
}

/// Explicit next-state and error evaluation straight from the circuit.
struct ExplicitStep {
  bool error;
  std::vector<bool> next;
};

inline ExplicitStep circuit_step(const safegames::aiger::AigCircuit& c, const std::vector<bool>& inputs,
                                 const std::vector<bool>& latches) {
  auto vals = safegames::aiger::eval(c, inputs, latches);
  ExplicitStep s;
  s.error = safegames::aiger::lit_value(vals, c.error());
  for (const auto& l : c.latches) s.next.push_back(safegames::aiger::lit_value(vals, l.next));
  return s;
}

}  // namespace testsupport
