#pragma once

// Incremental construction of AIG circuits. Gates are numbered in creation
// order, so every gate sits above its operands.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "safegames/aiger.hpp"

namespace safegames::aiger {

class AigBuilder {
 public:
  Literal input(std::string name = {}) {
    Literal l = fresh();
    c_.inputs.push_back(Input{l, std::move(name)});
    return l;
  }

  Literal controllable(const std::string& name) { return input(std::string(kControllablePrefix) + name); }

  /// New latch; its next-state literal is set later with set_next().
  Literal latch(std::string name = {}) {
    Literal l = fresh();
    c_.latches.push_back(Latch{l, kFalse, std::move(name)});
    return l;
  }

  void set_next(Literal latch, Literal next) {
    for (auto& la : c_.latches)
      if (la.lit == latch) {
        la.next = next;
        return;
      }
    throw std::invalid_argument("not a latch literal");
  }

  Literal land(Literal a, Literal b) {
    if (a == kFalse || b == kFalse || a == lit_not(b)) return kFalse;
    if (a == kTrue) return b;
    if (b == kTrue || a == b) return a;
    Literal l = fresh();
    c_.ands.push_back(AndGate{l, std::max(a, b), std::min(a, b)});
    return l;
  }

  Literal lor(Literal a, Literal b) { return lit_not(land(lit_not(a), lit_not(b))); }

  Literal lxor(Literal a, Literal b) { return land(lit_not(land(a, b)), lit_not(land(lit_not(a), lit_not(b)))); }

  Literal lxnor(Literal a, Literal b) { return lit_not(lxor(a, b)); }

  Literal mux(Literal sel, Literal then_lit, Literal else_lit) {
    return lor(land(sel, then_lit), land(lit_not(sel), else_lit));
  }

  /// Left-leaning AND chain.
  Literal land_all(const std::vector<Literal>& xs) {
    Literal r = kTrue;
    for (Literal x : xs) r = land(r, x);
    return r;
  }

  /// Disjunction as a negated AND chain of negated terms.
  Literal lor_all(const std::vector<Literal>& xs) {
    std::vector<Literal> neg;
    neg.reserve(xs.size());
    for (Literal x : xs) neg.push_back(lit_not(x));
    return lit_not(land_all(neg));
  }

  // Unsigned little-endian bit vectors.
  using Word = std::vector<Literal>;

  Literal eq_const(const Word& x, std::uint64_t value) {
    std::vector<Literal> bits;
    for (std::size_t i = 0; i < x.size(); ++i) bits.push_back(((value >> i) & 1u) ? x[i] : lit_not(x[i]));
    if (x.size() < 64 && (value >> x.size()) != 0) return kFalse;
    return land_all(bits);
  }

  /// x < value.
  Literal lt_const(const Word& x, std::uint64_t value) {
    if (x.size() < 64 && value >= (std::uint64_t{1} << x.size())) return kTrue;
    // Scan from the most significant bit.
    Literal less = kFalse, equal = kTrue;
    for (std::size_t i = x.size(); i-- > 0;) {
      bool vb = (value >> i) & 1u;
      if (vb) {
        less = lor(less, land(equal, lit_not(x[i])));
        equal = land(equal, x[i]);
      } else {
        equal = land(equal, lit_not(x[i]));
      }
    }
    return less;
  }

  Word const_word(std::size_t width, std::uint64_t value) {
    Word w(width);
    for (std::size_t i = 0; i < width; ++i) w[i] = ((value >> i) & 1u) ? kTrue : kFalse;
    return w;
  }

  /// x + 1, truncated to the width of x.
  Word increment(const Word& x) {
    Word r(x.size());
    Literal carry = kTrue;
    for (std::size_t i = 0; i < x.size(); ++i) {
      r[i] = lxor(x[i], carry);
      carry = land(x[i], carry);
    }
    return r;
  }

  Word mux_word(Literal sel, const Word& a, const Word& b) {
    Word r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = mux(sel, a[i], b[i]);
    return r;
  }

  void output(Literal l, std::string name = {}) { c_.outputs.push_back(Output{l, std::move(name)}); }

  void comment(const std::string& text) { c_.comments += text + "\n"; }

  [[nodiscard]] AigCircuit build() const { return c_; }

 private:
  Literal fresh() {
    if (c_.max_var + 1 >= kMaxVariable) throw std::length_error("too many variables");
    return make_lit(++c_.max_var);
  }

  AigCircuit c_;
};

}  // namespace safegames::aiger
