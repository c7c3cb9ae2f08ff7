#pragma once

// Two parameterized benchmark families:
//
//  * mult: the controller must output the Boolean product C = A x B of two
//    n x n matrices chosen by the environment in the same step. Each cell of
//    C is checked separately, so the error splits into n^2 independent parts.
//
//  * wash: n tanks, each with a request input. A requested tank must start
//    filling within d steps, a tank must keep filling for at least k steps
//    once started, conflicting tanks may not fill together, and an indicator
//    light must be on exactly when some tank was filling.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "safegames/aiger.hpp"
#include "safegames/builder.hpp"

namespace safegames {

struct MultSpec {
  int n = 2;
};

inline aiger::AigCircuit gen_mult(const MultSpec& spec) {
  const int n = spec.n;
  if (n < 1 || n > 8) throw std::invalid_argument("mult: n must be in [1, 8]");
  aiger::AigBuilder b;
  auto idx = [n](int i, int j) { return static_cast<std::size_t>(i * n + j); };
  std::vector<aiger::Literal> a(static_cast<std::size_t>(n * n)), bm(a.size()), c(a.size());
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) a[idx(i, k)] = b.input("a_" + std::to_string(i) + "_" + std::to_string(k));
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) bm[idx(k, j)] = b.input("b_" + std::to_string(k) + "_" + std::to_string(j));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) c[idx(i, j)] = b.controllable("c_" + std::to_string(i) + "_" + std::to_string(j));

  std::vector<aiger::Literal> cells;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::vector<aiger::Literal> products;
      for (int k = 0; k < n; ++k) products.push_back(b.land(a[idx(i, k)], bm[idx(k, j)]));
      cells.push_back(b.lxor(c[idx(i, j)], b.lor_all(products)));
    }
  b.output(b.lor_all(cells), "error");
  b.comment("mult n=" + std::to_string(n));
  return b.build();
}

struct WashSpec {
  int tanks = 2;
  int min_fill = 1;  ///< k
  int deadline = 2;  ///< d
  /// Pairs of tanks that may not fill at the same time. Defaults to
  /// (0,1), (2,3), ... when empty and `default_conflicts` is set.
  std::vector<std::pair<int, int>> conflicts;
  bool default_conflicts = true;
};

inline std::vector<std::pair<int, int>> wash_conflicts(const WashSpec& spec) {
  if (!spec.conflicts.empty() || !spec.default_conflicts) return spec.conflicts;
  std::vector<std::pair<int, int>> out;
  for (int m = 0; 2 * m + 1 < spec.tanks; ++m) out.emplace_back(2 * m, 2 * m + 1);
  return out;
}

inline std::size_t bits_for(std::uint64_t max_value) {
  std::size_t w = 0;
  while ((std::uint64_t{1} << w) <= max_value) ++w;
  return std::max<std::size_t>(w, 1);
}

inline aiger::AigCircuit gen_wash(const WashSpec& spec) {
  if (spec.tanks < 1 || spec.min_fill < 1 || spec.deadline < 1)
    throw std::invalid_argument("wash: tanks, k and d must be at least 1");
  auto conflicts = wash_conflicts(spec);
  for (auto [i, j] : conflicts)
    if (i < 0 || j < 0 || i >= spec.tanks || j >= spec.tanks || i == j)
      throw std::invalid_argument("wash: conflict pair out of range");

  const auto k = static_cast<std::uint64_t>(spec.min_fill);
  const auto d = static_cast<std::uint64_t>(spec.deadline);
  const std::size_t kw = bits_for(k), dw = bits_for(d);
  aiger::AigBuilder b;
  const auto n = static_cast<std::size_t>(spec.tanks);
  std::vector<aiger::Literal> req(n), fill(n), filled(n);
  std::vector<aiger::AigBuilder::Word> fage(n), page(n);
  for (std::size_t i = 0; i < n; ++i) req[i] = b.input("req_" + std::to_string(i));
  for (std::size_t i = 0; i < n; ++i) fill[i] = b.controllable("fill_" + std::to_string(i));
  aiger::Literal light = b.controllable("light");
  for (std::size_t i = 0; i < n; ++i) {
    filled[i] = b.latch("filled_" + std::to_string(i));
    for (std::size_t bit = 0; bit < kw; ++bit)
      fage[i].push_back(b.latch("fage_" + std::to_string(i) + "_" + std::to_string(bit)));
    for (std::size_t bit = 0; bit < dw; ++bit)
      page[i].push_back(b.latch("page_" + std::to_string(i) + "_" + std::to_string(bit)));
  }

  std::vector<aiger::Literal> errors;
  for (std::size_t i = 0; i < n; ++i) {
    b.set_next(filled[i], fill[i]);

    // Consecutive filling steps, saturating at k.
    auto at_k = b.eq_const(fage[i], k);
    auto bumped = b.mux_word(at_k, b.const_word(kw, k), b.increment(fage[i]));
    auto started = b.mux_word(filled[i], bumped, b.const_word(kw, 1));
    auto fage_next = b.mux_word(fill[i], started, b.const_word(kw, 0));
    for (std::size_t bit = 0; bit < kw; ++bit) b.set_next(fage[i][bit], fage_next[bit]);

    // Age of the oldest pending request, 0 when none, saturating at d.
    auto pending = b.lor_all(page[i]);
    auto at_d = b.eq_const(page[i], d);
    auto aged = b.mux_word(at_d, b.const_word(dw, d), b.increment(page[i]));
    auto fresh = b.mux_word(req[i], b.const_word(dw, 1), b.const_word(dw, 0));
    auto waiting = b.mux_word(pending, aged, fresh);
    auto page_next = b.mux_word(fill[i], b.const_word(dw, 0), waiting);
    for (std::size_t bit = 0; bit < dw; ++bit) b.set_next(page[i][bit], page_next[bit]);

    errors.push_back(b.land(at_d, aiger::lit_not(fill[i])));
    errors.push_back(b.land(b.land(filled[i], aiger::lit_not(fill[i])), b.lt_const(fage[i], k)));
  }
  for (auto [i, j] : conflicts)
    errors.push_back(b.land(filled[static_cast<std::size_t>(i)], filled[static_cast<std::size_t>(j)]));
  errors.push_back(b.lxor(light, b.lor_all(filled)));

  b.output(b.lor_all(errors), "error");
  b.comment("wash tanks=" + std::to_string(spec.tanks) + " k=" + std::to_string(spec.min_fill) +
            " d=" + std::to_string(spec.deadline));
  return b.build();
}

}  // namespace safegames
