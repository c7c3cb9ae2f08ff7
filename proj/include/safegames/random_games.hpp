#pragma once

// Seeded generator of small random safety games, used for cross-checking
// solvers against explicit enumeration.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include "safegames/aiger.hpp"
#include "safegames/builder.hpp"

namespace safegames {

struct RandomGameSpec {
  std::size_t max_vars = 12;  ///< bound on |L| + |X_u| + |X_c|
  std::size_t max_latches = 5;
  std::size_t min_gates = 4;
  std::size_t max_gates = 14;
  /// Probability that the error is a disjunction of several gates.
  double p_disjunctive = 0.55;
  /// Probability that the error has a nested and/not/and shape.
  double p_nested = 0.25;
};

/// Seed for randomized corpora: SAFEGAMES_SEED if set, else `fallback`.
inline std::uint64_t corpus_seed(std::uint64_t fallback = 20140601) {
  if (const char* env = std::getenv("SAFEGAMES_SEED")) {
    char* end = nullptr;
    auto v = std::strtoull(env, &end, 10);
    if (end != env) return v;
  }
  return fallback;
}

inline aiger::AigCircuit random_game(std::uint64_t seed, const RandomGameSpec& spec = {}) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  const std::size_t total = uniform(3, spec.max_vars);
  std::size_t nl = uniform(0, std::min(spec.max_latches, total - 2));
  std::size_t nu = uniform(1, total - nl - 1);
  std::size_t nc = uniform(1, total - nl - nu);

  aiger::AigBuilder b;
  std::vector<aiger::Literal> pool;
  for (std::size_t i = 0; i < nu; ++i) pool.push_back(b.input("u" + std::to_string(i)));
  for (std::size_t i = 0; i < nc; ++i) pool.push_back(b.controllable("c" + std::to_string(i)));
  std::vector<aiger::Literal> latches;
  for (std::size_t i = 0; i < nl; ++i) {
    latches.push_back(b.latch("l" + std::to_string(i)));
    pool.push_back(latches.back());
  }
  auto pick = [&]() {
    aiger::Literal l = pool[uniform(0, pool.size() - 1)];
    return coin(0.5) ? aiger::lit_not(l) : l;
  };
  std::vector<aiger::Literal> gates;
  const std::size_t ngates = uniform(spec.min_gates, spec.max_gates);
  for (std::size_t i = 0; i < ngates; ++i) {
    aiger::Literal a = pick(), c = pick();
    aiger::Literal g = b.land(a, c);
    if (g > aiger::kTrue) {
      pool.push_back(g);
      gates.push_back(g);
    }
  }
  for (auto l : latches) b.set_next(l, pick());

  aiger::Literal error;
  double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (r < spec.p_disjunctive && !gates.empty()) {
    std::vector<aiger::Literal> terms;
    std::size_t k = uniform(2, 4);
    for (std::size_t i = 0; i < k; ++i) terms.push_back(coin(0.7) ? gates[uniform(0, gates.size() - 1)] : pick());
    error = b.lor_all(terms);
  } else if (r < spec.p_disjunctive + spec.p_nested) {
    // x & !(y & !(z & w)) and variations.
    aiger::Literal inner = b.land(pick(), pick());
    aiger::Literal mid = b.land(pick(), aiger::lit_not(inner));
    error = b.land(pick(), aiger::lit_not(mid));
  } else {
    error = pick();
  }
  b.output(error, "error");
  return b.build();
}

inline std::vector<aiger::AigCircuit> random_corpus(std::size_t count, std::uint64_t seed,
                                                    const RandomGameSpec& spec = {}) {
  std::vector<aiger::AigCircuit> out;
  out.reserve(count);
  std::mt19937_64 seeds(seed);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_game(seeds(), spec));
  return out;
}

}  // namespace safegames
