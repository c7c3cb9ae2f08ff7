#pragma once

// Reduced ordered BDDs with complement edges, a chained unique table, a lossy
// computed cache and mark-and-sweep collection of unreferenced nodes.
//
// Edges are 32-bit words: (node index << 1) | complement bit. Node 0 is the
// single terminal; the edge 0 denotes true and the edge 1 denotes false. The
// high child of every stored node is a regular (uncomplemented) edge, which
// makes the representation canonical.
//
// Variables are identified with their level: variable v is tested before
// variable w iff v < w. New variables are always appended at the bottom.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace safegames::bdd {

using var_t = std::uint32_t;
using edge_t = std::uint32_t;

inline constexpr edge_t kTrueEdge = 0;
inline constexpr edge_t kFalseEdge = 1;

/// Raised from inside BDD operations when the installed stop flag is set or
/// the installed deadline has passed.
class Interrupted : public std::runtime_error {
 public:
  Interrupted() : std::runtime_error("bdd operation interrupted") {}
};

/// Raised when an operation would grow the node store past its configured cap.
class NodeLimitExceeded : public std::runtime_error {
 public:
  explicit NodeLimitExceeded(std::size_t limit)
      : std::runtime_error("bdd node limit of " + std::to_string(limit) + " exceeded") {}
};

struct ManagerOptions {
  std::size_t max_nodes = std::size_t{1} << 26;
  std::size_t initial_nodes = std::size_t{1} << 12;
  std::size_t max_cache_entries = std::size_t{1} << 23;
  /// Live-node count that triggers the first collection attempt.
  std::size_t gc_threshold = std::size_t{1} << 20;
};

class Manager;

/// Reference-counted handle to a BDD node. A default-constructed handle is
/// "null" and refers to no manager.
class Bdd {
 public:
  Bdd() = default;
  Bdd(Manager* manager, edge_t edge);
  Bdd(const Bdd& other);
  Bdd(Bdd&& other) noexcept;
  Bdd& operator=(const Bdd& other);
  Bdd& operator=(Bdd&& other) noexcept;
  ~Bdd();

  [[nodiscard]] bool valid() const { return manager_ != nullptr; }
  [[nodiscard]] Manager* manager() const { return manager_; }
  [[nodiscard]] edge_t edge() const { return edge_; }

  [[nodiscard]] bool is_true() const { return valid() && edge_ == kTrueEdge; }
  [[nodiscard]] bool is_false() const { return valid() && edge_ == kFalseEdge; }
  [[nodiscard]] bool is_constant() const { return valid() && (edge_ >> 1) == 0; }

  [[nodiscard]] Bdd operator~() const;
  [[nodiscard]] Bdd operator&(const Bdd& other) const;
  [[nodiscard]] Bdd operator|(const Bdd& other) const;
  [[nodiscard]] Bdd operator^(const Bdd& other) const;
  Bdd& operator&=(const Bdd& other) { return *this = *this & other; }
  Bdd& operator|=(const Bdd& other) { return *this = *this | other; }
  Bdd& operator^=(const Bdd& other) { return *this = *this ^ other; }

  /// Handle equality; by canonicity this is functional equivalence.
  bool operator==(const Bdd& other) const {
    return manager_ == other.manager_ && edge_ == other.edge_;
  }

  /// f <= g, i.e. f implies g.
  [[nodiscard]] bool implies(const Bdd& other) const;

  [[nodiscard]] std::size_t node_count() const;
  [[nodiscard]] std::vector<var_t> support() const;
  [[nodiscard]] var_t top_var() const;
  [[nodiscard]] Bdd high() const;
  [[nodiscard]] Bdd low() const;

  /// Evaluates under an assignment indexed by variable; missing entries read as false.
  [[nodiscard]] bool eval(const std::vector<bool>& assignment) const;
  /// Evaluates with every variable set to false.
  [[nodiscard]] bool eval_all_false() const;

 private:
  friend class Manager;
  void acquire();
  void release();

  Manager* manager_ = nullptr;
  edge_t edge_ = 0;
};

/// Variable substitution for compose: pairs (variable, replacement).
using Substitution = std::vector<std::pair<var_t, Bdd>>;

class Manager {
 public:
  explicit Manager(std::size_t num_vars = 0, ManagerOptions options = {});
  Manager(const Manager&) = delete;
  Manager& operator=(const Manager&) = delete;

  var_t new_var() {
    var_t v = static_cast<var_t>(num_vars_++);
    return v;
  }
  [[nodiscard]] std::size_t var_count() const { return num_vars_; }

  Bdd one() { return Bdd(this, kTrueEdge); }
  Bdd zero() { return Bdd(this, kFalseEdge); }
  Bdd var(var_t v);
  Bdd nvar(var_t v) { return ~var(v); }
  /// Positive conjunction of the given variables.
  Bdd cube(std::span<const var_t> vars);

  Bdd apply_and(const Bdd& f, const Bdd& g);
  Bdd apply_or(const Bdd& f, const Bdd& g);
  Bdd apply_xor(const Bdd& f, const Bdd& g);
  Bdd negate(const Bdd& f);
  Bdd ite(const Bdd& f, const Bdd& g, const Bdd& h);

  Bdd exists(const Bdd& f, std::span<const var_t> vars);
  Bdd forall(const Bdd& f, std::span<const var_t> vars);
  /// Quantify over the variables of a positive cube.
  Bdd exists_cube(const Bdd& f, const Bdd& cube);
  Bdd forall_cube(const Bdd& f, const Bdd& cube);

  /// Simultaneous substitution of every listed variable by its replacement.
  Bdd compose(const Bdd& f, const Substitution& substitution);

  /// Generalized cofactor of f with respect to the care set g (the restrict
  /// operator). Never larger than f. With g = false the input is returned
  /// unchanged and a warning is emitted.
  Bdd gencof(const Bdd& f, const Bdd& g);

  std::vector<var_t> support(const Bdd& f);
  std::size_t node_count(const Bdd& f);
  std::size_t node_count(std::span<const Bdd> roots);
  bool eval(const Bdd& f, const std::vector<bool>& assignment) const;

  /// Copies f into another manager, variable for variable.
  Bdd transfer(const Bdd& f, Manager& destination);

  void to_dot(std::ostream& os, const Bdd& f,
              const std::function<std::string(var_t)>& var_name = {}) const;

  // Cooperative cancellation. The flag and deadline are polled every
  // kPollInterval recursive steps.
  static constexpr std::uint64_t kPollInterval = 10000;
  void set_stop_flag(const std::atomic<bool>* flag) { stop_flag_ = flag; }
  void set_deadline(std::optional<std::chrono::steady_clock::time_point> deadline) {
    deadline_ = deadline;
  }
  /// Throws Interrupted if cancellation was requested.
  void poll();

  [[nodiscard]] std::size_t live_nodes() const { return live_; }
  [[nodiscard]] std::size_t peak_nodes() const { return peak_live_; }
  [[nodiscard]] std::size_t gc_runs() const { return gc_runs_; }
  [[nodiscard]] std::size_t warnings() const { return warnings_; }

  /// Forces a collection of nodes unreachable from live handles.
  void collect_garbage();

  /// Structural self-check: canonical triples, ordering, regular high edges.
  [[nodiscard]] bool check_invariants() const;

  // Raw edge accessors, used by handles and by tools that walk graphs.
  [[nodiscard]] var_t level(edge_t e) const { return nodes_[e >> 1].var; }
  [[nodiscard]] edge_t high(edge_t e) const { return nodes_[e >> 1].hi ^ (e & 1u); }
  [[nodiscard]] edge_t low(edge_t e) const { return nodes_[e >> 1].lo ^ (e & 1u); }

 private:
  friend class Bdd;

  static constexpr var_t kTerminalLevel = std::numeric_limits<var_t>::max();
  static constexpr var_t kFreeLevel = std::numeric_limits<var_t>::max() - 1;

  enum class Op : std::uint32_t { kAnd = 1, kXor, kIte, kExists, kRestrict };

  struct Node {
    var_t var;
    edge_t hi;
    edge_t lo;
    std::uint32_t next;  // unique-table chain, or free-list link
    std::uint32_t refs;  // external references held by handles
  };

  struct CacheEntry {
    std::uint32_t op = 0;
    edge_t a = 0;
    edge_t b = 0;
    edge_t c = 0;
    edge_t result = 0;
  };

  static bool is_const(edge_t e) { return (e >> 1) == 0; }

  void ref(edge_t e) {
    auto& n = nodes_[e >> 1];
    if (n.refs != std::numeric_limits<std::uint32_t>::max()) ++n.refs;
  }
  void deref(edge_t e) {
    auto& n = nodes_[e >> 1];
    if (n.refs != std::numeric_limits<std::uint32_t>::max() && n.refs > 0) --n.refs;
  }

  void check_owner(const Bdd& f) const {
    if (f.manager_ != this) throw std::invalid_argument("bdd belongs to a different manager");
  }

  void tick() {
    if (++steps_ % kPollInterval == 0) poll();
  }

  /// Runs before each public operation; the only place collection may happen.
  void prepare();

  static std::size_t hash3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = a * 0x9E3779B97F4A7C15ull;
    h ^= b + 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
    h ^= c * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }

  edge_t make(var_t v, edge_t hi, edge_t lo);
  std::uint32_t allocate();
  void grow_buckets();
  void maybe_grow_cache();

  bool cache_lookup(Op op, edge_t a, edge_t b, edge_t c, edge_t& out) const {
    const auto& e = cache_[hash3(a ^ (static_cast<std::uint64_t>(op) << 32), b, c) & cache_mask_];
    if (e.op == static_cast<std::uint32_t>(op) && e.a == a && e.b == b && e.c == c) {
      out = e.result;
      return true;
    }
    return false;
  }
  void cache_store(Op op, edge_t a, edge_t b, edge_t c, edge_t result) {
    auto& e = cache_[hash3(a ^ (static_cast<std::uint64_t>(op) << 32), b, c) & cache_mask_];
    e = CacheEntry{static_cast<std::uint32_t>(op), a, b, c, result};
  }

  edge_t var_edge(var_t v);
  edge_t and_rec(edge_t f, edge_t g);
  edge_t or_rec(edge_t f, edge_t g) { return and_rec(f ^ 1u, g ^ 1u) ^ 1u; }
  edge_t xor_rec(edge_t f, edge_t g);
  edge_t ite_rec(edge_t f, edge_t g, edge_t h);
  edge_t exists_rec(edge_t f, edge_t cube);
  edge_t restrict_rec(edge_t f, edge_t c);
  edge_t compose_rec(edge_t f, const std::vector<edge_t>& subst, var_t max_level,
                     std::unordered_map<edge_t, edge_t>& memo);
  edge_t cube_rec(std::span<const var_t> sorted_vars);

  std::size_t count_nodes(std::span<const edge_t> roots) const;

  ManagerOptions options_;
  std::size_t num_vars_ = 0;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> buckets_;
  std::size_t bucket_mask_ = 0;
  std::uint32_t free_head_ = 0;
  std::size_t live_ = 0;
  std::size_t peak_live_ = 0;
  std::size_t gc_threshold_ = 0;
  std::size_t gc_runs_ = 0;
  std::size_t warnings_ = 0;

  std::vector<CacheEntry> cache_;
  std::size_t cache_mask_ = 0;

  const std::atomic<bool>* stop_flag_ = nullptr;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
  std::uint64_t steps_ = 0;
};

// ---------------------------------------------------------------------------
// Manager

inline Manager::Manager(std::size_t num_vars, ManagerOptions options)
    : options_(options), num_vars_(num_vars) {
  nodes_.reserve(std::max<std::size_t>(options_.initial_nodes, 16));
  nodes_.push_back(Node{kTerminalLevel, 0, 0, 0, std::numeric_limits<std::uint32_t>::max()});
  std::size_t buckets = 1;
  while (buckets < options_.initial_nodes) buckets <<= 1;
  buckets_.assign(buckets, 0);
  bucket_mask_ = buckets - 1;
  std::size_t cache = std::min<std::size_t>(buckets, options_.max_cache_entries);
  cache_.assign(cache, CacheEntry{});
  cache_mask_ = cache - 1;
  gc_threshold_ = options_.gc_threshold;
}

inline void Manager::poll() {
  if (stop_flag_ != nullptr && stop_flag_->load(std::memory_order_relaxed)) throw Interrupted();
  if (deadline_ && std::chrono::steady_clock::now() >= *deadline_) throw Interrupted();
}

inline void Manager::prepare() {
  if (free_head_ == 0 && live_ >= gc_threshold_) {
    collect_garbage();
    // Keep collections amortized: if most nodes survived, wait longer next time.
    if (live_ * 2 > gc_threshold_) gc_threshold_ *= 2;
  }
  maybe_grow_cache();
}

inline std::uint32_t Manager::allocate() {
  if (free_head_ != 0) {
    std::uint32_t idx = free_head_;
    free_head_ = nodes_[idx].next;
    return idx;
  }
  if (nodes_.size() >= options_.max_nodes) throw NodeLimitExceeded(options_.max_nodes);
  nodes_.push_back(Node{});
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

inline void Manager::grow_buckets() {
  std::size_t size = buckets_.size() * 2;
  buckets_.assign(size, 0);
  bucket_mask_ = size - 1;
  for (std::uint32_t i = 1; i < nodes_.size(); ++i) {
    auto& n = nodes_[i];
    if (n.var == kFreeLevel) continue;
    std::size_t slot = hash3(n.var, n.hi, n.lo) & bucket_mask_;
    n.next = buckets_[slot];
    buckets_[slot] = i;
  }
  maybe_grow_cache();
}

inline void Manager::maybe_grow_cache() {
  if (cache_.size() >= options_.max_cache_entries) return;
  if (live_ <= cache_.size()) return;
  std::size_t size = cache_.size();
  while (size < live_ && size < options_.max_cache_entries) size <<= 1;
  cache_.assign(size, CacheEntry{});
  cache_mask_ = size - 1;
}

inline edge_t Manager::make(var_t v, edge_t hi, edge_t lo) {
  if (hi == lo) return hi;
  edge_t mark = hi & 1u;
  hi ^= mark;
  lo ^= mark;
  std::size_t slot = hash3(v, hi, lo) & bucket_mask_;
  for (std::uint32_t i = buckets_[slot]; i != 0; i = nodes_[i].next) {
    const auto& n = nodes_[i];
    if (n.var == v && n.hi == hi && n.lo == lo) return (i << 1) | mark;
  }
  std::uint32_t idx = allocate();
  nodes_[idx] = Node{v, hi, lo, buckets_[slot], 0};
  buckets_[slot] = idx;
  ++live_;
  peak_live_ = std::max(peak_live_, live_);
  if (live_ > buckets_.size()) grow_buckets();
  return (idx << 1) | mark;
}

inline void Manager::collect_garbage() {
  std::vector<std::uint8_t> marked(nodes_.size(), 0);
  std::vector<std::uint32_t> stack;
  marked[0] = 1;
  for (std::uint32_t i = 1; i < nodes_.size(); ++i) {
    if (nodes_[i].var == kFreeLevel || nodes_[i].refs == 0 || marked[i]) continue;
    stack.push_back(i);
    marked[i] = 1;
    while (!stack.empty()) {
      std::uint32_t n = stack.back();
      stack.pop_back();
      for (edge_t child : {nodes_[n].hi, nodes_[n].lo}) {
        std::uint32_t c = child >> 1;
        if (!marked[c]) {
          marked[c] = 1;
          stack.push_back(c);
        }
      }
    }
  }
  std::fill(buckets_.begin(), buckets_.end(), 0);
  free_head_ = 0;
  live_ = 0;
  for (std::uint32_t i = static_cast<std::uint32_t>(nodes_.size()) - 1; i >= 1; --i) {
    auto& n = nodes_[i];
    if (marked[i]) {
      std::size_t slot = hash3(n.var, n.hi, n.lo) & bucket_mask_;
      n.next = buckets_[slot];
      buckets_[slot] = i;
      ++live_;
    } else {
      n.var = kFreeLevel;
      n.refs = 0;
      n.next = free_head_;
      free_head_ = i;
    }
  }
  std::fill(cache_.begin(), cache_.end(), CacheEntry{});
  ++gc_runs_;
}

inline edge_t Manager::var_edge(var_t v) { return make(v, kTrueEdge, kFalseEdge); }

inline Bdd Manager::var(var_t v) {
  if (v >= num_vars_) throw std::out_of_range("unknown bdd variable " + std::to_string(v));
  prepare();
  return Bdd(this, var_edge(v));
}

inline edge_t Manager::cube_rec(std::span<const var_t> sorted_vars) {
  edge_t r = kTrueEdge;
  for (auto it = sorted_vars.rbegin(); it != sorted_vars.rend(); ++it) r = make(*it, r, kFalseEdge);
  return r;
}

inline Bdd Manager::cube(std::span<const var_t> vars) {
  std::vector<var_t> sorted(vars.begin(), vars.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (var_t v : sorted)
    if (v >= num_vars_) throw std::out_of_range("unknown bdd variable " + std::to_string(v));
  prepare();
  return Bdd(this, cube_rec(sorted));
}

inline edge_t Manager::and_rec(edge_t f, edge_t g) {
  if (f == g) return f;
  if (f == (g ^ 1u)) return kFalseEdge;
  if (f == kTrueEdge) return g;
  if (g == kTrueEdge) return f;
  if (f == kFalseEdge || g == kFalseEdge) return kFalseEdge;
  if (f > g) std::swap(f, g);
  edge_t r;
  if (cache_lookup(Op::kAnd, f, g, 0, r)) return r;
  tick();
  var_t lf = level(f), lg = level(g);
  var_t v = std::min(lf, lg);
  edge_t fh = lf == v ? high(f) : f, fl = lf == v ? low(f) : f;
  edge_t gh = lg == v ? high(g) : g, gl = lg == v ? low(g) : g;
  edge_t h = and_rec(fh, gh);
  edge_t l = and_rec(fl, gl);
  r = make(v, h, l);
  cache_store(Op::kAnd, f, g, 0, r);
  return r;
}

inline edge_t Manager::xor_rec(edge_t f, edge_t g) {
  if (f == g) return kFalseEdge;
  if (f == (g ^ 1u)) return kTrueEdge;
  if (f == kFalseEdge) return g;
  if (g == kFalseEdge) return f;
  if (f == kTrueEdge) return g ^ 1u;
  if (g == kTrueEdge) return f ^ 1u;
  edge_t mark = (f ^ g) & 1u;
  f &= ~1u;
  g &= ~1u;
  if (f > g) std::swap(f, g);
  edge_t r;
  if (cache_lookup(Op::kXor, f, g, 0, r)) return r ^ mark;
  tick();
  var_t lf = level(f), lg = level(g);
  var_t v = std::min(lf, lg);
  edge_t fh = lf == v ? high(f) : f, fl = lf == v ? low(f) : f;
  edge_t gh = lg == v ? high(g) : g, gl = lg == v ? low(g) : g;
  edge_t h = xor_rec(fh, gh);
  edge_t l = xor_rec(fl, gl);
  r = make(v, h, l);
  cache_store(Op::kXor, f, g, 0, r);
  return r ^ mark;
}

inline edge_t Manager::ite_rec(edge_t f, edge_t g, edge_t h) {
  if (f == kTrueEdge) return g;
  if (f == kFalseEdge) return h;
  if (g == f) g = kTrueEdge;
  else if (g == (f ^ 1u)) g = kFalseEdge;
  if (h == f) h = kFalseEdge;
  else if (h == (f ^ 1u)) h = kTrueEdge;
  if (g == h) return g;
  if (g == kTrueEdge && h == kFalseEdge) return f;
  if (g == kFalseEdge && h == kTrueEdge) return f ^ 1u;
  if (g == kTrueEdge) return or_rec(f, h);
  if (g == kFalseEdge) return and_rec(f ^ 1u, h);
  if (h == kFalseEdge) return and_rec(f, g);
  if (h == kTrueEdge) return or_rec(f ^ 1u, g);
  // Normalize: regular condition, regular then-branch.
  if (f & 1u) {
    f ^= 1u;
    std::swap(g, h);
  }
  edge_t mark = g & 1u;
  g ^= mark;
  h ^= mark;
  edge_t r;
  if (cache_lookup(Op::kIte, f, g, h, r)) return r ^ mark;
  tick();
  var_t lf = level(f), lg = level(g), lh = level(h);
  var_t v = std::min({lf, lg, lh});
  edge_t fh = lf == v ? high(f) : f, fl = lf == v ? low(f) : f;
  edge_t gh = lg == v ? high(g) : g, gl = lg == v ? low(g) : g;
  edge_t hh = lh == v ? high(h) : h, hl = lh == v ? low(h) : h;
  edge_t t = ite_rec(fh, gh, hh);
  edge_t e = ite_rec(fl, gl, hl);
  r = make(v, t, e);
  cache_store(Op::kIte, f, g, h, r);
  return r ^ mark;
}

inline edge_t Manager::exists_rec(edge_t f, edge_t cube) {
  if (is_const(f)) return f;
  var_t lf = level(f);
  while (cube != kTrueEdge && level(cube) < lf) cube = high(cube);
  if (cube == kTrueEdge) return f;
  edge_t r;
  if (cache_lookup(Op::kExists, f, cube, 0, r)) return r;
  tick();
  if (level(cube) == lf) {
    edge_t rest = high(cube);
    edge_t t = exists_rec(high(f), rest);
    r = t == kTrueEdge ? kTrueEdge : or_rec(t, exists_rec(low(f), rest));
  } else {
    edge_t t = exists_rec(high(f), cube);
    edge_t e = exists_rec(low(f), cube);
    r = make(lf, t, e);
  }
  cache_store(Op::kExists, f, cube, 0, r);
  return r;
}

inline edge_t Manager::restrict_rec(edge_t f, edge_t c) {
  if (c == kTrueEdge || is_const(f)) return f;
  if (f == c) return kTrueEdge;
  if (f == (c ^ 1u)) return kFalseEdge;
  edge_t r;
  if (cache_lookup(Op::kRestrict, f, c, 0, r)) return r;
  tick();
  var_t lf = level(f), lc = level(c);
  if (lc < lf) {
    // The care set tests a variable f does not depend on at this point:
    // abstract it from the care set.
    r = restrict_rec(f, or_rec(high(c), low(c)));
  } else {
    var_t v = lf;
    edge_t ch = lc == v ? high(c) : c, cl = lc == v ? low(c) : c;
    if (ch == kFalseEdge) {
      r = restrict_rec(low(f), cl);
    } else if (cl == kFalseEdge) {
      r = restrict_rec(high(f), ch);
    } else {
      edge_t t = restrict_rec(high(f), ch);
      edge_t e = restrict_rec(low(f), cl);
      r = make(v, t, e);
    }
  }
  cache_store(Op::kRestrict, f, c, 0, r);
  return r;
}

inline edge_t Manager::compose_rec(edge_t f, const std::vector<edge_t>& subst, var_t max_level,
                                   std::unordered_map<edge_t, edge_t>& memo) {
  if (is_const(f)) return f;
  var_t v = level(f);
  if (v > max_level) return f;
  edge_t mark = f & 1u;
  edge_t reg = f ^ mark;
  if (auto it = memo.find(reg); it != memo.end()) return it->second ^ mark;
  tick();
  edge_t t = compose_rec(high(reg), subst, max_level, memo);
  edge_t e = compose_rec(low(reg), subst, max_level, memo);
  edge_t s = subst[v] == std::numeric_limits<edge_t>::max() ? var_edge(v) : subst[v];
  edge_t r = ite_rec(s, t, e);
  memo.emplace(reg, r);
  return r ^ mark;
}

inline Bdd Manager::apply_and(const Bdd& f, const Bdd& g) {
  check_owner(f);
  check_owner(g);
  prepare();
  return Bdd(this, and_rec(f.edge_, g.edge_));
}

inline Bdd Manager::apply_or(const Bdd& f, const Bdd& g) {
  check_owner(f);
  check_owner(g);
  prepare();
  return Bdd(this, or_rec(f.edge_, g.edge_));
}

inline Bdd Manager::apply_xor(const Bdd& f, const Bdd& g) {
  check_owner(f);
  check_owner(g);
  prepare();
  return Bdd(this, xor_rec(f.edge_, g.edge_));
}

inline Bdd Manager::negate(const Bdd& f) {
  check_owner(f);
  return Bdd(this, f.edge_ ^ 1u);
}

inline Bdd Manager::ite(const Bdd& f, const Bdd& g, const Bdd& h) {
  check_owner(f);
  check_owner(g);
  check_owner(h);
  prepare();
  return Bdd(this, ite_rec(f.edge_, g.edge_, h.edge_));
}

inline Bdd Manager::exists_cube(const Bdd& f, const Bdd& cube) {
  check_owner(f);
  check_owner(cube);
  prepare();
  return Bdd(this, exists_rec(f.edge_, cube.edge_));
}

inline Bdd Manager::forall_cube(const Bdd& f, const Bdd& cube) {
  check_owner(f);
  check_owner(cube);
  prepare();
  return Bdd(this, exists_rec(f.edge_ ^ 1u, cube.edge_) ^ 1u);
}

inline Bdd Manager::exists(const Bdd& f, std::span<const var_t> vars) {
  Bdd c = cube(vars);
  return exists_cube(f, c);
}

inline Bdd Manager::forall(const Bdd& f, std::span<const var_t> vars) {
  Bdd c = cube(vars);
  return forall_cube(f, c);
}

inline Bdd Manager::compose(const Bdd& f, const Substitution& substitution) {
  check_owner(f);
  constexpr edge_t kIdentity = std::numeric_limits<edge_t>::max();
  std::vector<edge_t> subst(num_vars_, kIdentity);
  var_t max_level = 0;
  bool any = false;
  for (const auto& [v, g] : substitution) {
    check_owner(g);
    if (v >= num_vars_) throw std::out_of_range("unknown bdd variable " + std::to_string(v));
    subst[v] = g.edge_;
    max_level = std::max(max_level, v);
    any = true;
  }
  if (!any) return f;
  prepare();
  std::unordered_map<edge_t, edge_t> memo;
  return Bdd(this, compose_rec(f.edge_, subst, max_level, memo));
}

inline Bdd Manager::gencof(const Bdd& f, const Bdd& g) {
  check_owner(f);
  check_owner(g);
  if (g.edge_ == kFalseEdge) {
    ++warnings_;
    std::cerr << "warning: generalized cofactor with an empty care set; returning input\n";
    return f;
  }
  prepare();
  Bdd r(this, restrict_rec(f.edge_, g.edge_));
  if (node_count(r) > node_count(f)) return f;
  return r;
}

inline std::vector<var_t> Manager::support(const Bdd& f) {
  check_owner(f);
  std::vector<std::uint8_t> seen_var(num_vars_, 0);
  std::unordered_map<std::uint32_t, bool> visited;
  std::vector<std::uint32_t> stack{f.edge_ >> 1};
  while (!stack.empty()) {
    std::uint32_t n = stack.back();
    stack.pop_back();
    if (n == 0 || !visited.emplace(n, true).second) continue;
    seen_var[nodes_[n].var] = 1;
    stack.push_back(nodes_[n].hi >> 1);
    stack.push_back(nodes_[n].lo >> 1);
  }
  std::vector<var_t> out;
  for (var_t v = 0; v < num_vars_; ++v)
    if (seen_var[v]) out.push_back(v);
  return out;
}

inline std::size_t Manager::count_nodes(std::span<const edge_t> roots) const {
  std::unordered_map<std::uint32_t, bool> visited;
  std::vector<std::uint32_t> stack;
  for (edge_t r : roots) stack.push_back(r >> 1);
  std::size_t count = 0;
  while (!stack.empty()) {
    std::uint32_t n = stack.back();
    stack.pop_back();
    if (n == 0 || !visited.emplace(n, true).second) continue;
    ++count;
    stack.push_back(nodes_[n].hi >> 1);
    stack.push_back(nodes_[n].lo >> 1);
  }
  return count;
}

inline std::size_t Manager::node_count(const Bdd& f) {
  check_owner(f);
  edge_t e = f.edge_;
  return count_nodes(std::span<const edge_t>(&e, 1));
}

inline std::size_t Manager::node_count(std::span<const Bdd> roots) {
  std::vector<edge_t> edges;
  for (const auto& r : roots) {
    check_owner(r);
    edges.push_back(r.edge_);
  }
  return count_nodes(edges);
}

inline bool Manager::eval(const Bdd& f, const std::vector<bool>& assignment) const {
  check_owner(f);
  edge_t e = f.edge_;
  while (!is_const(e)) {
    var_t v = level(e);
    bool bit = v < assignment.size() && assignment[v];
    e = bit ? high(e) : low(e);
  }
  return e == kTrueEdge;
}

inline Bdd Manager::transfer(const Bdd& f, Manager& destination) {
  check_owner(f);
  if (&destination == this) return f;
  if (destination.num_vars_ < num_vars_) destination.num_vars_ = num_vars_;
  destination.prepare();
  std::unordered_map<std::uint32_t, edge_t> memo;
  // Iterative post-order over regular nodes.
  std::vector<std::pair<std::uint32_t, bool>> stack{{f.edge_ >> 1, false}};
  memo.emplace(0, kTrueEdge);
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if (memo.count(n)) continue;
    const auto& node = nodes_[n];
    if (!expanded) {
      stack.emplace_back(n, true);
      stack.emplace_back(node.hi >> 1, false);
      stack.emplace_back(node.lo >> 1, false);
      continue;
    }
    destination.tick();
    edge_t hi = memo.at(node.hi >> 1) ^ (node.hi & 1u);
    edge_t lo = memo.at(node.lo >> 1) ^ (node.lo & 1u);
    memo.emplace(n, destination.make(node.var, hi, lo));
  }
  return Bdd(&destination, memo.at(f.edge_ >> 1) ^ (f.edge_ & 1u));
}

inline void Manager::to_dot(std::ostream& os, const Bdd& f,
                            const std::function<std::string(var_t)>& var_name) const {
  check_owner(f);
  os << "digraph bdd {\n";
  os << "  root [shape=plaintext,label=\"f\"];\n";
  os << "  n0 [shape=box,label=\"1\"];\n";
  os << "  root -> n" << (f.edge_ >> 1) << ((f.edge_ & 1u) ? " [arrowhead=odot]" : "") << ";\n";
  std::unordered_map<std::uint32_t, bool> visited;
  std::vector<std::uint32_t> stack{f.edge_ >> 1};
  while (!stack.empty()) {
    std::uint32_t n = stack.back();
    stack.pop_back();
    if (n == 0 || !visited.emplace(n, true).second) continue;
    const auto& node = nodes_[n];
    std::string label = var_name ? var_name(node.var) : "x" + std::to_string(node.var);
    os << "  n" << n << " [label=\"" << label << "\"];\n";
    os << "  n" << n << " -> n" << (node.hi >> 1) << ";\n";
    os << "  n" << n << " -> n" << (node.lo >> 1) << " [style=dashed"
       << ((node.lo & 1u) ? ",arrowhead=odot" : "") << "];\n";
    stack.push_back(node.hi >> 1);
    stack.push_back(node.lo >> 1);
  }
  os << "}\n";
}

inline bool Manager::check_invariants() const {
  std::unordered_map<std::uint64_t, std::uint32_t> seen;
  for (std::uint32_t i = 1; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.var == kFreeLevel) continue;
    if (n.hi == n.lo) return false;
    if (n.hi & 1u) return false;
    if (level(n.hi) <= n.var || level(n.lo) <= n.var) return false;
    std::uint64_t key = hash3(n.var, n.hi, n.lo) ^ (static_cast<std::uint64_t>(n.hi) << 32) ^ n.lo;
    auto [it, inserted] = seen.emplace(key, i);
    if (!inserted) {
      const auto& m = nodes_[it->second];
      if (m.var == n.var && m.hi == n.hi && m.lo == n.lo) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Bdd handle

inline Bdd::Bdd(Manager* manager, edge_t edge) : manager_(manager), edge_(edge) { acquire(); }
inline Bdd::Bdd(const Bdd& other) : manager_(other.manager_), edge_(other.edge_) { acquire(); }
inline Bdd::Bdd(Bdd&& other) noexcept : manager_(other.manager_), edge_(other.edge_) {
  other.manager_ = nullptr;
}
inline Bdd& Bdd::operator=(const Bdd& other) {
  if (this != &other) {
    Bdd tmp(other);
    std::swap(manager_, tmp.manager_);
    std::swap(edge_, tmp.edge_);
  }
  return *this;
}
inline Bdd& Bdd::operator=(Bdd&& other) noexcept {
  if (this != &other) {
    release();
    manager_ = other.manager_;
    edge_ = other.edge_;
    other.manager_ = nullptr;
  }
  return *this;
}
inline Bdd::~Bdd() { release(); }

inline void Bdd::acquire() {
  if (manager_ != nullptr) manager_->ref(edge_);
}
inline void Bdd::release() {
  if (manager_ != nullptr) manager_->deref(edge_);
  manager_ = nullptr;
}

inline Bdd Bdd::operator~() const { return manager_->negate(*this); }

inline Bdd Bdd::operator&(const Bdd& other) const {
  if (manager_ == nullptr) throw std::invalid_argument("null bdd");
  return manager_->apply_and(*this, other);
}
inline Bdd Bdd::operator|(const Bdd& other) const {
  if (manager_ == nullptr) throw std::invalid_argument("null bdd");
  return manager_->apply_or(*this, other);
}
inline Bdd Bdd::operator^(const Bdd& other) const {
  if (manager_ == nullptr) throw std::invalid_argument("null bdd");
  return manager_->apply_xor(*this, other);
}

inline bool Bdd::implies(const Bdd& other) const { return (*this & ~other).is_false(); }

inline std::size_t Bdd::node_count() const { return manager_->node_count(*this); }
inline std::vector<var_t> Bdd::support() const { return manager_->support(*this); }
inline var_t Bdd::top_var() const { return manager_->level(edge_); }
inline Bdd Bdd::high() const {
  return is_constant() ? *this : Bdd(manager_, manager_->high(edge_));
}
inline Bdd Bdd::low() const { return is_constant() ? *this : Bdd(manager_, manager_->low(edge_)); }
inline bool Bdd::eval(const std::vector<bool>& assignment) const {
  return manager_->eval(*this, assignment);
}
inline bool Bdd::eval_all_false() const {
  edge_t e = edge_;
  while ((e >> 1) != 0) e = manager_->low(e);
  return e == kTrueEdge;
}

}  // namespace safegames::bdd

template <>
struct std::hash<safegames::bdd::Bdd> {
  std::size_t operator()(const safegames::bdd::Bdd& f) const noexcept {
    return std::hash<std::uintptr_t>()(reinterpret_cast<std::uintptr_t>(f.manager())) ^
           (static_cast<std::size_t>(f.edge()) * 0x9E3779B97F4A7C15ull);
  }
};
