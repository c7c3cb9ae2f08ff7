#pragma once

// Reader and writer for the AIGER format (ASCII "aag" and binary "aig"),
// restricted to what safety games need: inputs, latches reset to zero,
// outputs, AND gates, a symbol table and a comment section.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace safegames::aiger {

using Literal = std::uint32_t;

inline constexpr Literal kFalse = 0;
inline constexpr Literal kTrue = 1;
inline constexpr std::uint32_t kMaxVariable = std::uint32_t{1} << 28;
inline constexpr std::string_view kControllablePrefix = "controllable_";

constexpr std::uint32_t lit_var(Literal l) { return l >> 1; }
constexpr bool lit_negated(Literal l) { return (l & 1u) != 0; }
constexpr Literal make_lit(std::uint32_t var, bool negated = false) {
  return (var << 1) | (negated ? 1u : 0u);
}
constexpr Literal lit_not(Literal l) { return l ^ 1u; }
constexpr Literal lit_regular(Literal l) { return l & ~1u; }

struct Input {
  Literal lit = 0;
  std::string name;
  bool operator==(const Input&) const = default;
};

struct Latch {
  Literal lit = 0;
  Literal next = 0;
  std::string name;
  bool operator==(const Latch&) const = default;
};

struct Output {
  Literal lit = 0;
  std::string name;
  bool operator==(const Output&) const = default;
};

struct AndGate {
  Literal lhs = 0;
  Literal rhs0 = 0;
  Literal rhs1 = 0;
  bool operator==(const AndGate&) const = default;
};

struct AigCircuit {
  std::uint32_t max_var = 0;
  std::vector<Input> inputs;
  std::vector<Latch> latches;
  std::vector<Output> outputs;
  std::vector<AndGate> ands;
  std::string comments;

  bool operator==(const AigCircuit&) const = default;

  /// The single output used as the error function of a game.
  [[nodiscard]] Literal error() const {
    if (outputs.size() != 1) throw std::logic_error("circuit does not have exactly one output");
    return outputs.front().lit;
  }
};

struct InputClassification {
  std::vector<Literal> controllable;
  std::vector<Literal> uncontrollable;
};

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error("aiger: " + what) {}
};

enum class ParseMode {
  kGame,     ///< exactly one output required
  kGeneral,  ///< any number of outputs
};

namespace detail {

class Cursor {
 public:
  explicit Cursor(std::string_view data) : data_(data) {}

  [[nodiscard]] bool at_end() const { return pos_ >= data_.size(); }
  [[nodiscard]] std::size_t pos() const { return pos_; }
  [[nodiscard]] std::string_view rest() const { return data_.substr(pos_); }
  [[nodiscard]] std::size_t line() const { return line_; }

  std::string_view read_line() {
    if (at_end()) throw ParseError("unexpected end of input at line " + std::to_string(line_));
    std::size_t end = data_.find('\n', pos_);
    if (end == std::string_view::npos) end = data_.size();
    std::string_view out = data_.substr(pos_, end - pos_);
    pos_ = end < data_.size() ? end + 1 : end;
    ++line_;
    if (!out.empty() && out.back() == '\r') out.remove_suffix(1);
    return out;
  }

  unsigned char read_byte() {
    if (at_end()) throw ParseError("unexpected end of binary and-gate section");
    return static_cast<unsigned char>(data_[pos_++]);
  }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

inline std::vector<std::uint64_t> parse_numbers(std::string_view line, std::size_t lineno) {
  std::vector<std::uint64_t> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ') {
      ++i;
      continue;
    }
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(line.data() + i, line.data() + line.size(), value);
    if (ec != std::errc() || ptr == line.data() + i)
      throw ParseError("expected unsigned integer at line " + std::to_string(lineno));
    i = static_cast<std::size_t>(ptr - line.data());
    if (i < line.size() && line[i] != ' ')
      throw ParseError("unexpected character at line " + std::to_string(lineno));
    out.push_back(value);
  }
  return out;
}

inline std::uint64_t decode_varint(Cursor& cur) {
  std::uint64_t x = 0;
  int shift = 0;
  while (true) {
    unsigned char ch = cur.read_byte();
    if (shift > 35) throw ParseError("binary delta overflow");
    x |= static_cast<std::uint64_t>(ch & 0x7fu) << shift;
    if ((ch & 0x80u) == 0) return x;
    shift += 7;
  }
}

inline void encode_varint(std::string& out, std::uint32_t x) {
  while (x & ~0x7fu) {
    out.push_back(static_cast<char>((x & 0x7fu) | 0x80u));
    x >>= 7;
  }
  out.push_back(static_cast<char>(x));
}

}  // namespace detail

/// Checks the structural invariants shared by both encodings. Throws ParseError.
inline void validate(const AigCircuit& c, ParseMode mode = ParseMode::kGeneral) {
  if (c.max_var > kMaxVariable) throw ParseError("maximum variable index exceeds 2^28");
  const Literal max_lit = 2 * c.max_var + 1;
  std::vector<std::uint8_t> defined(c.max_var + 1, 0);
  auto define = [&](Literal l, const char* what) {
    if (lit_negated(l) || l < 2 || l > max_lit)
      throw ParseError(std::string("invalid ") + what + " literal " + std::to_string(l));
    if (defined[lit_var(l)]) throw ParseError("variable " + std::to_string(lit_var(l)) + " defined twice");
    defined[lit_var(l)] = 1;
  };
  for (const auto& in : c.inputs) define(in.lit, "input");
  for (const auto& la : c.latches) define(la.lit, "latch");
  for (const auto& g : c.ands) define(g.lhs, "and");
  auto use = [&](Literal l) {
    if (l > max_lit) throw ParseError("literal " + std::to_string(l) + " out of range");
    if (lit_var(l) != 0 && !defined[lit_var(l)])
      throw ParseError("literal " + std::to_string(l) + " refers to an undefined variable");
  };
  for (const auto& la : c.latches) use(la.next);
  for (const auto& o : c.outputs) use(o.lit);
  for (const auto& g : c.ands) {
    use(g.rhs0);
    use(g.rhs1);
    if (g.lhs <= g.rhs0 || g.lhs <= g.rhs1)
      throw ParseError("and gate " + std::to_string(g.lhs) + " is not above its operands");
  }
  if (mode == ParseMode::kGame && c.outputs.size() != 1)
    throw ParseError("a game needs exactly one output, found " + std::to_string(c.outputs.size()));
}

inline AigCircuit parse(std::string_view bytes, ParseMode mode = ParseMode::kGame) {
  detail::Cursor cur(bytes);
  std::string_view header = cur.read_line();
  bool binary;
  if (header.substr(0, 4) == "aag ") {
    binary = false;
  } else if (header.substr(0, 4) == "aig ") {
    binary = true;
  } else {
    throw ParseError("missing 'aag' or 'aig' header");
  }
  auto fields = detail::parse_numbers(header.substr(4), 1);
  if (fields.size() < 5) throw ParseError("header needs M I L O A");
  for (std::size_t i = 5; i < fields.size(); ++i)
    if (fields[i] != 0) throw ParseError("bad, constraint, justice and fairness sections are not supported");
  if (fields.size() > 9) throw ParseError("too many header fields");
  const std::uint64_t M = fields[0], I = fields[1], L = fields[2], O = fields[3], A = fields[4];
  if (M > kMaxVariable) throw ParseError("maximum variable index exceeds 2^28");
  if (binary && M != I + L + A) throw ParseError("binary header requires M = I + L + A");
  if (I > M || L > M || A > M || I + L + A > M)
    throw ParseError("header counts exceed maximum variable index");

  AigCircuit c;
  c.max_var = static_cast<std::uint32_t>(M);
  c.inputs.resize(I);
  c.latches.resize(L);
  c.outputs.resize(O);
  c.ands.resize(A);

  auto expect = [&](std::string_view line, std::size_t lo, std::size_t hi) {
    auto nums = detail::parse_numbers(line, cur.line() - 1);
    if (nums.size() < lo || nums.size() > hi)
      throw ParseError("wrong number of fields at line " + std::to_string(cur.line() - 1));
    for (auto n : nums)
      if (n > 2 * M + 1) throw ParseError("literal out of range at line " + std::to_string(cur.line() - 1));
    return nums;
  };

  for (std::uint64_t i = 0; i < I; ++i) {
    if (binary) {
      c.inputs[i].lit = make_lit(static_cast<std::uint32_t>(i + 1));
    } else {
      c.inputs[i].lit = static_cast<Literal>(expect(cur.read_line(), 1, 1)[0]);
    }
  }
  for (std::uint64_t i = 0; i < L; ++i) {
    auto nums = expect(cur.read_line(), binary ? 1 : 2, binary ? 2 : 3);
    std::size_t k = 0;
    c.latches[i].lit = binary ? make_lit(static_cast<std::uint32_t>(I + i + 1)) : static_cast<Literal>(nums[k++]);
    c.latches[i].next = static_cast<Literal>(nums[k++]);
    if (k < nums.size() && nums[k] != 0)
      throw ParseError("latch " + std::to_string(c.latches[i].lit) + " has a nonzero initial value");
  }
  for (std::uint64_t i = 0; i < O; ++i) c.outputs[i].lit = static_cast<Literal>(expect(cur.read_line(), 1, 1)[0]);
  for (std::uint64_t i = 0; i < A; ++i) {
    if (binary) {
      Literal lhs = make_lit(static_cast<std::uint32_t>(I + L + i + 1));
      std::uint64_t d0 = detail::decode_varint(cur);
      std::uint64_t d1 = detail::decode_varint(cur);
      if (d0 > lhs) throw ParseError("binary delta exceeds gate literal");
      std::uint64_t rhs0 = lhs - d0;
      if (d1 > rhs0) throw ParseError("binary delta exceeds first operand");
      c.ands[i] = AndGate{lhs, static_cast<Literal>(rhs0), static_cast<Literal>(rhs0 - d1)};
    } else {
      auto nums = expect(cur.read_line(), 3, 3);
      c.ands[i] = AndGate{static_cast<Literal>(nums[0]), static_cast<Literal>(nums[1]),
                          static_cast<Literal>(nums[2])};
    }
  }

  // Symbol table, then an optional comment section.
  while (!cur.at_end()) {
    std::string_view line = cur.read_line();
    if (line.empty()) continue;
    if (line == "c") {
      c.comments = std::string(cur.rest());
      break;
    }
    char kind = line[0];
    std::size_t space = line.find(' ');
    if (space == std::string_view::npos || space < 2)
      throw ParseError("malformed symbol entry at line " + std::to_string(cur.line() - 1));
    std::uint64_t index = 0;
    auto [ptr, ec] = std::from_chars(line.data() + 1, line.data() + space, index);
    if (ec != std::errc() || ptr != line.data() + space)
      throw ParseError("malformed symbol index at line " + std::to_string(cur.line() - 1));
    std::string name(line.substr(space + 1));
    switch (kind) {
      case 'i':
        if (index >= c.inputs.size()) throw ParseError("input symbol index out of range");
        c.inputs[index].name = std::move(name);
        break;
      case 'l':
        if (index >= c.latches.size()) throw ParseError("latch symbol index out of range");
        c.latches[index].name = std::move(name);
        break;
      case 'o':
        if (index >= c.outputs.size()) throw ParseError("output symbol index out of range");
        c.outputs[index].name = std::move(name);
        break;
      default:
        throw ParseError("unsupported symbol kind '" + std::string(1, kind) + "'");
    }
  }

  validate(c, mode);
  return c;
}

inline AigCircuit parse_file(const std::string& path, ParseMode mode = ParseMode::kGame) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), mode);
}

/// Sorts inputs, latches and gates by literal. Symbol names travel with
/// their entries; output order is kept.
inline AigCircuit normalize(AigCircuit c) {
  auto by_lit = [](const auto& a, const auto& b) { return a.lit < b.lit; };
  std::stable_sort(c.inputs.begin(), c.inputs.end(), by_lit);
  std::stable_sort(c.latches.begin(), c.latches.end(), by_lit);
  std::stable_sort(c.ands.begin(), c.ands.end(),
                   [](const AndGate& a, const AndGate& b) { return a.lhs < b.lhs; });
  return c;
}

/// Canonical ASCII text of the normalized circuit.
inline std::string write_ascii(const AigCircuit& circuit) {
  AigCircuit c = normalize(circuit);
  std::string out;
  out += "aag " + std::to_string(c.max_var) + ' ' + std::to_string(c.inputs.size()) + ' ' +
         std::to_string(c.latches.size()) + ' ' + std::to_string(c.outputs.size()) + ' ' +
         std::to_string(c.ands.size()) + '\n';
  for (const auto& in : c.inputs) out += std::to_string(in.lit) + '\n';
  for (const auto& la : c.latches) out += std::to_string(la.lit) + ' ' + std::to_string(la.next) + '\n';
  for (const auto& o : c.outputs) out += std::to_string(o.lit) + '\n';
  for (const auto& g : c.ands)
    out += std::to_string(g.lhs) + ' ' + std::to_string(g.rhs0) + ' ' + std::to_string(g.rhs1) + '\n';
  for (std::size_t i = 0; i < c.inputs.size(); ++i)
    if (!c.inputs[i].name.empty()) out += 'i' + std::to_string(i) + ' ' + c.inputs[i].name + '\n';
  for (std::size_t i = 0; i < c.latches.size(); ++i)
    if (!c.latches[i].name.empty()) out += 'l' + std::to_string(i) + ' ' + c.latches[i].name + '\n';
  for (std::size_t i = 0; i < c.outputs.size(); ++i)
    if (!c.outputs[i].name.empty()) out += 'o' + std::to_string(i) + ' ' + c.outputs[i].name + '\n';
  if (!c.comments.empty()) out += "c\n" + c.comments;
  return out;
}

/// Renumbers variables into the compact layout the binary format requires:
/// inputs first, then latches, then gates in topological order. Input and
/// latch order is preserved; binary gates store the larger operand first.
inline AigCircuit reencode(const AigCircuit& circuit) {
  AigCircuit c = circuit;
  std::stable_sort(c.ands.begin(), c.ands.end(),
                   [](const AndGate& a, const AndGate& b) { return a.lhs < b.lhs; });
  std::vector<std::uint32_t> map(circuit.max_var + 1, 0);
  std::uint32_t next = 1;
  for (auto& in : c.inputs) map[lit_var(in.lit)] = next++;
  for (auto& la : c.latches) map[lit_var(la.lit)] = next++;
  for (auto& g : c.ands) map[lit_var(g.lhs)] = next++;
  auto tr = [&](Literal l) { return make_lit(map[lit_var(l)], lit_negated(l)); };
  for (auto& in : c.inputs) in.lit = tr(in.lit);
  for (auto& la : c.latches) {
    la.lit = tr(la.lit);
    la.next = tr(la.next);
  }
  for (auto& o : c.outputs) o.lit = tr(o.lit);
  for (auto& g : c.ands) {
    g.lhs = tr(g.lhs);
    g.rhs0 = tr(g.rhs0);
    g.rhs1 = tr(g.rhs1);
    if (g.rhs0 < g.rhs1) std::swap(g.rhs0, g.rhs1);
  }
  c.max_var = next - 1;
  return c;
}

inline std::string write_binary(const AigCircuit& circuit) {
  AigCircuit c = reencode(circuit);
  std::string out;
  out += "aig " + std::to_string(c.max_var) + ' ' + std::to_string(c.inputs.size()) + ' ' +
         std::to_string(c.latches.size()) + ' ' + std::to_string(c.outputs.size()) + ' ' +
         std::to_string(c.ands.size()) + '\n';
  for (const auto& la : c.latches) out += std::to_string(la.next) + '\n';
  for (const auto& o : c.outputs) out += std::to_string(o.lit) + '\n';
  for (const auto& g : c.ands) {
    detail::encode_varint(out, g.lhs - g.rhs0);
    detail::encode_varint(out, g.rhs0 - g.rhs1);
  }
  for (std::size_t i = 0; i < c.inputs.size(); ++i)
    if (!c.inputs[i].name.empty()) out += 'i' + std::to_string(i) + ' ' + c.inputs[i].name + '\n';
  for (std::size_t i = 0; i < c.latches.size(); ++i)
    if (!c.latches[i].name.empty()) out += 'l' + std::to_string(i) + ' ' + c.latches[i].name + '\n';
  for (std::size_t i = 0; i < c.outputs.size(); ++i)
    if (!c.outputs[i].name.empty()) out += 'o' + std::to_string(i) + ' ' + c.outputs[i].name + '\n';
  if (!c.comments.empty()) out += "c\n" + c.comments;
  return out;
}

inline InputClassification classify_inputs(const AigCircuit& c) {
  InputClassification cls;
  for (const auto& in : c.inputs) {
    if (std::string_view(in.name).substr(0, kControllablePrefix.size()) == kControllablePrefix)
      cls.controllable.push_back(in.lit);
    else
      cls.uncontrollable.push_back(in.lit);
  }
  return cls;
}

/// Values of every variable under the given input and latch values (indexed
/// in declaration order). Variable 0 is the constant false.
inline std::vector<bool> eval(const AigCircuit& c, const std::vector<bool>& input_values,
                              const std::vector<bool>& latch_values) {
  if (input_values.size() != c.inputs.size() || latch_values.size() != c.latches.size())
    throw std::invalid_argument("valuation does not match circuit interface");
  std::vector<bool> val(c.max_var + 1, false);
  for (std::size_t i = 0; i < c.inputs.size(); ++i) val[lit_var(c.inputs[i].lit)] = input_values[i];
  for (std::size_t i = 0; i < c.latches.size(); ++i) val[lit_var(c.latches[i].lit)] = latch_values[i];
  std::vector<std::size_t> order(c.ands.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return c.ands[a].lhs < c.ands[b].lhs; });
  auto lit = [&](Literal l) { return static_cast<bool>(val[lit_var(l)]) != lit_negated(l); };
  for (std::size_t k : order) {
    const auto& g = c.ands[k];
    val[lit_var(g.lhs)] = lit(g.rhs0) && lit(g.rhs1);
  }
  return val;
}

inline bool lit_value(const std::vector<bool>& values, Literal l) {
  return static_cast<bool>(values[lit_var(l)]) != lit_negated(l);
}

/// Non-fatal remarks about a game circuit, for display by tools.
inline std::vector<std::string> diagnose(const AigCircuit& c) {
  std::vector<std::string> notes;
  for (const auto& o : c.outputs) {
    if (o.lit == kFalse) notes.emplace_back("error output is constant false");
    if (o.lit == kTrue) notes.emplace_back("error output is constant true");
  }
  return notes;
}

}  // namespace safegames::aiger
