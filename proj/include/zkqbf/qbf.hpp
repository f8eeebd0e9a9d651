#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "zkqbf/gf.hpp"

namespace zkq {

// Variable 0 is the constant sentinel: positive is true, negated is false.
struct Lit {
  std::uint32_t var = 0;
  bool pos = true;

  static Lit top() { return {0, true}; }
  static Lit bottom() { return {0, false}; }
  static Lit fromDimacs(long v) {
    return {static_cast<std::uint32_t>(v < 0 ? -v : v), v > 0};
  }
  long dimacs() const { return pos ? static_cast<long>(var) : -static_cast<long>(var); }
  bool isSentinel() const { return var == 0; }
  Lit operator~() const { return {var, !pos}; }
  bool operator==(const Lit& o) const { return var == o.var && pos == o.pos; }
  bool operator!=(const Lit& o) const { return !(*this == o); }
  bool operator<(const Lit& o) const { return var != o.var ? var < o.var : pos < o.pos; }
};

using Clause = std::vector<Lit>;

enum class Quant { Exists, Forall };

struct Block {
  Quant q;
  std::vector<std::uint32_t> vars;
};

class QdimacsError : public std::runtime_error {
public:
  enum class Kind { MalformedHeader, VarOutOfRange, DuplicateQuantification, Tautology, Syntax };
  QdimacsError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

class QbfInstance {
public:
  QbfInstance() = default;
  // `original` is the matrix before universal reduction; defaults to `matrix`.
  QbfInstance(std::uint32_t numVars, std::vector<Block> blocks, std::vector<Clause> matrix,
              std::optional<std::vector<Clause>> original = std::nullopt);

  std::uint32_t numVars() const { return numVars_; }
  // Number of variables bound by the prefix (ranks 1..rankedCount()).
  std::uint32_t rankedCount() const { return ranked_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Clause>& matrix() const { return matrix_; }
  // Deduplicated clauses as written, used where strategies are substituted.
  const std::vector<Clause>& originalMatrix() const { return original_; }

  bool isBound(std::uint32_t var) const;
  // Rank of a bound variable, 0 for the sentinel; throws for unknown variables.
  std::uint32_t rank(std::uint32_t var) const;
  Quant quant(std::uint32_t var) const;
  bool isUniversal(std::uint32_t var) const { return var != 0 && quant(var) == Quant::Forall; }
  bool isExistential(std::uint32_t var) const { return var != 0 && quant(var) == Quant::Exists; }
  // Variables in rank order.
  std::vector<std::uint32_t> orderedVars() const;
  std::vector<std::uint32_t> varsOf(Quant q) const;

private:
  std::uint32_t numVars_ = 0;
  std::uint32_t ranked_ = 0;
  std::vector<Block> blocks_;
  std::vector<Clause> matrix_;
  std::vector<Clause> original_;
  std::vector<std::uint32_t> rank_;  // index by var, 0 when unbound
  std::vector<Quant> quant_;
};

QbfInstance parseQdimacs(std::string_view text);
std::string serializeQdimacs(const QbfInstance& inst);

// Clause helpers; reduceUniversal drops universals ranked above every existential.
Clause reduceUniversal(const QbfInstance& inst, const Clause& c);
bool isTautology(const Clause& c);
Clause sortedUnique(Clause c);

// Literal code: order bits followed by the sign bit (1 = positive).
inline Elem literalCode(std::uint32_t order, bool pos) {
  return (static_cast<Elem>(order) << 1) | (pos ? 1u : 0u);
}
inline std::uint32_t codeOrder(Elem code) { return static_cast<std::uint32_t>(code >> 1); }

Elem encodeLiteral(const QbfInstance& inst, Lit lit);
// Field interpretation is the raw code; numeric interpretation is the order.
inline Elem itpField(Elem code) { return code; }
inline std::uint32_t itpOrder(Elem code) { return codeOrder(code); }

// Codes of clause literals, ⊥ literals dropped.
std::vector<Elem> clauseCodes(const QbfInstance& inst, const Clause& c);
// Product of (X - code) over the clause times X^(width - |clause|).
Poly clausePoly(const Field& f, const QbfInstance& inst, const Clause& c, std::size_t width);
Poly padPoly(const Field& f, const std::vector<Elem>& codes, std::size_t width);

// Codes of all literals of a quantifier class.
std::vector<Elem> literalSet(const QbfInstance& inst, Quant q);

// Coding of variables beyond the instance (strategy auxiliaries, selectors):
// variable numVars + j gets order rankedCount + j.
class ExtendedCoder {
public:
  explicit ExtendedCoder(const QbfInstance& inst) : inst_(&inst) {}
  std::uint32_t order(std::uint32_t var) const;
  Elem code(Lit lit) const { return literalCode(order(lit.var), lit.pos); }
  std::vector<Elem> codes(const Clause& c) const;

private:
  const QbfInstance* inst_;
};

std::string toString(const Clause& c);

}  // namespace zkq
