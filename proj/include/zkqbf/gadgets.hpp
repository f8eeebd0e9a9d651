#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "zkqbf/session.hpp"

namespace zkq {

// Prover-side view of committed values (verifier gets zeros).
std::vector<Elem> plain(const std::vector<Val>& xs);
Poly plainPoly(const CPoly& p);
CPoly publicPoly(Session& s, const Poly& p, std::size_t n);
// X + a as a committed linear factor.
CPoly linearFactor(Session& s, const Val& a);
CPoly monomialPoly(Session& s, std::size_t degree);

// Bits of x, least significant first: booleanity and recomposition are enforced.
std::vector<Val> decompose(Session& s, const Val& x, unsigned nbits);
std::vector<Val> publicBits(Session& s, Elem x, unsigned nbits);
// [a > b] for equal-length bit vectors (LSB first).
Val greaterThan(Session& s, const std::vector<Val>& a, const std::vector<Val>& b);
// Drop the sign bit of a literal code.
std::vector<Val> orderBits(const std::vector<Val>& codeBits);
// max(a, b) as a field value, with a, b given by their bits.
Val maxOf(Session& s, const Val& a, const std::vector<Val>& aBits, const Val& b,
          const std::vector<Val>& bBits);
// [e == 0] with a committed inverse hint.
Val isZero(Session& s, const Val& e);
Val notBit(Session& s, const Val& b);

// x is one of the public values in set (product chain).
void memberOf(Session& s, const Val& x, const std::vector<Elem>& set);
// x is a root of the committed monic polynomial p (cofactor commitment).
void rootOf(Session& s, const Val& x, const CPoly& p);

// Clauses are monic padded root polynomials of fixed width w (w + 1 coefficients, leading one public).
CPoly commitClause(Session& s, const std::vector<Elem>& codes, std::size_t width);
CPoly publicClause(Session& s, const std::vector<Elem>& codes, std::size_t width);
CPoly clauseFromEntry(Session& s, const std::vector<Val>& lower);
std::vector<Val> clauseEntry(const CPoly& c);
std::size_t clauseWidth(const CPoly& c);
// Commits the roots of a clause (padded with 0) and links them to the polynomial.
std::vector<Val> retrieveCodes(Session& s, const CPoly& clause, const std::vector<Elem>& codes);
// whole * X^(sum of part degrees - width(whole)) == product of parts; optional pairwise disjointness.
void equalParts(Session& s, const CPoly& whole, const std::vector<CPoly>& parts, bool disjoint);
// a*p + b*q == X^j for some j (committed in unary): no common root other than 0.
void coprimeUpToPadding(Session& s, const CPoly& p, const CPoly& q);
// No complementary pair and no true literal.
void nonTautological(Session& s, const CPoly& c);
// The clause is empty (only padding roots).
void isFalse(Session& s, const CPoly& c);
// Resolvent check: ca, cb minus the pivot pair are contained in cr, cr non-tautological.
void clauseRes(Session& s, const CPoly& ca, const CPoly& cb, const Val& pivot, const CPoly& cr);

// Append-only array of fixed-length entries with index-bounded reads.
class FlexArray {
public:
  FlexArray(Session& s, std::size_t entryLen, std::string stage = "array");
  std::size_t size() const { return st_->entries.size(); }
  std::size_t entryLen() const { return st_->len; }
  void append(std::vector<Val> entry);
  // Bits used for committed indices; defaults to what the current size needs.
  void setIndexBits(unsigned bits) { st_->idxBits = bits; }
  // Commits index and entry (prover values), proves the entry is stored at an index < time.
  std::vector<Val> read(std::uint64_t index, std::uint64_t time, const std::vector<Elem>& entry);
  std::size_t reads() const { return st_->reads.size(); }

private:
  struct Read {
    Val index;
    std::vector<Val> entry;
    Session::CheckTag tag;
  };
  struct State {
    Session* s;
    std::size_t len;
    std::string stage;
    unsigned idxBits = 0;
    std::vector<std::vector<Val>> entries;
    std::vector<Read> reads;
  };
  static void fingerprintCheck(const std::shared_ptr<State>& st, Elem chi, Elem beta);
  std::shared_ptr<State> st_;
};

unsigned bitsFor(std::uint64_t maxValue);

}  // namespace zkq
