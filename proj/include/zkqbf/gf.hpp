#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace zkq {

using Elem = std::uint64_t;

class FieldError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// GF(2^k), 8 <= k <= 64, polynomial basis.
class Field {
public:
  explicit Field(unsigned bits = 64);

  unsigned bits() const { return bits_; }
  unsigned bytes() const { return (bits_ + 7) / 8; }
  Elem mask() const { return mask_; }
  // Reducing polynomial without its leading X^k term.
  Elem modulusLow() const { return low_; }

  static Elem add(Elem a, Elem b) { return a ^ b; }
  Elem mul(Elem a, Elem b) const;
  Elem sqr(Elem a) const { return mul(a, a); }
  Elem pow(Elem a, std::uint64_t e) const;
  Elem inv(Elem a) const;

private:
  unsigned bits_;
  Elem low_;
  Elem mask_;
};

// Smallest irreducible X^k + low (by low) with the fixed choices for k = 8 and k = 64.
Elem reducingPolynomial(unsigned bits);

// Dense polynomial, c[i] is the coefficient of X^i.
struct Poly {
  std::vector<Elem> c;

  Poly() = default;
  explicit Poly(std::vector<Elem> coeffs) : c(std::move(coeffs)) {}

  int degree() const;
  bool isZero() const { return degree() < 0; }
  void trim();
  Elem coeff(std::size_t i) const { return i < c.size() ? c[i] : 0; }
  bool operator==(const Poly& o) const;
};

namespace poly {

Poly fromRoots(const Field& f, const std::vector<Elem>& roots);
Elem eval(const Field& f, const Poly& p, Elem x);
Poly add(const Poly& a, const Poly& b);
Poly mul(const Field& f, const Poly& a, const Poly& b);
Poly mulMany(const Field& f, const std::vector<Poly>& ps);
Poly monomial(std::size_t degree);
// Quotient and remainder; throws on division by zero.
std::pair<Poly, Poly> divmod(const Field& f, const Poly& a, const Poly& b);
// Returns {g, s, t} with s*a + t*b = g and g monic.
struct Xgcd {
  Poly g, s, t;
};
Xgcd xgcd(const Field& f, const Poly& a, const Poly& b);
// p(X + shift)
Poly shift(const Field& f, const Poly& p, Elem shift);

}  // namespace poly
}  // namespace zkq
