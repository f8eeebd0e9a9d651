#include "zkqbf/gf.hpp"

#include <algorithm>
#include <utility>

#if defined(__PCLMUL__)
#include <emmintrin.h>
#include <wmmintrin.h>
#endif

namespace zkq {

namespace {

using u128 = unsigned __int128;

inline u128 clmul(std::uint64_t a, std::uint64_t b) {
#if defined(__PCLMUL__)
  __m128i x = _mm_set_epi64x(0, static_cast<long long>(a));
  __m128i y = _mm_set_epi64x(0, static_cast<long long>(b));
  __m128i r = _mm_clmulepi64_si128(x, y, 0);
  auto lo = static_cast<std::uint64_t>(_mm_cvtsi128_si64(r));
  auto hi = static_cast<std::uint64_t>(_mm_cvtsi128_si64(_mm_unpackhi_epi64(r, r)));
  return (static_cast<u128>(hi) << 64) | lo;
#else
  u128 acc = 0;
  u128 aa = a;
  while (b) {
    if (b & 1) acc ^= aa;
    aa <<= 1;
    b >>= 1;
  }
  return acc;
#endif
}

int deg2(std::uint64_t p) { return p ? 63 - __builtin_clzll(p) : -1; }

// GF(2)[X] helpers for the irreducibility test (degree < 64).
std::uint64_t mulmod2(std::uint64_t a, std::uint64_t b, std::uint64_t low, int k) {
  u128 v = clmul(a, b);
  u128 full = (static_cast<u128>(1) << k) | low;
  for (int i = 127; i >= k; --i) {
    if ((v >> i) & 1) v ^= full << (i - k);
  }
  return static_cast<std::uint64_t>(v);
}

std::uint64_t gcd2(std::uint64_t a, std::uint64_t b) {
  while (b) {
    int da = deg2(a), db = deg2(b);
    if (da < db) {
      std::swap(a, b);
      continue;
    }
    a ^= b << (da - db);
    if (deg2(a) < db) std::swap(a, b);
  }
  return a;
}

// Ben-Or test for X^k + low, k < 64.
bool irreducible(unsigned k, std::uint64_t low) {
  std::uint64_t f = (1ULL << k) | low;
  std::uint64_t u = 2;  // X
  for (unsigned i = 1; i <= k / 2; ++i) {
    u = mulmod2(u, u, low, static_cast<int>(k));
    if (gcd2(f, u ^ 2) != 1) return false;
  }
  return true;
}

}  // namespace

Elem reducingPolynomial(unsigned bits) {
  if (bits < 8 || bits > 64) throw FieldError("field bits must be in [8, 64]");
  if (bits == 64 || bits == 8) return 0x1B;
  for (std::uint64_t low = 3;; low += 2) {
    if (__builtin_popcountll(low) % 2 != 0) continue;  // divisible by X + 1
    if (irreducible(bits, low)) return low;
  }
}

Field::Field(unsigned bits)
    : bits_(bits),
      low_(reducingPolynomial(bits)),
      mask_(bits == 64 ? ~0ULL : ((1ULL << bits) - 1)) {}

Elem Field::mul(Elem a, Elem b) const {
  u128 v = clmul(a, b);
  if (bits_ == 64) {
    auto lo = static_cast<std::uint64_t>(v);
    auto hi = static_cast<std::uint64_t>(v >> 64);
    u128 t = clmul(hi, low_);
    lo ^= static_cast<std::uint64_t>(t);
    auto h2 = static_cast<std::uint64_t>(t >> 64);
    lo ^= static_cast<std::uint64_t>(clmul(h2, low_));
    return lo;
  }
  while (v >> bits_) {
    auto top = static_cast<std::uint64_t>(v >> bits_);
    v = (v & mask_) ^ clmul(top, low_);
  }
  return static_cast<Elem>(v);
}

Elem Field::pow(Elem a, std::uint64_t e) const {
  Elem r = 1;
  while (e) {
    if (e & 1) r = mul(r, a);
    a = mul(a, a);
    e >>= 1;
  }
  return r;
}

Elem Field::inv(Elem a) const {
  if ((a & mask_) == 0) throw FieldError("inverse of zero");
  // a^(2^k - 2)
  Elem r = 1;
  Elem sq = a;
  for (unsigned i = 1; i < bits_; ++i) {
    sq = mul(sq, sq);
    r = mul(r, sq);
  }
  return r;
}

int Poly::degree() const {
  for (std::size_t i = c.size(); i-- > 0;)
    if (c[i]) return static_cast<int>(i);
  return -1;
}

void Poly::trim() {
  while (!c.empty() && c.back() == 0) c.pop_back();
}

bool Poly::operator==(const Poly& o) const {
  std::size_t n = std::max(c.size(), o.c.size());
  for (std::size_t i = 0; i < n; ++i)
    if (coeff(i) != o.coeff(i)) return false;
  return true;
}

namespace poly {

Poly fromRoots(const Field& f, const std::vector<Elem>& roots) {
  std::vector<Elem> c(roots.size() + 1, 0);
  c[0] = 1;
  std::size_t deg = 0;
  for (Elem r : roots) {
    // multiply by (X + r)
    for (std::size_t i = deg + 1; i > 0; --i) c[i] = c[i - 1] ^ f.mul(c[i], r);
    c[0] = f.mul(c[0], r);
    ++deg;
  }
  return Poly(std::move(c));
}

Elem eval(const Field& f, const Poly& p, Elem x) {
  Elem acc = 0;
  for (std::size_t i = p.c.size(); i-- > 0;) acc = f.mul(acc, x) ^ p.c[i];
  return acc;
}

Poly add(const Poly& a, const Poly& b) {
  Poly r;
  r.c.resize(std::max(a.c.size(), b.c.size()), 0);
  for (std::size_t i = 0; i < r.c.size(); ++i) r.c[i] = a.coeff(i) ^ b.coeff(i);
  return r;
}

Poly mul(const Field& f, const Poly& a, const Poly& b) {
  if (a.c.empty() || b.c.empty()) return Poly({0});
  std::vector<Elem> c(a.c.size() + b.c.size() - 1, 0);
  for (std::size_t i = 0; i < a.c.size(); ++i) {
    if (!a.c[i]) continue;
    for (std::size_t j = 0; j < b.c.size(); ++j) c[i + j] ^= f.mul(a.c[i], b.c[j]);
  }
  return Poly(std::move(c));
}

Poly mulMany(const Field& f, const std::vector<Poly>& ps) {
  Poly acc({1});
  for (const auto& p : ps) acc = mul(f, acc, p);
  return acc;
}

Poly monomial(std::size_t degree) {
  std::vector<Elem> c(degree + 1, 0);
  c[degree] = 1;
  return Poly(std::move(c));
}

std::pair<Poly, Poly> divmod(const Field& f, const Poly& a, const Poly& b) {
  int db = b.degree();
  if (db < 0) throw FieldError("polynomial division by zero");
  Poly r = a;
  r.trim();
  int dr = r.degree();
  Poly q;
  q.c.assign(dr >= db ? static_cast<std::size_t>(dr - db + 1) : 1, 0);
  Elem lead = f.inv(b.c[static_cast<std::size_t>(db)]);
  for (int i = dr; i >= db; --i) {
    Elem coef = r.c[static_cast<std::size_t>(i)];
    if (!coef) continue;
    Elem t = f.mul(coef, lead);
    q.c[static_cast<std::size_t>(i - db)] = t;
    for (int j = 0; j <= db; ++j)
      r.c[static_cast<std::size_t>(i - db + j)] ^= f.mul(t, b.c[static_cast<std::size_t>(j)]);
  }
  r.trim();
  if (r.c.empty()) r.c.push_back(0);
  return {q, r};
}

Xgcd xgcd(const Field& f, const Poly& a, const Poly& b) {
  Poly r0 = a, r1 = b, s0({1}), s1({0}), t0({0}), t1({1});
  r0.trim();
  r1.trim();
  while (r1.degree() >= 0) {
    auto [q, r] = divmod(f, r0, r1);
    Poly s2 = add(s0, mul(f, q, s1));
    Poly t2 = add(t0, mul(f, q, t1));
    r0 = std::move(r1);
    r1 = std::move(r);
    s0 = std::move(s1);
    s1 = std::move(s2);
    t0 = std::move(t1);
    t1 = std::move(t2);
  }
  int d = r0.degree();
  if (d >= 0) {
    Elem li = f.inv(r0.c[static_cast<std::size_t>(d)]);
    for (auto& v : r0.c) v = f.mul(v, li);
    for (auto& v : s0.c) v = f.mul(v, li);
    for (auto& v : t0.c) v = f.mul(v, li);
  }
  s0.trim();
  t0.trim();
  return {r0, s0, t0};
}

Poly shift(const Field& f, const Poly& p, Elem s) {
  // Horner in the shifted variable: p(X + s) = (...(c_n (X+s) + c_{n-1})(X+s) ...)
  Poly acc({0});
  Poly lin({s, 1});
  for (std::size_t i = p.c.size(); i-- > 0;) {
    acc = mul(f, acc, lin);
    acc.c[0] ^= p.c[i];
  }
  acc.c.resize(std::max<std::size_t>(p.c.size(), 1), 0);
  return acc;
}

}  // namespace poly
}  // namespace zkq
