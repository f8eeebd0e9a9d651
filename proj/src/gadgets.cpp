#include "zkqbf/gadgets.hpp"

#include <algorithm>

#include "zkqbf/qbf.hpp"

namespace zkq {

std::vector<Elem> plain(const std::vector<Val>& xs) {
  std::vector<Elem> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(x.v);
  return out;
}

Poly plainPoly(const CPoly& p) { return Poly(plain(p)); }

CPoly publicPoly(Session& s, const Poly& p, std::size_t n) {
  CPoly out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(s.constant(p.coeff(i)));
  return out;
}

CPoly linearFactor(Session& s, const Val& a) { return {a, s.constant(1)}; }

CPoly monomialPoly(Session& s, std::size_t degree) {
  CPoly out(degree + 1, s.constant(0));
  out[degree] = s.constant(1);
  return out;
}

unsigned bitsFor(std::uint64_t maxValue) {
  unsigned n = 1;
  while (n < 64 && (maxValue >> n) != 0) ++n;
  return n;
}

std::vector<Val> publicBits(Session& s, Elem x, unsigned nbits) {
  std::vector<Val> out;
  for (unsigned i = 0; i < nbits; ++i) out.push_back(s.constant((x >> i) & 1));
  return out;
}

std::vector<Val> decompose(Session& s, const Val& x, unsigned nbits) {
  if (nbits > s.field().bits()) throw std::invalid_argument("bit decomposition wider than the field");
  if (x.pub) return publicBits(s, x.v, nbits);
  std::vector<Val> bits;
  Val acc = s.constant(0);
  for (unsigned i = 0; i < nbits; ++i) {
    Val b = s.witness((x.v >> i) & 1);
    s.assertBit(b);
    acc = s.add(acc, s.scale(b, Elem{1} << i));
    bits.push_back(b);
  }
  s.assertEqual(acc, x);
  return bits;
}

Val notBit(Session& s, const Val& b) { return s.addConst(b, 1); }

Val greaterThan(Session& s, const std::vector<Val>& a, const std::vector<Val>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("comparison of unequal widths");
  Val gt = s.constant(0);
  Val eq = s.constant(1);
  for (std::size_t i = a.size(); i-- > 0;) {
    gt = s.add(gt, s.mul(s.mul(eq, a[i]), notBit(s, b[i])));
    if (i > 0) eq = s.mul(eq, s.addConst(s.add(a[i], b[i]), 1));
  }
  return gt;
}

std::vector<Val> orderBits(const std::vector<Val>& codeBits) {
  if (codeBits.empty()) return {};
  return std::vector<Val>(codeBits.begin() + 1, codeBits.end());
}

Val maxOf(Session& s, const Val& a, const std::vector<Val>& aBits, const Val& b,
          const std::vector<Val>& bBits) {
  Val g = greaterThan(s, aBits, bBits);
  return s.add(b, s.mul(g, s.add(a, b)));
}

Val isZero(Session& s, const Val& e) {
  if (e.pub) return s.constant(e.v == 0 ? 1 : 0);
  bool zero = s.isProver() && e.v == 0;
  Val z = s.witness(zero ? 1 : 0);
  Val inv = s.witness(s.isProver() && e.v ? s.field().inv(e.v) : 0);
  s.assertProduct(e, inv, notBit(s, z));
  s.assertProduct(z, e, s.constant(0));
  s.assertProduct(z, inv, s.constant(0));
  return z;
}

void memberOf(Session& s, const Val& x, const std::vector<Elem>& set) {
  std::vector<Val> factors;
  factors.reserve(set.size());
  for (Elem e : set) factors.push_back(s.addConst(x, e));
  s.assertZero(s.mulMany(factors));
}

namespace {

// Quotient of a monic polynomial by (X + a).
std::vector<Elem> divideLinear(const Field& f, const std::vector<Elem>& p, Elem a) {
  std::size_t n = p.size() - 1;
  std::vector<Elem> q(n, 0);
  if (n == 0) return q;
  q[n - 1] = p[n];
  for (std::size_t i = n - 1; i-- > 0;) q[i] = p[i + 1] ^ f.mul(a, q[i + 1]);
  return q;
}

CPoly commitMonic(Session& s, const Poly& p, std::size_t degree) {
  CPoly out = s.witnessPoly(p.c, degree);
  out.push_back(s.constant(1));
  return out;
}

}  // namespace

void rootOf(Session& s, const Val& x, const CPoly& p) {
  if (p.empty()) throw std::invalid_argument("root of an empty polynomial");
  std::size_t n = p.size() - 1;
  if (n == 0) {
    s.assertZero(s.constant(1));
    return;
  }
  std::vector<Elem> q;
  if (s.isProver()) q = divideLinear(s.field(), plain(p), x.v);
  CPoly qc = commitMonic(s, Poly(q), n - 1);
  s.polyEq({p}, {linearFactor(s, x), qc});
}

CPoly commitClause(Session& s, const std::vector<Elem>& codes, std::size_t width) {
  Poly p;
  if (s.isProver()) {
    std::vector<Elem> c = codes;
    if (c.size() > width) c.resize(width);
    p = padPoly(s.field(), c, width);
  }
  return commitMonic(s, p, width);
}

CPoly publicClause(Session& s, const std::vector<Elem>& codes, std::size_t width) {
  return publicPoly(s, padPoly(s.field(), codes, width), width + 1);
}

CPoly clauseFromEntry(Session& s, const std::vector<Val>& lower) {
  CPoly out = lower;
  out.push_back(s.constant(1));
  return out;
}

std::vector<Val> clauseEntry(const CPoly& c) { return std::vector<Val>(c.begin(), c.end() - 1); }

std::size_t clauseWidth(const CPoly& c) { return c.size() - 1; }

std::vector<Val> retrieveCodes(Session& s, const CPoly& clause, const std::vector<Elem>& codes) {
  std::size_t w = clauseWidth(clause);
  std::vector<Val> out;
  std::vector<CPoly> factors;
  for (std::size_t i = 0; i < w; ++i) {
    out.push_back(s.witness(i < codes.size() ? codes[i] : 0));
    factors.push_back(linearFactor(s, out.back()));
  }
  s.polyEq({clause}, std::move(factors));
  return out;
}

void equalParts(Session& s, const CPoly& whole, const std::vector<CPoly>& parts, bool disjoint) {
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size() - 1;
  std::size_t w = whole.size() - 1;
  if (total < w) throw std::invalid_argument("parts narrower than the whole");
  s.polyEq({whole, monomialPoly(s, total - w)}, parts);
  if (!disjoint) return;
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::size_t j = i + 1; j < parts.size(); ++j) coprimeUpToPadding(s, parts[i], parts[j]);
}

void coprimeUpToPadding(Session& s, const CPoly& p, const CPoly& q) {
  std::size_t dp = p.size() - 1, dq = q.size() - 1;
  std::size_t cap = std::min(dp, dq);
  Poly a, b;
  std::size_t j = 0;
  if (s.isProver()) {
    auto g = poly::xgcd(s.field(), plainPoly(p), plainPoly(q));
    a = g.s;
    b = g.t;
    j = std::min<std::size_t>(std::max(g.g.degree(), 0), cap);
  }
  CPoly ac = s.witnessPoly(a.c, std::max<std::size_t>(dq, 1));
  CPoly bc = s.witnessPoly(b.c, std::max<std::size_t>(dp, 1));
  // Unary encoding u_0 = 1 >= u_1 >= ... >= u_cap >= u_{cap+1} = 0; X^j has coefficient u_j + u_{j+1}.
  std::vector<Val> u{s.constant(1)};
  for (std::size_t i = 1; i <= cap; ++i) {
    Val ui = s.witness(i <= j ? 1 : 0);
    s.assertBit(ui);
    s.assertProduct(ui, notBit(s, u.back()), s.constant(0));
    u.push_back(ui);
  }
  u.push_back(s.constant(0));
  s.onEval([p, q, ac, bc, u](Session& s, Elem r) {
    Val lhs = s.add(s.mul(s.evalPoly(ac, r), s.evalPoly(p, r)), s.mul(s.evalPoly(bc, r), s.evalPoly(q, r)));
    Val mono = s.constant(0);
    Elem pw = 1;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
      mono = s.add(mono, s.scale(s.add(u[i], u[i + 1]), pw));
      pw = s.field().mul(pw, r);
    }
    s.assertEqual(lhs, mono);
  });
}

void nonTautological(Session& s, const CPoly& c) {
  std::size_t w = c.size() - 1;
  Poly a, b;
  Elem inv = 0;
  if (s.isProver()) {
    Poly g = plainPoly(c);
    auto x = poly::xgcd(s.field(), g, poly::shift(s.field(), g, 1));
    a = x.s;
    b = x.t;
    Elem at1 = poly::eval(s.field(), g, 1);
    inv = at1 ? s.field().inv(at1) : 0;
  }
  std::size_t n = std::max<std::size_t>(w, 1);
  CPoly ac = s.witnessPoly(a.c, n);
  CPoly bc = s.witnessPoly(b.c, n);
  s.onEval([c, ac, bc](Session& s, Elem r) {
    Val lhs = s.add(s.mul(s.evalPoly(ac, r), s.evalPoly(c, r)), s.mul(s.evalPoly(bc, r), s.evalPoly(c, r ^ 1)));
    s.assertEqual(lhs, s.constant(1));
  });
  Val iv = s.witness(inv);
  s.assertProduct(s.evalPoly(c, 1), iv, s.constant(1));
}

void isFalse(Session& s, const CPoly& c) {
  for (std::size_t i = 0; i + 1 < c.size(); ++i) s.assertZero(c[i]);
}

void clauseRes(Session& s, const CPoly& ca, const CPoly& cb, const Val& pivot, const CPoly& cr) {
  std::size_t wa = ca.size() - 1, wb = cb.size() - 1, w = cr.size() - 1;
  CPoly rho = linearFactor(s, pivot);
  CPoly rhoBar = linearFactor(s, s.addConst(pivot, 1));
  Poly w0, w1;
  if (s.isProver()) {
    const Field& f = s.field();
    Poly r = plainPoly(cr);
    w0 = poly::divmod(f, poly::mul(f, poly::mul(f, r, plainPoly(rho)), poly::monomial(wa)), plainPoly(ca)).first;
    w1 = poly::divmod(f, poly::mul(f, poly::mul(f, r, plainPoly(rhoBar)), poly::monomial(wb)), plainPoly(cb)).first;
  }
  CPoly w0c = commitMonic(s, w0, w + 1);
  CPoly w1c = commitMonic(s, w1, w + 1);
  s.polyEq({w0c, ca}, {cr, rho, monomialPoly(s, wa)});
  s.polyEq({w1c, cb}, {cr, rhoBar, monomialPoly(s, wb)});
  nonTautological(s, cr);
}

FlexArray::FlexArray(Session& s, std::size_t entryLen, std::string stage)
    : st_(std::make_shared<State>()) {
  st_->s = &s;
  st_->len = entryLen;
  st_->stage = std::move(stage);
  auto st = st_;
  s.onFingerprint([st](Session&, Elem chi, Elem beta) { fingerprintCheck(st, chi, beta); });
}

void FlexArray::append(std::vector<Val> entry) {
  if (entry.size() != st_->len) throw std::invalid_argument("array entry of wrong length");
  st_->entries.push_back(std::move(entry));
}

std::vector<Val> FlexArray::read(std::uint64_t index, std::uint64_t time, const std::vector<Elem>& entry) {
  Session& s = *st_->s;
  if (st_->idxBits == 0) st_->idxBits = bitsFor(std::max<std::uint64_t>(st_->entries.size(), time));
  std::string outer = s.stage();
  s.setStage(st_->stage);
  Read rd{{}, {}, s.tag()};
  s.setStage(outer);
  s.under(rd.tag, [&] {
    rd.index = s.witness(index);
    for (std::size_t i = 0; i < st_->len; ++i) rd.entry.push_back(s.witness(i < entry.size() ? entry[i] : 0));
    auto ib = decompose(s, rd.index, st_->idxBits);
    auto tb = publicBits(s, time, st_->idxBits);
    s.assertEqual(greaterThan(s, tb, ib), s.constant(1));
  });
  st_->reads.push_back(rd);
  return rd.entry;
}

void FlexArray::fingerprintCheck(const std::shared_ptr<State>& st, Elem chi, Elem beta) {
  if (st->reads.empty()) return;
  Session& s = *st->s;
  const Field& f = s.field();
  std::vector<Elem> pw{1};
  for (std::size_t j = 0; j < st->len; ++j) pw.push_back(f.mul(pw.back(), beta));
  auto fingerprint = [&](const Val& idx, const std::vector<Val>& e) {
    Val acc = s.scale(idx, chi);
    for (std::size_t j = 0; j < e.size(); ++j) acc = s.add(acc, s.scale(e[j], pw[j + 1]));
    return acc;
  };
  auto fps = std::make_shared<std::vector<Val>>();
  for (std::size_t i = 0; i < st->entries.size(); ++i) fps->push_back(fingerprint(s.constant(i), st->entries[i]));
  std::size_t n = fps->size();
  std::vector<Elem> charPoly;
  if (s.isProver()) charPoly = poly::fromRoots(f, plain(*fps)).c;
  auto readFps = std::make_shared<std::vector<Val>>();
  auto cofactors = std::make_shared<std::vector<CPoly>>();
  for (const auto& rd : st->reads) {
    s.under(rd.tag, [&] {
      Val fp = fingerprint(rd.index, rd.entry);
      readFps->push_back(fp);
      if (n == 0) {
        s.assertZero(s.constant(1));
        cofactors->push_back({});
        return;
      }
      std::vector<Elem> q;
      if (s.isProver()) q = divideLinear(f, charPoly, fp.v);
      cofactors->push_back(commitMonic(s, Poly(q), n - 1));
    });
  }
  if (n == 0) return;
  s.onEval([st, fps, readFps, cofactors](Session& s, Elem r) {
    std::vector<Val> factors;
    for (const auto& fp : *fps) factors.push_back(s.addConst(fp, r));
    Val pr = s.mulMany(factors);
    for (std::size_t k = 0; k < st->reads.size(); ++k) {
      s.under(st->reads[k].tag, [&] {
        Val qr = s.evalPoly((*cofactors)[k], r);
        s.assertEqual(s.mul(qr, s.addConst((*readFps)[k], r)), pr);
      });
    }
  });
}

}  // namespace zkq
