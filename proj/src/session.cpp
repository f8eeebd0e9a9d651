#include "zkqbf/session.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstring>
#include <limits>

namespace zkq {

const char* backendName(Backend b) { return b == Backend::ItMac ? "itmac" : "cleartext"; }

Digest sha256(const void* data, std::size_t size) {
  Digest d{};
  unsigned len = 0;
  if (EVP_Digest(data, size, d.data(), &len, EVP_sha256(), nullptr) != 1 || len != d.size())
    throw std::runtime_error("sha256 failed");
  return d;
}

Dealer::Dealer(const Field& f, std::uint64_t seed) : f_(&f), rng_(seed) {
  do {
    delta_ = rng_() & f.mask();
  } while (delta_ == 0);
}

Dealer::Share Dealer::next() {
  Share s;
  s.r = rng_() & f_->mask();
  s.mac = rng_() & f_->mask();
  s.key = s.mac ^ f_->mul(s.r, delta_);
  return s;
}

Session::Session(Transport& t, const SessionOptions& opt)
    : f_(opt.fieldBits), t_(&t), opt_(opt), dealer_(f_, opt.dealerSeed), coins_(opt.verifierSeed) {
  if (opt_.role == Role::Verifier && opt_.backend == Backend::ItMac) delta_ = dealer_.delta();
}

void Session::markPhase(const std::string& name) {
  auto now = std::chrono::steady_clock::now();
  if (!phase_.empty())
    stats_.phases.emplace_back(phase_, std::chrono::duration<double>(now - phaseStart_).count());
  phase_ = name;
  phaseStart_ = now;
}

Session::Ctx Session::context() {
  if (hookCtx_) return *hookCtx_;
  return {stage_, nextTicket_++};
}

void Session::fail(const Ctx& c) {
  if (!haveFailure_ || c.ticket < firstFailure_.ticket) {
    haveFailure_ = true;
    firstFailure_ = c;
  }
}

Val Session::constant(Elem c) const {
  c &= f_.mask();
  Val v{c, 0, true};
  if (!isProver() && opt_.backend == Backend::ItMac) v.t = f_.mul(c, delta_);
  return v;
}

void Session::sendElem(Elem e) { putElem(out_, e, f_.bytes()); }

Elem Session::recvElem() {
  if (!roundFetched_) fetchRound();
  unsigned n = f_.bytes();
  if (inPos_ + n > in_.size()) throw ProtocolError("commit frame shorter than expected");
  Elem e = getElem(in_.data() + inPos_, n) & f_.mask();
  inPos_ += n;
  return e;
}

void Session::fetchRound() {
  Frame fr = t_->recv();
  if (fr.tag == Tag::Abort) throw ProtocolError("peer aborted");
  if (fr.tag != Tag::Commit) throw ProtocolError(std::string("expected commit, got ") + tagName(fr.tag));
  if (opt_.hashChallenges) transcript_.insert(transcript_.end(), fr.payload.begin(), fr.payload.end());
  in_ = std::move(fr.payload);
  inPos_ = 0;
  roundFetched_ = true;
}

void Session::flush() {
  if (opt_.hashChallenges) transcript_.insert(transcript_.end(), out_.begin(), out_.end());
  t_->send(Frame{Tag::Commit, std::move(out_)});
  out_.clear();
}

Val Session::witness(Elem x) {
  ++stats_.committed;
  x &= f_.mask();
  if (opt_.backend == Backend::Cleartext) {
    if (isProver()) {
      sendElem(x);
      return {x, 0, false};
    }
    return {recvElem(), 0, false};
  }
  auto sh = dealer_.next();
  if (isProver()) {
    sendElem(x ^ sh.r);
    return {x, sh.mac, false};
  }
  Elem d = recvElem();
  return {0, sh.key ^ f_.mul(d, delta_), false};
}

CPoly Session::witnessPoly(const std::vector<Elem>& coeffs, std::size_t n) {
  CPoly out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(witness(i < coeffs.size() ? coeffs[i] : 0));
  return out;
}

Val Session::instance(Elem x) {
  x &= f_.mask();
  putElem(instanceLog_, x, 8);
  return constant(x);
}

Val Session::add(const Val& a, const Val& b) const { return {a.v ^ b.v, a.t ^ b.t, a.pub && b.pub}; }

Val Session::scale(const Val& a, Elem c) const { return {f_.mul(a.v, c), f_.mul(a.t, c), a.pub}; }

Val Session::mul(const Val& a, const Val& b) {
  if (a.pub) return scale(b, a.v);
  if (b.pub) return scale(a, b.v);
  Ctx ctx = context();
  ++stats_.multiplications;
  Val z = witness(isProver() ? f_.mul(a.v, b.v) : 0);
  if (opt_.backend == Backend::Cleartext) {
    if (!isProver() && z.v != f_.mul(a.v, b.v)) fail(ctx);
  } else {
    triples_.push_back({a, b, z, std::move(ctx)});
  }
  return z;
}

Val Session::mulMany(const std::vector<Val>& xs) {
  Val acc = constant(1);
  for (const auto& x : xs) acc = mul(acc, x);
  return acc;
}

void Session::assertProduct(const Val& x, const Val& y, const Val& z) {
  if (x.pub || y.pub) {
    assertZero(add(x.pub ? scale(y, x.v) : scale(x, y.v), z));
    return;
  }
  Ctx ctx = context();
  if (opt_.backend == Backend::Cleartext) {
    if (!isProver() && z.v != f_.mul(x.v, y.v)) fail(ctx);
  } else {
    triples_.push_back({x, y, z, std::move(ctx)});
  }
}

void Session::assertZero(const Val& a) {
  ++stats_.zeroChecks;
  Ctx ctx = context();
  if (isProver()) {
    if (opt_.backend == Backend::ItMac && !a.pub) zeros_.push_back({a, std::move(ctx)});
    return;
  }
  if (opt_.backend == Backend::Cleartext || a.pub) {
    if (a.v != 0) fail(ctx);
    return;
  }
  zeros_.push_back({a, std::move(ctx)});
}

Val Session::evalPoly(const CPoly& p, Elem x) const {
  Val acc = constant(0);
  for (std::size_t i = p.size(); i-- > 0;) acc = add(scale(acc, x), p[i]);
  return acc;
}

void Session::polyEq(std::vector<CPoly> lhs, std::vector<CPoly> rhs) {
  ++stats_.polyEqChecks;
  onEval([lhs = std::move(lhs), rhs = std::move(rhs)](Session& s, Elem r) {
    std::vector<Val> l, q;
    for (const auto& p : lhs) l.push_back(s.evalPoly(p, r));
    for (const auto& p : rhs) q.push_back(s.evalPoly(p, r));
    s.assertEqual(s.mulMany(l), s.mulMany(q));
  });
}

Elem Session::drawChallenge() {
  if (!opt_.hashChallenges) return coins_() & f_.mask();
  auto d = sha256(transcript_.data(), transcript_.size());
  Elem e = 0;
  std::memcpy(&e, d.data(), sizeof e);
  return e & f_.mask();
}

Elem Session::challenge() {
  ++stats_.challenges;
  Elem e;
  if (isProver()) {
    flush();
    Frame fr = t_->recv();
    if (fr.tag == Tag::Abort) throw ProtocolError("peer aborted");
    if (fr.tag != Tag::Challenge || fr.payload.size() != f_.bytes())
      throw ProtocolError("malformed challenge");
    e = getElem(fr.payload.data(), f_.bytes()) & f_.mask();
  } else {
    if (!roundFetched_) fetchRound();
    if (inPos_ != in_.size()) throw ProtocolError("commit frame longer than expected");
    roundFetched_ = false;
    e = drawChallenge();
    std::vector<std::uint8_t> p;
    putElem(p, e, f_.bytes());
    t_->send(Frame{Tag::Challenge, std::move(p)});
  }
  if (opt_.hashChallenges) putElem(transcript_, e, f_.bytes());
  return e;
}

std::vector<Elem> Session::challenges(std::size_t n) {
  std::vector<Elem> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(challenge());
  return out;
}

void Session::onFingerprint(FingerprintHook h) { fpHooks_.emplace_back(std::move(h), context()); }

void Session::onEval(EvalHook h) { evalHooks_.emplace_back(std::move(h), context()); }

Verdict Session::finalize() {
  if (finalized_) return verdict_;
  markPhase("finalize");
  auto fp = challenges(2);
  for (std::size_t i = 0; i < fpHooks_.size(); ++i) {
    Ctx ctx = fpHooks_[i].second;
    auto h = fpHooks_[i].first;
    under(ctx, [&] { h(*this, fp[0], fp[1]); });
  }
  Elem r = challenge();
  for (std::size_t i = 0; i < evalHooks_.size(); ++i) {
    Ctx ctx = evalHooks_[i].second;
    auto h = evalHooks_[i].first;
    under(ctx, [&] { h(*this, r); });
  }
  Elem s = challenge();

  Digest inst = sha256(instanceLog_.data(), instanceLog_.size());
  const unsigned nb = f_.bytes();
  if (isProver()) {
    std::vector<std::uint8_t> p(inst.begin(), inst.end());
    if (opt_.backend == Backend::ItMac) {
      auto mask = dealer_.next();
      Elem u = mask.mac, v = mask.r, pw = 1;
      for (const auto& tr : triples_) {
        pw = f_.mul(pw, s);
        u ^= f_.mul(pw, f_.mul(tr.x.t, tr.y.t));
        v ^= f_.mul(pw, f_.mul(tr.x.v, tr.y.t) ^ f_.mul(tr.y.v, tr.x.t) ^ tr.z.t);
      }
      putElem(p, u, nb);
      putElem(p, v, nb);
      for (const auto& z : zeros_) putElem(p, z.v.t, nb);
    }
    t_->send(Frame{Tag::Open, std::move(p)});
    Frame fr = t_->recv();
    if (fr.tag == Tag::Abort) throw ProtocolError("peer aborted");
    if (fr.tag != Tag::Verdict || fr.payload.empty()) throw ProtocolError("malformed verdict");
    verdict_.accept = fr.payload[0] == 1;
    verdict_.stage.assign(fr.payload.begin() + 1, fr.payload.end());
    finalized_ = true;
    markPhase("");
    return verdict_;
  }

  Frame fr = t_->recv();
  if (fr.tag == Tag::Abort) throw ProtocolError("peer aborted");
  std::size_t want = inst.size() + (opt_.backend == Backend::ItMac ? (2 + zeros_.size()) * nb : 0);
  if (fr.tag != Tag::Open || fr.payload.size() != want) throw ProtocolError("malformed opening");
  bool instanceOk = std::equal(inst.begin(), inst.end(), fr.payload.begin());
  bool productsOk = true;
  if (opt_.backend == Backend::ItMac) {
    const std::uint8_t* p = fr.payload.data() + inst.size();
    auto mask = dealer_.next();
    Elem u = getElem(p, nb), v = getElem(p + nb, nb);
    Elem w = mask.key, pw = 1;
    for (const auto& tr : triples_) {
      pw = f_.mul(pw, s);
      w ^= f_.mul(pw, f_.mul(tr.x.t, tr.y.t) ^ f_.mul(tr.z.t, delta_));
    }
    productsOk = w == (u ^ f_.mul(v, delta_));
    for (std::size_t i = 0; i < zeros_.size(); ++i)
      if ((getElem(p + (2 + i) * nb, nb) & f_.mask()) != zeros_[i].v.t) fail(zeros_[i].ctx);
  }
  if (!instanceOk)
    verdict_ = {false, "instance"};
  else if (haveFailure_)
    verdict_ = {false, firstFailure_.stage};
  else if (!productsOk)
    verdict_ = {false, "product check"};
  else
    verdict_ = {true, ""};
  std::vector<std::uint8_t> out{static_cast<std::uint8_t>(verdict_.accept ? 1 : 0)};
  out.insert(out.end(), verdict_.stage.begin(), verdict_.stage.end());
  t_->send(Frame{Tag::Verdict, std::move(out)});
  finalized_ = true;
  markPhase("");
  return verdict_;
}

Verdict Session::verdict() const {
  if (!finalized_) return {false, "pending deferred checks"};
  return verdict_;
}

}  // namespace zkq
