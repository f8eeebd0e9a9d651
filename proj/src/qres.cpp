#include "zkqbf/qres.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "zkqbf/runner.hpp"

namespace zkq {

std::size_t BucketPlan::paddedCells() const {
  std::size_t n = 0;
  for (auto b : bucketOf) n += widths[b];
  return n;
}

BucketPlan planBuckets(const std::vector<std::size_t>& widths, std::size_t bucketSize) {
  BucketPlan p;
  p.bucketOf.assign(widths.size(), 0);
  if (widths.empty()) {
    p.widths.push_back(0);
    return p;
  }
  if (bucketSize == 0) bucketSize = widths.size();
  std::vector<std::size_t> order(widths.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return widths[a] < widths[b]; });
  for (std::size_t start = 0; start < order.size(); start += bucketSize) {
    std::size_t end = std::min(order.size(), start + bucketSize);
    std::size_t w = 0;
    for (std::size_t i = start; i < end; ++i) {
      w = std::max(w, widths[order[i]]);
      p.bucketOf[order[i]] = static_cast<std::uint32_t>(p.widths.size());
    }
    p.widths.push_back(w);
  }
  return p;
}

void routeSteps(BucketPlan& plan, const QResTrace& trace) {
  plan.readBuckets.clear();
  auto bucket = [&](std::uint32_t id) -> std::uint32_t {
    return id >= 1 && id <= plan.bucketOf.size() ? plan.bucketOf[id - 1] : 0;
  };
  for (const auto& st : trace.steps) plan.readBuckets.push_back({bucket(st.premA), bucket(st.premB)});
}

BucketPlan singleBucket(std::size_t numClauses, std::size_t width, std::size_t numSteps) {
  BucketPlan p;
  p.widths = {width};
  p.bucketOf.assign(numClauses, 0);
  p.readBuckets.assign(numSteps, {0, 0});
  return p;
}

std::string serializePlan(const BucketPlan& p) {
  std::ostringstream os;
  os << p.widths.size();
  for (auto w : p.widths) os << ' ' << w;
  os << ' ' << p.bucketOf.size();
  for (auto b : p.bucketOf) os << ' ' << b;
  os << ' ' << p.readBuckets.size();
  for (auto& r : p.readBuckets) os << ' ' << r[0] << ' ' << r[1];
  return os.str();
}

BucketPlan parsePlan(std::string_view text) {
  std::istringstream is{std::string(text)};
  BucketPlan p;
  auto count = [&] {
    long long n;
    if (!(is >> n) || n < 0 || n > (1LL << 28)) throw std::invalid_argument("malformed bucket plan");
    return static_cast<std::size_t>(n);
  };
  std::size_t nb = count();
  for (std::size_t i = 0; i < nb; ++i) p.widths.push_back(count());
  std::size_t nc = count();
  for (std::size_t i = 0; i < nc; ++i) {
    auto b = count();
    if (b >= nb) throw std::invalid_argument("bucket plan references unknown bucket");
    p.bucketOf.push_back(static_cast<std::uint32_t>(b));
  }
  std::size_t ns = count();
  for (std::size_t i = 0; i < ns; ++i) {
    auto a = count(), b = count();
    if (a >= nb || b >= nb) throw std::invalid_argument("bucket plan references unknown bucket");
    p.readBuckets.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)});
  }
  if (nb == 0) throw std::invalid_argument("bucket plan without buckets");
  return p;
}

unsigned codeBitsFor(std::uint64_t maxOrder) { return bitsFor(2 * maxOrder + 1); }

namespace {

std::vector<Elem> withCodes(std::vector<Elem> set, std::initializer_list<Elem> extra) {
  set.insert(set.end(), extra.begin(), extra.end());
  std::sort(set.begin(), set.end());
  set.erase(std::unique(set.begin(), set.end()), set.end());
  return set;
}

std::vector<Elem> uniqueCodes(std::vector<Elem> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool contains(const std::vector<Elem>& v, Elem e) { return std::find(v.begin(), v.end(), e) != v.end(); }

}  // namespace

StepPolicy qresPolicy(const QbfInstance& inst, std::size_t degree) {
  StepPolicy p;
  p.pivotSet = withCodes(literalSet(inst, Quant::Exists), {0, 1});
  p.removedSet = withCodes(literalSet(inst, Quant::Forall), {0});
  p.thresholdSet = withCodes(literalSet(inst, Quant::Exists), {0});
  p.codeBits = codeBitsFor(inst.rankedCount());
  p.degree = degree;
  return p;
}

StepPolicy cubePolicy(const QbfInstance& inst, std::size_t degree) {
  StepPolicy p;
  p.pivotSet = withCodes(literalSet(inst, Quant::Forall), {0, 1});
  p.removedSet = withCodes(literalSet(inst, Quant::Exists), {0});
  p.thresholdSet = withCodes(literalSet(inst, Quant::Forall), {0});
  p.codeBits = codeBitsFor(inst.rankedCount());
  p.degree = degree;
  return p;
}

StepPolicy propPolicy(unsigned codeBits) {
  StepPolicy p;
  p.quantified = false;
  p.codeBits = codeBits;
  return p;
}

StepWitness deriveStep(const StepPolicy& pol, std::uint32_t premA, std::uint32_t premB, Elem pivot,
                       const std::vector<Elem>& ca, const std::vector<Elem>& cb,
                       const std::vector<Elem>& removed) {
  StepWitness w;
  w.premA = premA;
  w.premB = premB;
  w.pivot = pivot;
  for (Elem c : ca)
    if (c != pivot) w.merged.push_back(c);
  for (Elem c : cb)
    if (c != (pivot ^ 1)) w.merged.push_back(c);
  w.merged = uniqueCodes(std::move(w.merged));
  if (!pol.quantified) {
    w.result = w.merged;
    return w;
  }
  w.removed = uniqueCodes(removed);
  for (Elem c : w.merged)
    if (!contains(w.removed, c)) w.result.push_back(c);
  for (Elem c : w.result)
    if (contains(pol.thresholdSet, c) && codeOrder(c) >= codeOrder(w.threshold)) w.threshold = c;
  for (Elem c : w.result)
    if (c != w.threshold) w.residual.push_back(c);
  return w;
}

ResolutionEngine::ResolutionEngine(Session& s, BucketPlan plan, StepPolicy policy)
    : s_(s), plan_(std::move(plan)), pol_(std::move(policy)) {
  for (auto w : plan_.widths) arrays_.emplace_back(s_, w, "array");
  for (auto& a : arrays_) a.setIndexBits(bitsFor(plan_.numClauses()));
}

void ResolutionEngine::addPublic(const std::vector<Elem>& codes) {
  std::size_t id = stored_.size() + 1;
  if (id > plan_.numClauses()) throw std::invalid_argument("more clauses than the plan holds");
  auto b = plan_.bucketOf[id - 1];
  if (codes.size() > plan_.widths[b]) throw std::invalid_argument("public clause wider than its bucket");
  CPoly c = publicClause(s_, codes, plan_.widths[b]);
  arrays_[b].append(clauseEntry(c));
  local_.push_back(static_cast<std::uint32_t>(arrays_[b].size() - 1));
  stored_.push_back(std::move(c));
  codes_.push_back(codes);
}

void ResolutionEngine::addCommitted(const std::vector<Elem>& codes) {
  std::size_t id = stored_.size() + 1;
  if (id > plan_.numClauses()) throw std::invalid_argument("more clauses than the plan holds");
  auto b = plan_.bucketOf[id - 1];
  CPoly c = commitClause(s_, codes, plan_.widths[b]);
  arrays_[b].append(clauseEntry(c));
  local_.push_back(static_cast<std::uint32_t>(arrays_[b].size() - 1));
  stored_.push_back(std::move(c));
  codes_.push_back(s_.isProver() ? codes : std::vector<Elem>{});
}

std::uint64_t ResolutionEngine::timeFor(std::uint32_t bucket, std::uint32_t id) const {
  std::uint64_t n = 0;
  for (std::uint32_t i = 1; i < id; ++i)
    if (plan_.bucketOf[i - 1] == bucket) ++n;
  return n;
}

void ResolutionEngine::step(std::size_t step, std::uint32_t id, const StepWitness* w) {
  auto buckets = plan_.readBuckets.at(step);
  auto fetch = [&](std::uint32_t bucket, std::uint32_t prem) {
    std::uint64_t idx = 0;
    std::vector<Elem> entry;
    if (w && prem >= 1 && prem < id) {
      idx = local_[prem - 1];
      entry = plain(clauseEntry(stored_[prem - 1]));
    }
    s_.setStage("array");
    return clauseFromEntry(s_, arrays_[bucket].read(idx, timeFor(bucket, id), entry));
  };
  CPoly ca = fetch(buckets[0], w ? w->premA : 0);
  CPoly cb = fetch(buckets[1], w ? w->premB : 0);
  s_.setStage("resolution");
  Val pivot = s_.witness(w ? w->pivot : 0);
  if (!pol_.quantified) {
    // Axioms may hold the true literal, so constant pivots are refused.
    Elem hint = w && w->pivot > 1 ? s_.field().inv(w->pivot ^ s_.field().mul(w->pivot, w->pivot)) : 0;
    s_.assertProduct(s_.mul(pivot, s_.addConst(pivot, 1)), s_.witness(hint), s_.constant(1));
    clauseRes(s_, ca, cb, pivot, clause(id));
    return;
  }
  CPoly merged = commitClause(s_, w ? w->merged : std::vector<Elem>{}, widthOf(id));
  checkXres(ca, cb, pivot, merged);
  checkUred(merged, clause(id), w);
}

void ResolutionEngine::checkXres(const CPoly& ca, const CPoly& cb, const Val& pivot, const CPoly& merged) {
  s_.setStage("resolution");
  clauseRes(s_, ca, cb, pivot, merged);
  s_.setStage("pivot-quantifier");
  memberOf(s_, pivot, pol_.pivotSet);
}

void ResolutionEngine::checkUred(const CPoly& merged, const CPoly& result, const StepWitness* w) {
  static const std::vector<Elem> none;
  std::size_t width = clauseWidth(result);
  s_.setStage("reduction");
  CPoly res = commitClause(s_, w ? w->residual : none, width);
  Val lead = s_.witness(w ? w->threshold : 0);
  CPoly rem = commitClause(s_, w ? w->removed : none, pol_.degree);
  auto resCodes = retrieveCodes(s_, res, w ? w->residual : none);
  auto remCodes = retrieveCodes(s_, rem, w ? w->removed : none);
  CPoly leadFactor = linearFactor(s_, lead);
  equalParts(s_, merged, {res, leadFactor, rem}, true);
  equalParts(s_, result, {res, leadFactor}, false);

  // Kept literals of the threshold's class sit below it; other kept literals are unconstrained.
  s_.setStage("reduction-quantifier");
  std::vector<Val> sameClass;
  for (const auto& c : resCodes) {
    Val q = s_.witness(s_.isProver() && c.v != 0 && contains(pol_.thresholdSet, c.v) ? 1 : 0);
    s_.assertBit(q);
    std::vector<Val> inKept, inRemoved;
    for (Elem e : pol_.thresholdSet) inKept.push_back(s_.addConst(c, e));
    for (Elem e : pol_.removedSet) inRemoved.push_back(s_.addConst(c, e));
    s_.assertZero(s_.mul(q, s_.mulMany(inKept)));
    s_.assertZero(s_.mul(notBit(s_, q), s_.mulMany(inRemoved)));
    sameClass.push_back(q);
  }

  s_.setStage("reduction-order");
  auto leadOrder = orderBits(decompose(s_, lead, pol_.codeBits));
  for (std::size_t i = 0; i < resCodes.size(); ++i) {
    auto ord = orderBits(decompose(s_, resCodes[i], pol_.codeBits));
    Val below = greaterThan(s_, leadOrder, ord);
    s_.assertZero(s_.mul(sameClass[i], notBit(s_, below)));
  }
  for (const auto& c : remCodes) {
    auto ord = orderBits(decompose(s_, c, pol_.codeBits));
    Val above = greaterThan(s_, ord, leadOrder);
    s_.assertZero(s_.mul(notBit(s_, above), c));
  }

  s_.setStage("reduction-quantifier");
  for (const auto& c : remCodes) memberOf(s_, c, pol_.removedSet);
  memberOf(s_, lead, pol_.thresholdSet);
}

void ResolutionEngine::finalEmpty(std::uint32_t id) {
  s_.setStage("empty-clause");
  isFalse(s_, clause(id));
}

QResPublic qresPublic(const QResTrace& t) {
  return {static_cast<std::uint32_t>(t.steps.size()), t.width, t.degree};
}

namespace {

std::size_t widestClause(const QbfInstance& inst) {
  std::size_t w = 0;
  for (const auto& c : inst.matrix()) w = std::max(w, clauseCodes(inst, c).size());
  return w;
}

}  // namespace

void runQResProof(Session& s, const QbfInstance& inst, const QResPublic& pub, const QResTrace* trace) {
  const std::uint32_t L = static_cast<std::uint32_t>(inst.matrix().size());
  if (pub.width < widestClause(inst)) throw std::invalid_argument("proof width below the widest matrix clause");
  if (pub.steps == 0) throw std::invalid_argument("refutation without steps");
  if (trace && (trace->steps.size() != pub.steps || trace->firstId != L + 1))
    throw CertError("trace does not match the instance");
  s.markPhase("encode");
  StepPolicy pol = qresPolicy(inst, pub.degree);
  ResolutionEngine eng(s, singleBucket(L + pub.steps, pub.width, pub.steps), pol);
  std::vector<std::vector<Elem>> codes;
  for (const auto& c : inst.matrix()) {
    codes.push_back(clauseCodes(inst, c));
    eng.addPublic(codes.back());
  }
  std::vector<StepWitness> ws;
  if (trace) {
    for (const auto& st : trace->steps) {
      auto get = [&](std::uint32_t id) { return id >= 1 && id <= codes.size() ? codes[id - 1] : std::vector<Elem>{}; };
      ws.push_back(deriveStep(pol, st.premA, st.premB, encodeLiteral(inst, st.pivot), get(st.premA),
                              get(st.premB), clauseCodes(inst, st.removed)));
      codes.push_back(ws.back().result);
    }
  }
  s.markPhase("commit");
  s.setStage("commit");
  for (std::uint32_t i = 0; i < pub.steps; ++i) eng.addCommitted(trace ? codes[L + i] : std::vector<Elem>{});
  s.markPhase("steps");
  for (std::uint32_t i = 0; i < pub.steps; ++i) eng.step(i, L + 1 + i, trace ? &ws[i] : nullptr);
  eng.finalEmpty(L + pub.steps);
}

CheckResult checkProof(const QbfInstance& inst, const QResTrace& trace, Backend backend, unsigned fieldBits,
                       std::uint64_t seed) {
  PairOptions opt;
  opt.backend = backend;
  opt.fieldBits = fieldBits;
  opt.seed = seed;
  auto pub = qresPublic(trace);
  auto out = runPair(
      opt, [&](Session& s) { runQResProof(s, inst, pub, &trace); },
      [&](Session& s) { runQResProof(s, inst, pub, nullptr); });
  return {out.verifier.verdict, out.verifier.stats};
}

}  // namespace zkq
