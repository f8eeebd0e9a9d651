#include "zkqbf/strategy.hpp"

#include <algorithm>
#include <map>

#include "zkqbf/runner.hpp"

namespace zkq {

std::uint32_t strategyMaxOrder(const QbfInstance& inst, StrategyKind kind, std::uint32_t numAux) {
  std::uint32_t n = inst.rankedCount() + numAux;
  if (kind == StrategyKind::Skolem) n += static_cast<std::uint32_t>(inst.matrix().size()) + 1;
  return n;
}

namespace {

struct Derivation {
  std::vector<std::vector<Elem>> codes;  // every clause id - 1
  std::vector<StepWitness> steps;
};

Derivation derive(const QbfInstance& inst, const StrategyBundle& b) {
  ExtendedCoder coder(inst);
  Derivation d;
  for (const auto& c : strategyAxioms(inst, b.strategy)) d.codes.push_back(coder.codes(c));
  StepPolicy pol = propPolicy(codeBitsFor(strategyMaxOrder(inst, b.strategy.kind, b.strategy.numAux)));
  for (const auto& st : b.proof.steps) {
    auto get = [&](std::uint32_t id) {
      return id >= 1 && id <= d.codes.size() ? d.codes[id - 1] : std::vector<Elem>{};
    };
    d.steps.push_back(deriveStep(pol, st.premA, st.premB, coder.code(st.pivot), get(st.premA), get(st.premB), {}));
    d.codes.push_back(d.steps.back().result);
  }
  return d;
}

Val codeOf(Session& s, const Val& order, const Val& sign) { return s.add(s.scale(order, 2), sign); }

}  // namespace

std::vector<std::size_t> strategyWidths(const QbfInstance& inst, const StrategyBundle& b) {
  auto d = derive(inst, b);
  std::size_t P = strategyPublicClauses(inst, b.strategy).size();
  std::vector<std::size_t> w;
  for (std::size_t i = 0; i < d.codes.size(); ++i) {
    if (i >= P && i < P + 3 * b.strategy.gates.size())
      w.push_back((i - P) % 3 == 2 ? 3 : 2);
    else
      w.push_back(d.codes[i].size());
  }
  return w;
}

StrategyPublic strategyPublic(const QbfInstance& inst, const StrategyBundle& b, std::size_t bucketSize) {
  StrategyPublic p;
  p.kind = b.strategy.kind;
  p.gates = static_cast<std::uint32_t>(b.strategy.gates.size());
  p.numAux = b.strategy.numAux;
  p.plan = planBuckets(strategyWidths(inst, b), bucketSize);
  routeSteps(p.plan, b.proof);
  return p;
}

std::vector<GateVals> checkWellFormed(Session& s, const QbfInstance& inst, const StrategyPublic& pub,
                                      const Strategy* prover) {
  const bool herbrand = pub.kind == StrategyKind::Herbrand;
  const std::uint32_t G = pub.gates;
  const std::uint32_t ranked = inst.rankedCount();
  const unsigned ordBits = bitsFor(ranked + pub.numAux);
  ExtendedCoder coder(inst);
  if (prover && prover->gates.size() != G) throw CertError("strategy does not match the public gate count");

  std::vector<std::uint32_t> inputVars = inst.varsOf(herbrand ? Quant::Exists : Quant::Forall);
  std::vector<std::uint32_t> outputVars = inst.varsOf(herbrand ? Quant::Forall : Quant::Exists);
  std::vector<Elem> allowedOut;
  for (auto v : outputVars) allowedOut.push_back(coder.order(v));
  for (std::uint32_t j = 1; j <= pub.numAux; ++j) allowedOut.push_back(ranked + j);

  // Prover bookkeeping: ledger position and dependency level per variable.
  std::map<std::uint32_t, std::uint64_t> position;
  std::map<std::uint32_t, Elem> dep;
  position[0] = 0;
  dep[0] = 0;
  for (std::size_t i = 0; i < inputVars.size(); ++i) {
    position[inputVars[i]] = i + 1;
    dep[inputVars[i]] = coder.order(inputVars[i]);
  }
  const std::uint64_t base = inputVars.size() + 1;
  if (prover) {
    for (std::uint32_t i = 0; i < G; ++i) {
      const Gate& g = prover->gates[i];
      dep[g.out] = std::max(dep.count(g.a.var) ? dep[g.a.var] : 0, dep.count(g.b.var) ? dep[g.b.var] : 0);
      position[g.out] = base + i;
    }
  }

  s.setStage("uniqueness");
  std::vector<GateVals> gates(G);
  std::vector<std::vector<Val>> outBits(G);
  for (std::uint32_t i = 0; i < G; ++i) {
    gates[i].out = s.witness(prover ? coder.order(prover->gates[i].out) : 0);
    outBits[i] = decompose(s, gates[i].out, ordBits);
  }
  std::vector<Elem> sorted;
  if (prover) {
    for (const auto& g : prover->gates) sorted.push_back(coder.order(g.out));
    std::sort(sorted.begin(), sorted.end());
  }
  std::vector<Val> chain;
  std::vector<Val> prevBits;
  for (std::uint32_t i = 0; i < G; ++i) {
    Val t = s.witness(prover ? sorted[i] : 0);
    memberOf(s, t, allowedOut);
    auto bits = decompose(s, t, ordBits);
    if (i > 0) s.assertEqual(greaterThan(s, bits, prevBits), s.constant(1));
    prevBits = std::move(bits);
    chain.push_back(t);
  }
  if (G > 0) {
    std::vector<CPoly> lhs, rhs;
    for (std::uint32_t i = 0; i < G; ++i) {
      lhs.push_back(linearFactor(s, gates[i].out));
      rhs.push_back(linearFactor(s, chain[i]));
    }
    s.polyEq(std::move(lhs), std::move(rhs));
  }

  FlexArray ledger(s, 2, "acyclicity");
  ledger.setIndexBits(bitsFor(base + G));
  ledger.append({s.constant(0), s.constant(0)});
  for (auto v : inputVars) ledger.append({s.constant(coder.order(v)), s.constant(coder.order(v))});

  for (std::uint32_t i = 0; i < G; ++i) {
    const Gate* g = prover ? &prover->gates[i] : nullptr;
    std::vector<Val> deps;
    std::vector<std::vector<Val>> depBits;
    for (int side = 0; side < 2; ++side) {
      Lit in = g ? (side == 0 ? g->a : g->b) : Lit{};
      std::uint64_t idx = 0;
      std::vector<Elem> entry;
      if (g && position.count(in.var)) {
        idx = position[in.var];
        entry = {coder.order(in.var), dep[in.var]};
      }
      s.setStage("acyclicity");
      auto e = ledger.read(idx, base + i, entry);
      Val sign = s.witness(g && in.pos ? 1 : 0);
      s.assertBit(sign);
      (side == 0 ? gates[i].codeA : gates[i].codeB) = codeOf(s, e[0], sign);
      s.setStage("prefix");
      deps.push_back(e[1]);
      depBits.push_back(decompose(s, e[1], ordBits));
    }
    s.setStage("prefix");
    Val level = maxOf(s, deps[0], depBits[0], deps[1], depBits[1]);
    auto levelBits = decompose(s, level, ordBits);
    Val isAux = greaterThan(s, outBits[i], publicBits(s, ranked, ordBits));
    s.assertZero(s.mul(notBit(s, isAux), greaterThan(s, levelBits, outBits[i])));
    ledger.append({gates[i].out, level});
  }

  if (!herbrand) {
    s.setStage("coverage");
    Poly outs;
    if (prover) outs = poly::fromRoots(s.field(), sorted);
    CPoly all = s.witnessPoly(outs.c, G);
    all.push_back(s.constant(1));
    std::vector<CPoly> factors;
    for (const auto& t : chain) factors.push_back(linearFactor(s, t));
    s.polyEq({all}, std::move(factors));
    for (auto v : outputVars) rootOf(s, s.constant(coder.order(v)), all);
  }
  return gates;
}

void checkSubstitution(Session& s, const std::vector<GateVals>& gates, const ResolutionEngine& eng,
                       std::uint32_t firstId) {
  s.setStage("substitution");
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const auto& g = gates[i];
    std::uint32_t id = firstId + static_cast<std::uint32_t>(3 * i);
    Val xNeg = s.scale(g.out, 2);
    Val xPos = s.addConst(xNeg, 1);
    for (int k = 0; k < 2; ++k) {
      const CPoly& c = eng.clause(id + k);
      std::size_t w = clauseWidth(c);
      if (w < 2) throw std::invalid_argument("gate clause bucket narrower than two");
      s.polyEq({c}, {linearFactor(s, xNeg), linearFactor(s, k == 0 ? g.codeA : g.codeB), monomialPoly(s, w - 2)});
    }
    const CPoly& c = eng.clause(id + 2);
    std::size_t w = clauseWidth(c);
    if (w < 3) throw std::invalid_argument("gate clause bucket narrower than three");
    Val same = isZero(s, s.add(g.codeA, g.codeB));
    Val third = s.mul(notBit(s, same), s.addConst(g.codeB, 1));
    s.polyEq({c}, {linearFactor(s, xPos), linearFactor(s, s.addConst(g.codeA, 1)), linearFactor(s, third),
                   monomialPoly(s, w - 3)});
  }
}

void runStrategyProof(Session& s, const QbfInstance& inst, const StrategyPublic& pub, const StrategyBundle* bundle) {
  Strategy shape;
  shape.kind = pub.kind;
  shape.numAux = pub.numAux;
  shape.baseVars = inst.numVars();
  if (bundle && (bundle->strategy.kind != pub.kind || bundle->strategy.numAux != pub.numAux))
    throw CertError("strategy does not match the public parameters");
  auto publicClauses = strategyPublicClauses(inst, shape);
  const std::uint32_t P = static_cast<std::uint32_t>(publicClauses.size());
  const std::uint32_t axioms = P + 3 * pub.gates;
  const auto& plan = pub.plan;
  const std::size_t R = plan.readBuckets.size();
  if (R == 0) throw std::invalid_argument("refutation without steps");
  if (plan.numClauses() != axioms + R) throw std::invalid_argument("bucket plan does not cover every clause");
  if (bundle && (bundle->proof.kind != TraceKind::Prop || bundle->proof.steps.size() != R ||
                 bundle->proof.firstId != axioms + 1))
    throw CertError("resolution trace does not match the public parameters");

  s.markPhase("encode");
  ExtendedCoder coder(inst);
  ResolutionEngine eng(s, plan, propPolicy(codeBitsFor(strategyMaxOrder(inst, pub.kind, pub.numAux))));
  for (const auto& c : publicClauses) eng.addPublic(coder.codes(c));
  Derivation d;
  if (bundle) d = derive(inst, *bundle);

  s.markPhase("commit");
  s.setStage("commit");
  for (std::uint32_t id = P + 1; id <= axioms + R; ++id)
    eng.addCommitted(bundle ? d.codes[id - 1] : std::vector<Elem>{});

  s.markPhase("wellformed");
  auto gates = checkWellFormed(s, inst, pub, bundle ? &bundle->strategy : nullptr);
  s.markPhase("substitution");
  checkSubstitution(s, gates, eng, P + 1);
  s.markPhase("steps");
  for (std::size_t i = 0; i < R; ++i)
    eng.step(i, axioms + 1 + static_cast<std::uint32_t>(i), bundle ? &d.steps[i] : nullptr);
  eng.finalEmpty(static_cast<std::uint32_t>(axioms + R));
}

CheckResult verifyStrategy(const QbfInstance& inst, const StrategyBundle& bundle, Backend backend,
                           std::size_t bucketSize, unsigned fieldBits, std::uint64_t seed) {
  PairOptions opt;
  opt.backend = backend;
  opt.fieldBits = fieldBits;
  opt.seed = seed;
  auto pub = strategyPublic(inst, bundle, bucketSize);
  auto out = runPair(
      opt, [&](Session& s) { runStrategyProof(s, inst, pub, &bundle); },
      [&](Session& s) { runStrategyProof(s, inst, pub, nullptr); });
  return {out.verifier.verdict, out.verifier.stats};
}

}  // namespace zkq
