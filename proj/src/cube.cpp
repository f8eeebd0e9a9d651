#include "zkqbf/cube.hpp"

#include "zkqbf/runner.hpp"

namespace zkq {

CubePublic cubePublic(const CubeTrace& t) {
  return {static_cast<std::uint32_t>(t.cubes.size()), static_cast<std::uint32_t>(t.steps.size()), t.width,
          t.degree};
}

void checkInitialCube(Session& s, const QbfInstance& inst, const CPoly& cube, const InitialCube* prover) {
  s.setStage("cube");
  nonTautological(s, cube);
  s.setStage("set");
  const auto& matrix = inst.matrix();
  for (std::size_t j = 0; j < matrix.size(); ++j) {
    Elem code = 0;
    if (prover && j < prover->witnesses.size() && prover->witnesses[j]) code = encodeLiteral(inst, *prover->witnesses[j]);
    Val w = s.witness(code);
    memberOf(s, w, clauseCodes(inst, matrix[j]));
    rootOf(s, w, cube);
  }
}

void runCubeProof(Session& s, const QbfInstance& inst, const CubePublic& pub, const CubeTrace* trace) {
  const std::uint32_t I = pub.cubes;
  if (I == 0) throw std::invalid_argument("cube proof without initial cubes");
  if (pub.width == 0) throw std::invalid_argument("cube width must be positive");
  if (trace && (trace->cubes.size() != I || trace->steps.size() != pub.steps))
    throw CertError("trace does not match the public parameters");
  s.markPhase("encode");
  StepPolicy pol = cubePolicy(inst, pub.degree);
  ResolutionEngine eng(s, singleBucket(I + pub.steps, pub.width, pub.steps), pol);
  std::vector<std::vector<Elem>> codes;
  std::vector<StepWitness> ws;
  if (trace) {
    for (const auto& c : trace->cubes) codes.push_back(clauseCodes(inst, c.cube));
    for (const auto& st : trace->steps) {
      auto get = [&](std::uint32_t id) { return id >= 1 && id <= codes.size() ? codes[id - 1] : std::vector<Elem>{}; };
      ws.push_back(deriveStep(pol, st.premA, st.premB, encodeLiteral(inst, st.pivot), get(st.premA),
                              get(st.premB), clauseCodes(inst, st.removed)));
      codes.push_back(ws.back().result);
    }
  }
  s.markPhase("commit");
  s.setStage("commit");
  for (std::uint32_t i = 0; i < I + pub.steps; ++i) eng.addCommitted(trace ? codes[i] : std::vector<Elem>{});
  s.markPhase("cubes");
  for (std::uint32_t i = 0; i < I; ++i) checkInitialCube(s, inst, eng.clause(i + 1), trace ? &trace->cubes[i] : nullptr);
  s.markPhase("steps");
  for (std::uint32_t i = 0; i < pub.steps; ++i) eng.step(i, I + 1 + i, trace ? &ws[i] : nullptr);
  eng.finalEmpty(I + pub.steps);
}

CheckResult checkCubeProof(const QbfInstance& inst, const CubeTrace& trace, Backend backend, unsigned fieldBits,
                           std::uint64_t seed) {
  PairOptions opt;
  opt.backend = backend;
  opt.fieldBits = fieldBits;
  opt.seed = seed;
  auto pub = cubePublic(trace);
  auto out = runPair(
      opt, [&](Session& s) { runCubeProof(s, inst, pub, &trace); },
      [&](Session& s) { runCubeProof(s, inst, pub, nullptr); });
  return {out.verifier.verdict, out.verifier.stats};
}

}  // namespace zkq
