#pragma once

#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "zkqbf/certs.hpp"
#include "zkqbf/qbf.hpp"
#include "zkqbf/runner.hpp"

namespace zkq::test {

inline std::string fixture(const std::string& name) {
  std::ifstream f(std::string(FIXTURE_DIR) + "/" + name, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::string fixturePath(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }

inline QbfInstance formula1() { return parseQdimacs(fixture("formula1.qdimacs")); }
inline QbfInstance forallExists() { return parseQdimacs(fixture("forall_exists.qdimacs")); }

// Runs the same script as prover and verifier; returns the verifier's verdict.
inline Verdict runBoth(const std::function<void(Session&)>& script, Backend backend = Backend::ItMac,
                       unsigned fieldBits = 64, std::uint64_t seed = 1) {
  PairOptions opt;
  opt.backend = backend;
  opt.fieldBits = fieldBits;
  opt.seed = seed;
  return runPair(opt, script, script).verifier.verdict;
}

// Replaces the gate list and renumbers the proof so its ids still line up with the axioms.
inline StrategyBundle withGates(const QbfInstance& inst, StrategyBundle b, std::vector<Gate> gates,
                                std::uint32_t numAux) {
  auto P = static_cast<std::uint32_t>(strategyPublicClauses(inst, b.strategy).size());
  auto oldG = static_cast<std::int64_t>(b.strategy.gates.size());
  auto shift = 3 * (static_cast<std::int64_t>(gates.size()) - oldG);
  auto move = [&](std::uint32_t id) -> std::uint32_t {
    if (id <= P) return id;
    if (id < b.proof.firstId && id - P > 3 * gates.size()) return 1;
    return static_cast<std::uint32_t>(id + shift);
  };
  for (auto& st : b.proof.steps) {
    st.premA = move(st.premA);
    st.premB = move(st.premB);
  }
  b.proof.firstId = static_cast<std::uint32_t>(b.proof.firstId + shift);
  b.strategy.gates = std::move(gates);
  b.strategy.numAux = numAux;
  return b;
}

inline const Backend kBackends[] = {Backend::Cleartext, Backend::ItMac};

}  // namespace zkq::test
