#pragma once

#include <cstdint>
#include <vector>

#include "zkqbf/certs.hpp"
#include "zkqbf/qres.hpp"

namespace zkq {

// Public shape of a strategy proof: gate and aux counts plus the clause routing.
struct StrategyPublic {
  StrategyKind kind = StrategyKind::Herbrand;
  std::uint32_t gates = 0;
  std::uint32_t numAux = 0;
  BucketPlan plan;  // axioms (public clauses, then three per gate), then derived clauses
};

// Widths the plan is built from: public clause widths, 2/2/3 per gate, derived clause widths.
std::vector<std::size_t> strategyWidths(const QbfInstance& inst, const StrategyBundle& b);
StrategyPublic strategyPublic(const QbfInstance& inst, const StrategyBundle& b, std::size_t bucketSize);

// Committed view of a gate: output variable order and both input literal codes.
struct GateVals {
  Val out;
  Val codeA, codeB;
};

// Unique outputs of the right quantifier class, acyclic inputs, dependencies within the prefix,
// and for Skolem strategies every existential defined.
std::vector<GateVals> checkWellFormed(Session& s, const QbfInstance& inst, const StrategyPublic& pub,
                                      const Strategy* prover);
// The committed gate clauses firstId, firstId+1, ... are the Tseitin clauses of the gates.
void checkSubstitution(Session& s, const std::vector<GateVals>& gates, const ResolutionEngine& eng,
                       std::uint32_t firstId);
void runStrategyProof(Session& s, const QbfInstance& inst, const StrategyPublic& pub, const StrategyBundle* bundle);
CheckResult verifyStrategy(const QbfInstance& inst, const StrategyBundle& bundle, Backend backend,
                           std::size_t bucketSize = 0, unsigned fieldBits = 64, std::uint64_t seed = 1);

// Largest variable order used by a strategy proof (selectors included).
std::uint32_t strategyMaxOrder(const QbfInstance& inst, StrategyKind kind, std::uint32_t numAux);

}  // namespace zkq
