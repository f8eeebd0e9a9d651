#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "zkqbf/certs.hpp"
#include "zkqbf/gadgets.hpp"
#include "zkqbf/qbf.hpp"

namespace zkq {

// Public routing of clauses into fixed-width arrays. Clause ids start at 1.
struct BucketPlan {
  std::vector<std::size_t> widths;             // per bucket
  std::vector<std::uint32_t> bucketOf;         // per clause id - 1
  std::vector<std::array<std::uint32_t, 2>> readBuckets;  // per step: buckets of both premises

  std::size_t paddedCells() const;
  std::size_t numClauses() const { return bucketOf.size(); }
};

// Sorts clause widths and cuts them into runs of bucketSize; each run is padded to its maximum.
// bucketSize 0 puts everything in one bucket.
BucketPlan planBuckets(const std::vector<std::size_t>& widths, std::size_t bucketSize);
// Records which buckets the premises of each step live in.
void routeSteps(BucketPlan& plan, const QResTrace& trace);
BucketPlan singleBucket(std::size_t numClauses, std::size_t width, std::size_t numSteps);
std::string serializePlan(const BucketPlan& p);
BucketPlan parsePlan(std::string_view text);

// Public rule set of a resolution calculus over literal codes.
struct StepPolicy {
  bool quantified = true;           // false: plain propositional resolution
  std::vector<Elem> pivotSet;       // allowed pivot codes
  std::vector<Elem> removedSet;     // allowed reduced literal codes (includes 0)
  std::vector<Elem> thresholdSet;   // allowed innermost kept literal codes (includes 0)
  unsigned codeBits = 8;
  std::size_t degree = 0;           // bound on removed literals per step
};

StepPolicy qresPolicy(const QbfInstance& inst, std::size_t degree);
StepPolicy cubePolicy(const QbfInstance& inst, std::size_t degree);
StepPolicy propPolicy(unsigned codeBits);

// Prover-side data of one step, all as literal codes.
struct StepWitness {
  std::uint32_t premA = 0, premB = 0;
  Elem pivot = 1;
  std::vector<Elem> merged;     // resolvent before reduction
  std::vector<Elem> residual;   // kept literals except the threshold literal
  Elem threshold = 0;
  std::vector<Elem> removed;
  std::vector<Elem> result;     // derived clause
};

// Derives step witnesses from codes of the premises.
StepWitness deriveStep(const StepPolicy& pol, std::uint32_t premA, std::uint32_t premB, Elem pivot,
                       const std::vector<Elem>& ca, const std::vector<Elem>& cb,
                       const std::vector<Elem>& removed);

class ResolutionEngine {
public:
  ResolutionEngine(Session& s, BucketPlan plan, StepPolicy policy);

  // Must be called for ids 1, 2, ... in order. Codes are ignored on the verifier side for committed clauses.
  void addPublic(const std::vector<Elem>& codes);
  void addCommitted(const std::vector<Elem>& codes);
  const CPoly& clause(std::uint32_t id) const { return stored_.at(id - 1); }
  std::size_t widthOf(std::uint32_t id) const { return plan_.widths[plan_.bucketOf[id - 1]]; }

  // Checks derivation of clause `id` (step index `step`); w is ignored by the verifier.
  void step(std::size_t step, std::uint32_t id, const StepWitness* w);
  // Pieces of a step, usable on their own.
  void checkXres(const CPoly& ca, const CPoly& cb, const Val& pivot, const CPoly& merged);
  void checkUred(const CPoly& merged, const CPoly& result, const StepWitness* w);
  void finalEmpty(std::uint32_t id);

  const BucketPlan& plan() const { return plan_; }

private:
  std::uint64_t timeFor(std::uint32_t bucket, std::uint32_t id) const;

  Session& s_;
  BucketPlan plan_;
  StepPolicy pol_;
  std::vector<FlexArray> arrays_;
  std::vector<CPoly> stored_;
  std::vector<std::vector<Elem>> codes_;    // prover only
  std::vector<std::uint32_t> local_;
};

struct CheckResult {
  Verdict verdict;
  SessionStats stats;
};

// Both parties run the same script; the verifier passes no trace (only public parameters).
struct QResPublic {
  std::uint32_t steps = 0, width = 0, degree = 0;
};
QResPublic qresPublic(const QResTrace& t);
void runQResProof(Session& s, const QbfInstance& inst, const QResPublic& pub, const QResTrace* trace);
// Convenience: in-process run of both parties.
CheckResult checkProof(const QbfInstance& inst, const QResTrace& trace, Backend backend,
                       unsigned fieldBits = 64, std::uint64_t seed = 1);

unsigned codeBitsFor(std::uint64_t maxOrder);

}  // namespace zkq
