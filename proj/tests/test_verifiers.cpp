#include <gtest/gtest.h>

#include "support.hpp"
#include "zkqbf/cube.hpp"
#include "zkqbf/oracle.hpp"
#include "zkqbf/qres.hpp"
#include "zkqbf/strategy.hpp"

using namespace zkq;
using test::fixture;
using test::forallExists;
using test::formula1;
using test::kBackends;

class Verifiers : public ::testing::TestWithParam<Backend> {};

TEST_P(Verifiers, GridRefutation) {
  auto inst = formula1();
  auto t = parseQResTrace(fixture("formula1.zkqres"));
  auto r = checkProof(inst, t, GetParam());
  EXPECT_TRUE(r.verdict.accept) << r.verdict.stage;
  EXPECT_GT(r.stats.committed, 0u);
}

TEST_P(Verifiers, NonEmptyFinalClause) {
  auto inst = formula1();
  auto t = parseQResTrace(fixture("formula1.zkqres"));
  t.steps.back().removed.clear();
  auto r = checkProof(inst, t, GetParam());
  EXPECT_FALSE(r.verdict.accept);
  EXPECT_EQ(r.verdict.stage, "empty-clause");
}

TEST_P(Verifiers, PivotOnUniversal) {
  auto inst = formula1();
  auto t = parseQResTrace(fixture("formula1.zkqres"));
  t.steps[2].pivot = Lit{1, true};
  EXPECT_FALSE(checkProof(inst, t, GetParam()).verdict.accept);
}

TEST_P(Verifiers, ReadBeforeDerivation) {
  auto inst = formula1();
  auto t = parseQResTrace(fixture("formula1.zkqres"));
  t.steps[2].premB = 7;  // its own id
  auto r = checkProof(inst, t, GetParam());
  EXPECT_FALSE(r.verdict.accept);
  EXPECT_EQ(r.verdict.stage, "array");
}

TEST_P(Verifiers, ReductionBelowExistential) {
  auto inst = parseQdimacs("p cnf 2 2\na 1 0\ne 2 0\n1 2 0\n1 -2 0\n");
  // removing x0 from (x0 or y) is not allowed
  auto t = parseQResTrace("p zkqres 3 2 1\n3 1 1 T r 1 0\n4 2 2 T r 1 0\n5 3 4 2 r 0\n");
  EXPECT_FALSE(plainCheck(inst, t));
  EXPECT_FALSE(checkProof(inst, t, GetParam()).verdict.accept);
}

TEST_P(Verifiers, CubeProofs) {
  auto fe = forallExists();
  EXPECT_TRUE(checkCubeProof(fe, parseCubeTrace(fixture("forall_exists.zkcube")), GetParam()).verdict.accept);
  auto unit = parseQdimacs(fixture("exists_unit.qdimacs"));
  EXPECT_TRUE(checkCubeProof(unit, parseCubeTrace(fixture("exists_unit.zkcube")), GetParam()).verdict.accept);
}

TEST_P(Verifiers, CubeMissingWitness) {
  auto fe = forallExists();
  auto t = parseCubeTrace(fixture("forall_exists.zkcube"));
  t.cubes[0].witnesses[0].reset();
  auto r = checkCubeProof(fe, t, GetParam());
  EXPECT_FALSE(r.verdict.accept);
  EXPECT_EQ(r.verdict.stage, "set");
}

TEST_P(Verifiers, CubeNotAnImplicant) {
  auto fe = forallExists();
  auto t = parseCubeTrace(fixture("forall_exists.zkcube"));
  t.cubes[0].cube = {{1, false}};
  t.cubes[0].witnesses = {Lit{1, false}, Lit{1, false}};
  EXPECT_FALSE(checkCubeProof(fe, t, GetParam()).verdict.accept);
}

TEST_P(Verifiers, ContradictoryCube) {
  auto fe = forallExists();
  auto t = parseCubeTrace(fixture("forall_exists.zkcube"));
  t.cubes[0].cube = {{2, true}, {2, false}};
  t.cubes[0].witnesses = {Lit{2, true}, Lit{2, false}};
  auto r = checkCubeProof(fe, t, GetParam());
  EXPECT_FALSE(r.verdict.accept);
  EXPECT_EQ(r.verdict.stage, "cube");
}

TEST_P(Verifiers, CubeReductionBeforeUniversal) {
  auto inst = parseQdimacs("p cnf 2 1\ne 1 0\na 2 0\n1 0\n");
  // x precedes u and cannot be reduced out of {x, u}
  auto t = parseCubeTrace("p zkcube 1 2 2 1\ni 1 2 0 1 0\n2 1 1 T r 1 0\n3 2 2 T r 2 0\n");
  EXPECT_FALSE(plainCheck(inst, t));
  EXPECT_FALSE(checkCubeProof(inst, t, GetParam()).verdict.accept);
}

TEST_P(Verifiers, GridStrategy) {
  auto inst = formula1();
  auto b = parseStrategyBundle(fixture("formula1.zkstrat"), 3);
  for (std::size_t kB : {0u, 2u}) {
    auto r = verifyStrategy(inst, b, GetParam(), kB);
    EXPECT_TRUE(r.verdict.accept) << r.verdict.stage;
  }
}

TEST_P(Verifiers, SkolemStrategy) {
  auto inst = forallExists();
  auto b = parseStrategyBundle(fixture("forall_exists.zkstrat"), 2);
  auto r = verifyStrategy(inst, b, GetParam());
  EXPECT_TRUE(r.verdict.accept) << r.verdict.stage;
}

TEST_P(Verifiers, WrongStrategyLoses) {
  auto inst = formula1();
  auto b = parseStrategyBundle(fixture("formula1.zkstrat"), 3);
  b.strategy.gates[1] = Gate{3, {2, false}, {2, false}};
  auto axioms = strategyAxioms(inst, b.strategy);
  EXPECT_FALSE(refuteCnf(axioms).has_value());
  EXPECT_FALSE(plainCheck(inst, b));
  auto r = verifyStrategy(inst, b, GetParam());
  EXPECT_FALSE(r.verdict.accept);
}

INSTANTIATE_TEST_SUITE_P(Backends, Verifiers, ::testing::ValuesIn(kBackends),
                         [](const auto& info) { return std::string(backendName(info.param)); });

namespace {

std::string failingStage(const QbfInstance& inst, const StrategyBundle& b) {
  auto r = verifyStrategy(inst, b, Backend::ItMac);
  return r.verdict.accept ? "accept" : r.verdict.stage;
}

}  // namespace

TEST(WellFormed, OutputOfWrongClass) {
  auto inst = formula1();
  auto b = parseStrategyBundle(fixture("formula1.zkstrat"), 3);
  b.strategy.gates[1].out = 2;
  EXPECT_EQ(failingStage(inst, b), "uniqueness");
  EXPECT_EQ(plainWellFormed(inst, b.strategy).reason.rfind("uniqueness", 0), 0u);
}

TEST(WellFormed, DefinedTwice) {
  auto inst = formula1();
  auto b = parseStrategyBundle(fixture("formula1.zkstrat"), 3);
  b.strategy.gates[0].out = 3;
  EXPECT_EQ(failingStage(inst, b), "uniqueness");
}

TEST(WellFormed, ReadsUndefinedAux) {
  auto inst = formula1();
  auto b = parseStrategyBundle(fixture("formula1.zkstrat"), 3);
  b = test::withGates(inst, b, {b.strategy.gates[0], Gate{3, {4, true}, {4, true}}, Gate{4, {2, true}, {2, true}}}, 1);
  EXPECT_EQ(failingStage(inst, b), "acyclicity");
  EXPECT_EQ(plainWellFormed(inst, b.strategy).reason.rfind("acyclicity", 0), 0u);
}

TEST(WellFormed, ReadsUniversalBeforeItsGate) {
  auto inst = formula1();
  auto b = parseStrategyBundle(fixture("formula1.zkstrat"), 3);
  b.strategy.gates = {Gate{1, {3, true}, {3, true}}, Gate{3, {2, true}, {2, true}}};
  EXPECT_EQ(failingStage(inst, b), "acyclicity");
}

TEST(WellFormed, ReadsEarlierUniversalOutput) {
  auto inst = formula1();
  auto b = parseStrategyBundle(fixture("formula1.zkstrat"), 3);
  b.strategy.gates[1] = Gate{3, {1, true}, {1, true}};
  auto r = verifyStrategy(inst, b, Backend::ItMac);
  EXPECT_FALSE(r.verdict.accept);
  EXPECT_EQ(r.verdict.stage, "resolution");
  EXPECT_TRUE(plainWellFormed(inst, b.strategy));
}

TEST(WellFormed, DependsOnLaterVariable) {
  auto inst = formula1();
  auto b = parseStrategyBundle(fixture("formula1.zkstrat"), 3);
  b.strategy.gates[0] = Gate{1, {2, true}, {2, true}};
  EXPECT_EQ(failingStage(inst, b), "prefix");
  EXPECT_EQ(plainWellFormed(inst, b.strategy).reason.rfind("prefix", 0), 0u);
}

TEST(WellFormed, SkolemLeavesExistentialUndefined) {
  auto inst = forallExists();
  auto b = parseStrategyBundle(fixture("forall_exists.zkstrat"), 2);
  b = test::withGates(inst, b, {}, 0);
  EXPECT_EQ(failingStage(inst, b), "coverage");
  EXPECT_EQ(plainWellFormed(inst, b.strategy).reason.rfind("coverage", 0), 0u);
}

TEST(WellFormed, SmuggledLiteralInGateClause) {
  // a committed gate clause that differs from the gate's Tseitin clauses
  auto inst = formula1();
  auto b = parseStrategyBundle(fixture("formula1.zkstrat"), 3);
  b.strategy.gates[1] = Gate{3, {2, true}, {2, false}};
  auto r = verifyStrategy(inst, b, Backend::ItMac);
  EXPECT_FALSE(r.verdict.accept);
}
