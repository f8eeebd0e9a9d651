#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "zkqbf/qbf.hpp"

namespace zkq {

class CertError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// One fused step: resolve premA with premB on pivot, then drop `removed`.
// A sentinel pivot (T) with premB == premA copies the premise.
struct ResStep {
  std::uint32_t premA = 0;
  std::uint32_t premB = 0;
  Lit pivot = Lit::top();
  Clause removed;
};

enum class TraceKind { QRes, Prop };

struct QResTrace {
  TraceKind kind = TraceKind::QRes;
  std::uint32_t width = 0;
  std::uint32_t degree = 0;
  std::uint32_t firstId = 1;  // id of the first derived clause (number of axioms + 1)
  std::vector<ResStep> steps;

  std::uint32_t numAxioms() const { return firstId - 1; }
};

struct InitialCube {
  Clause cube;
  std::vector<std::optional<Lit>> witnesses;  // one per matrix clause
};

struct CubeTrace {
  std::uint32_t width = 0;
  std::uint32_t degree = 0;
  std::vector<InitialCube> cubes;
  std::vector<ResStep> steps;
};

struct Gate {
  std::uint32_t out = 0;
  Lit a;
  Lit b;
};

enum class StrategyKind { Herbrand, Skolem };

struct Strategy {
  StrategyKind kind = StrategyKind::Herbrand;
  std::uint32_t numAux = 0;
  std::uint32_t baseVars = 0;  // aux variable j is baseVars + j
  std::vector<Gate> gates;

  bool isAux(std::uint32_t var) const { return var > baseVars; }
};

QResTrace parseQResTrace(std::string_view text);
CubeTrace parseCubeTrace(std::string_view text);
std::string serializeQResTrace(const QResTrace& t);
std::string serializeCubeTrace(const CubeTrace& t);

// Aux variables are written aJ in the text and mapped to numVars + J.
Strategy parseStrategy(std::string_view text, std::uint32_t numVars);
std::string serializeStrategy(const Strategy& s);

// A strategy certificate file holds the gate list followed by a p zkprop trace.
struct StrategyBundle {
  Strategy strategy;
  QResTrace proof;
};
StrategyBundle parseStrategyBundle(std::string_view text, std::uint32_t numVars);
std::string serializeStrategyBundle(const StrategyBundle& b);

// Gate clauses with duplicate literals collapsed and the sentinel propagated.
std::vector<Clause> tseitinGates(const std::vector<Gate>& gates);
// Exactly three clauses per gate, used for positional matching: duplicates in
// TC3 collapsed, false literals dropped, true literals kept.
std::vector<Clause> positionalTseitin(const std::vector<Gate>& gates);
// Tseitin encoding of the negation of a CNF, selectors numbered from firstVar.
std::vector<Clause> negateCnf(const std::vector<Clause>& cnf, std::uint32_t firstVar);

// Public clause list the strategy resolution proof starts from:
// Herbrand: matrix; Skolem: negation of the matrix.
std::vector<Clause> strategyPublicClauses(const QbfInstance& inst, const Strategy& s);
// Public clauses followed by the positional gate clauses.
std::vector<Clause> strategyAxioms(const QbfInstance& inst, const Strategy& s);
// Variables numbered above the strategy's auxiliaries.
std::uint32_t selectorBase(const QbfInstance& inst, const Strategy& s);

}  // namespace zkq
