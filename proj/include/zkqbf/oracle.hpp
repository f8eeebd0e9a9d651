#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "zkqbf/certs.hpp"
#include "zkqbf/qbf.hpp"

namespace zkq {

inline constexpr std::uint32_t kEvalVarCap = 24;

// Truth value by quantifier expansion; throws std::invalid_argument above kEvalVarCap variables.
bool evalQbf(const QbfInstance& inst);
// Truth value of a quantifier-free CNF under an assignment (index = variable).
bool evalCnf(const std::vector<Clause>& cnf, const std::vector<bool>& assignment);

struct PlainResult {
  bool valid = false;
  std::string reason;
  explicit operator bool() const { return valid; }
};

// Cleartext re-execution with the same rules as the zero-knowledge checkers.
PlainResult plainCheck(const QbfInstance& inst, const QResTrace& trace);
PlainResult plainCheck(const QbfInstance& inst, const CubeTrace& trace);
PlainResult plainCheck(const QbfInstance& inst, const StrategyBundle& bundle);
// Well-formedness conditions only; the reason names the violated condition.
PlainResult plainWellFormed(const QbfInstance& inst, const Strategy& s);
// Gate evaluation order for a well-formed strategy (outputs in order of definition).
std::optional<std::vector<std::uint32_t>> evaluationOrder(const Strategy& s);

inline constexpr std::uint32_t kSearchVarCap = 8;
inline constexpr std::size_t kSearchClauseCap = 12;

// Breadth-first saturation; nullopt when saturated without the empty clause (cube).
std::optional<QResTrace> searchTinyRefutation(const QbfInstance& inst);
std::optional<CubeTrace> searchTinyCubeProof(const QbfInstance& inst);

// Winning strategy of the player who wins (Herbrand if false, Skolem if true) with a
// refutation of the composed propositional formula.
StrategyBundle synthesizeStrategy(const QbfInstance& inst);
// Tree-like resolution refutation of an unsatisfiable CNF; clause i of cnf has id i + 1.
std::optional<QResTrace> refuteCnf(const std::vector<Clause>& cnf);

struct RandomShape {
  std::uint32_t maxVars = 8;
  std::uint32_t maxBlocks = 3;
  std::size_t maxClauses = 12;
  std::size_t maxClauseLen = 3;
};
QbfInstance randomQbf(std::mt19937_64& rng, const RandomShape& shape = {});

}  // namespace zkq
