#pragma once

#include <cstdint>

#include "zkqbf/certs.hpp"
#include "zkqbf/qres.hpp"

namespace zkq {

struct CubePublic {
  std::uint32_t cubes = 0, steps = 0, width = 0, degree = 0;
};
CubePublic cubePublic(const CubeTrace& t);

// Initial cubes: non-contradictory, and each matrix clause shares its witness literal with the cube.
void checkInitialCube(Session& s, const QbfInstance& inst, const CPoly& cube, const InitialCube* prover);
// Derives the empty cube by universal-pivot resolution and existential reduction.
void runCubeProof(Session& s, const QbfInstance& inst, const CubePublic& pub, const CubeTrace* trace);
CheckResult checkCubeProof(const QbfInstance& inst, const CubeTrace& trace, Backend backend,
                           unsigned fieldBits = 64, std::uint64_t seed = 1);

}  // namespace zkq
