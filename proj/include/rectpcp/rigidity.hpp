#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rectpcp/f2_linalg.hpp"

namespace rectpcp {

inline constexpr std::size_t kRigidityExactBits = 12;
inline constexpr std::size_t kWitnessMaxRank = 20;

struct LowRankWitness {
  std::size_t distance = 0;
  BitMatrix p;  // rows x rho
  BitMatrix q;  // rho x cols
};

// Exact distance to the rank-<=rho matrices. Requires rows*rho and rho*cols
// within kRigidityExactBits; throws std::length_error otherwise.
LowRankWitness distance_to_rank(const BitMatrix& m, std::size_t rho);

// Upper bound by seeded restarts of alternating minimization plus single-bit
// flips of P. `budget` is the number of restarts.
LowRankWitness search_low_rank_witness(const BitMatrix& m, std::size_t rho, std::size_t budget,
                                       std::uint64_t seed);

bool is_rigid(const BitMatrix& m, std::size_t delta, std::size_t rho);

// m = P * Q with P = a set of independent columns of m.
LowRankWitness exact_factorization(const BitMatrix& m);

struct RigidityRow {
  std::size_t rho = 0;
  std::size_t distance = 0;
  bool exact = true;
  LowRankWitness witness;
};

struct RigidityReport {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t rank = 0;
  std::vector<RigidityRow> table;
  std::string to_json() const;
};

// Exact rows while the guard allows, heuristic ones after; distances are
// clamped to be non-increasing in rho.
RigidityReport rigidity_report(const BitMatrix& m, std::size_t max_rho, std::size_t budget, std::uint64_t seed);

}  // namespace rectpcp
