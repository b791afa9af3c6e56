#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "rectpcp/rigidity.hpp"
#include "rectpcp/rng.hpp"

namespace rectpcp {
namespace {

BitMatrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  BitMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m.set(i, j, rng.bit());
  return m;
}

// Minimum distance over every matrix of the same shape with rank <= rho.
std::size_t brute_distance(const BitMatrix& m, std::size_t rho) {
  const std::size_t cells = m.rows() * m.cols();
  std::size_t best = cells;
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << cells); ++x) {
    BitMatrix c(m.rows(), m.cols());
    for (std::size_t k = 0; k < cells; ++k)
      if ((x >> k) & 1) c.set(k / m.cols(), k % m.cols(), true);
    const std::size_t d = hamming_distance(m, c);
    if (d < best && rank(c) <= rho) best = d;
  }
  return best;
}

TEST(DistanceToRank, Trivial) {
  Rng rng(31);
  BitMatrix m = random_matrix(3, 3, rng);
  EXPECT_EQ(distance_to_rank(m, rank(m)).distance, 0u);
  EXPECT_EQ(distance_to_rank(BitMatrix(4, 4), 1).distance, 0u);
  EXPECT_EQ(distance_to_rank(BitMatrix(4, 4), 0).distance, 0u);
}

TEST(DistanceToRank, IdentityRankOne) {
  const LowRankWitness w = distance_to_rank(BitMatrix::identity(4), 1);
  EXPECT_EQ(w.distance, brute_distance(BitMatrix::identity(4), 1));
  EXPECT_EQ(w.distance, 3u);  // frozen from brute force
  EXPECT_EQ(hamming_distance(BitMatrix::identity(4), matmul(w.p, w.q)), w.distance);
  EXPECT_TRUE(is_rigid(BitMatrix::identity(4), 2, 1));
  EXPECT_FALSE(is_rigid(BitMatrix::identity(4), 3, 1));
}

TEST(DistanceToRank, MatchesBruteForce) {
  Rng rng(32);
  for (int t = 0; t < 12; ++t) {
    BitMatrix m = random_matrix(4, 4, rng);
    for (std::size_t rho = 0; rho <= 3; ++rho) {
      const LowRankWitness w = distance_to_rank(m, rho);
      ASSERT_EQ(w.distance, brute_distance(m, rho)) << "rho=" << rho;
      ASSERT_EQ(hamming_distance(m, matmul(w.p, w.q)), w.distance);
    }
  }
  for (int t = 0; t < 8; ++t) {
    BitMatrix m = random_matrix(3, 4, rng);
    for (std::size_t rho = 0; rho <= 3; ++rho) ASSERT_EQ(distance_to_rank(m, rho).distance, brute_distance(m, rho));
  }
}

TEST(DistanceToRank, PermutationInvariant) {
  Rng rng(33);
  for (int t = 0; t < 10; ++t) {
    BitMatrix m = random_matrix(4, 3, rng);
    std::vector<std::size_t> pr(4), pc(3);
    std::iota(pr.begin(), pr.end(), 0);
    std::iota(pc.begin(), pc.end(), 0);
    rng.shuffle(pr.begin(), pr.end());
    rng.shuffle(pc.begin(), pc.end());
    BitMatrix perm(4, 3);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 3; ++j) perm.set(i, j, m.get(pr[i], pc[j]));
    for (std::size_t rho = 0; rho <= 3; ++rho) EXPECT_EQ(distance_to_rank(m, rho).distance, distance_to_rank(perm, rho).distance);
  }
}

TEST(DistanceToRank, DeterministicWitness) {
  BitMatrix m = BitMatrix::identity(3);
  const LowRankWitness a = distance_to_rank(m, 1);
  const LowRankWitness b = distance_to_rank(m, 1);
  EXPECT_EQ(a.p, b.p);
  EXPECT_EQ(a.q, b.q);
  // Lexicographically first optimal P places its single 1 in the last row.
  EXPECT_EQ(a.p, BitMatrix::from_rows({"0", "0", "1"}));
}

TEST(DistanceToRank, Guard) {
  EXPECT_THROW(distance_to_rank(BitMatrix(5, 5), 3), std::length_error);
  EXPECT_THROW(is_rigid(BitMatrix(7, 7), 0, 2), std::length_error);
}

TEST(IsRigid, Trivial) {
  EXPECT_TRUE(is_rigid(BitMatrix::identity(2), 0, 0));
  EXPECT_FALSE(is_rigid(BitMatrix(3, 3), 0, 0));
}

TEST(ExactFactorization, Reconstructs) {
  Rng rng(34);
  for (int t = 0; t < 20; ++t) {
    BitMatrix a = random_matrix(20, 1 + t % 5, rng);
    BitMatrix m = matmul(a, random_matrix(a.cols(), 17, rng));
    LowRankWitness f = exact_factorization(m);
    EXPECT_EQ(f.p.cols(), rank(m));
    EXPECT_EQ(matmul(f.p, f.q), m);
  }
}

TEST(SearchWitness, ZeroBudgetIsWeight) {
  Rng rng(35);
  BitMatrix m = random_matrix(6, 6, rng);
  EXPECT_EQ(search_low_rank_witness(m, 2, 0, 1).distance, m.weight());
}

TEST(SearchWitness, FindsPlantedLowRank) {
  Rng rng(36);
  BitMatrix m = matmul(random_matrix(32, 3, rng), random_matrix(3, 32, rng));
  LowRankWitness w = search_low_rank_witness(m, 3, 5, 7);
  EXPECT_EQ(w.distance, 0u);
  EXPECT_EQ(matmul(w.p, w.q), m);
}

TEST(SearchWitness, UpperBoundsExact) {
  Rng rng(37);
  for (int t = 0; t < 15; ++t) {
    BitMatrix m = random_matrix(4, 4, rng);
    for (std::size_t rho = 1; rho <= 2; ++rho) {
      LowRankWitness h = search_low_rank_witness(m, rho, 4, t);
      EXPECT_GE(h.distance, distance_to_rank(m, rho).distance);
      EXPECT_EQ(hamming_distance(m, matmul(h.p, h.q)), h.distance);
    }
  }
}

TEST(RigidityReport, NonIncreasingAndZeroAtRank) {
  Rng rng(38);
  BitMatrix m = random_matrix(4, 4, rng);
  RigidityReport rep = rigidity_report(m, 4, 8, 3);
  ASSERT_EQ(rep.table.size(), 5u);
  for (std::size_t i = 1; i < rep.table.size(); ++i) EXPECT_LE(rep.table[i].distance, rep.table[i - 1].distance);
  EXPECT_EQ(rep.table[rep.rank].distance, 0u);
  EXPECT_TRUE(rep.table[3].exact);
  EXPECT_FALSE(rep.table[4].exact);
  EXPECT_NE(rep.to_json().find("\"table\""), std::string::npos);
}

}  // namespace
}  // namespace rectpcp
