#include <gtest/gtest.h>

#include <bit>

#include "rectpcp/lowrank_count.hpp"
#include "rectpcp/rng.hpp"

namespace rectpcp {
namespace {

BitMatrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  BitMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m.set(i, j, rng.bit());
  return m;
}

std::uint64_t materialized_ones(const BitMatrix& a, const BitMatrix& b) {
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      int e = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) e ^= a.get(i, k) & b.get(k, j);
      n += e;
    }
  return n;
}

TEST(CountOnes, Trivial) {
  EXPECT_EQ(count_ones_naive(BitMatrix::identity(2), BitMatrix::identity(2)), 2u);
  EXPECT_EQ(count_ones_bucketed(BitMatrix::identity(2), BitMatrix::identity(2)), 2u);
  EXPECT_EQ(count_ones_naive(BitMatrix::ones(40, 1), BitMatrix::ones(1, 40)), 1600u);
  EXPECT_EQ(count_ones_bucketed(BitMatrix::ones(40, 1), BitMatrix::ones(1, 40)), 1600u);
}

TEST(CountOnes, SingleBucket) {
  const std::size_t n = 50;
  BitMatrix a(n, 4), b(4, n);
  for (std::size_t i = 0; i < n; ++i) {
    a.set(i, 0, true);
    a.set(i, 2, true);
    b.set(2, i, true);
  }
  EXPECT_EQ(count_ones_bucketed(a, b), n * n);
  b.set(0, 0, true);
  EXPECT_EQ(count_ones_bucketed(a, b), n * (n - 1));
}

TEST(CountOnes, NaiveMatchesMaterialized) {
  Rng rng(21);
  for (int t = 0; t < 10; ++t) {
    BitMatrix a = random_matrix(32, 4, rng);
    BitMatrix b = random_matrix(4, 32, rng);
    EXPECT_EQ(count_ones_naive(a, b), materialized_ones(a, b));
  }
}

TEST(CountOnes, BucketedMatchesNaive) {
  Rng rng(22);
  for (int t = 0; t < 200; ++t) {
    BitMatrix a = random_matrix(256, 6, rng);
    BitMatrix b = random_matrix(6, 256, rng);
    ASSERT_EQ(count_ones_bucketed(a, b), count_ones_naive(a, b));
  }
  BitMatrix a = random_matrix(5, 9, rng);
  BitMatrix b = random_matrix(9, 7, rng);
  EXPECT_EQ(count_ones_bucketed(a, b), count_ones_naive(a, b));
}

TEST(CountOnes, WideKeysUseSortedBuckets) {
  Rng rng(27);
  BitMatrix a = random_matrix(300, 23, rng);
  BitMatrix b = random_matrix(23, 200, rng);
  EXPECT_EQ(count_ones_bucketed(a, b), count_ones_naive(a, b));
}

TEST(CountOnes, Guards) {
  EXPECT_THROW(count_ones_bucketed(BitMatrix(4, 25), BitMatrix(25, 4)), std::length_error);
  EXPECT_THROW(count_ones_bucketed(BitMatrix(4, 3), BitMatrix(2, 4)), std::invalid_argument);
  EXPECT_THROW(count_ones_naive(BitMatrix(4, 3), BitMatrix(2, 4)), std::invalid_argument);
}

TEST(Fourier, Constant) {
  FourierTable f = fourier(std::vector<std::uint8_t>(8, 1));
  EXPECT_EQ(f.coeff(0), Rational(1));
  for (std::uint64_t k = 1; k < 8; ++k) EXPECT_EQ(f.coeff(k), Rational(0));
}

TEST(Fourier, FullParity) {
  std::vector<std::uint8_t> tt(16);
  for (std::size_t y = 0; y < 16; ++y) tt[y] = std::popcount(y) & 1;
  FourierTable f = fourier(tt);
  EXPECT_EQ(f.coeff(0), Rational(1, 2));
  EXPECT_EQ(f.coeff(15), Rational(-1, 2));
  for (std::uint64_t k = 1; k < 15; ++k) EXPECT_EQ(f.coeff(k), Rational(0));
}

TEST(Fourier, ReconstructsRandom) {
  Rng rng(23);
  for (int t = 0; t < 20; ++t) {
    std::vector<std::uint8_t> tt(64);
    for (auto& x : tt) x = rng.bit();
    FourierTable f = fourier(tt);
    for (std::uint64_t y = 0; y < 64; ++y) {
      // Direct sum over subsets, independent of FourierTable::evaluate.
      Rational s = 0;
      for (std::uint64_t k = 0; k < 64; ++k) s += (std::popcount(k & y) & 1) ? Rational(-f.coeff(k)) : f.coeff(k);
      ASSERT_EQ(s, Rational(tt[y]));
      ASSERT_EQ(f.evaluate(y), Rational(tt[y]));
    }
  }
}

TEST(Fourier, RejectsBadLength) {
  EXPECT_THROW(fourier(std::vector<std::uint8_t>(6)), std::invalid_argument);
  EXPECT_THROW(fourier({}), std::invalid_argument);
}

Rational enumerate_probability(const std::vector<std::uint8_t>& tt, const std::vector<BitMatrix>& left,
                               const std::vector<BitMatrix>& right) {
  std::vector<BitMatrix> prods;
  for (std::size_t k = 0; k < left.size(); ++k) prods.push_back(matmul(left[k], right[k]));
  const std::size_t n1 = left[0].rows(), n2 = right[0].cols();
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < n1; ++i)
    for (std::size_t j = 0; j < n2; ++j) {
      std::uint64_t y = 0;
      for (std::size_t k = 0; k < prods.size(); ++k) y |= std::uint64_t{prods[k].get(i, j)} << k;
      acc += tt[y];
    }
  return Rational(acc, n1 * n2);
}

TEST(AcceptanceProbability, Trivial) {
  FourierTable one = fourier(std::vector<std::uint8_t>(2, 1));
  std::vector<BitMatrix> l{BitMatrix::ones(8, 1)}, r{BitMatrix(1, 8)};
  EXPECT_EQ(acceptance_probability(one, l, r), Rational(1));
  FourierTable id = fourier({0, 1});
  r[0] = BitMatrix::ones(1, 8);
  EXPECT_EQ(acceptance_probability(id, l, r), Rational(1));
}

TEST(AcceptanceProbability, MatchesEnumeration) {
  Rng rng(24);
  for (int t = 0; t < 30; ++t) {
    const std::size_t arity = 1 + t % 8;
    const std::size_t rh = 2 + t % 7;
    std::vector<std::uint8_t> tt(std::size_t{1} << arity);
    for (auto& x : tt) x = rng.bit();
    std::vector<BitMatrix> l, r;
    for (std::size_t k = 0; k < arity; ++k) {
      const std::size_t rho = 1 + rng.below(3);
      l.push_back(random_matrix(std::size_t{1} << rh, rho, rng));
      r.push_back(random_matrix(rho, std::size_t{1} << rh, rng));
    }
    ASSERT_EQ(acceptance_probability(fourier(tt), l, r), enumerate_probability(tt, l, r));
  }
}

TEST(AcceptanceProbability, FrozenRank2Instance) {
  Rng rng(25);
  std::vector<std::uint8_t> tt(16);
  for (auto& x : tt) x = rng.bit();
  std::vector<BitMatrix> l, r;
  for (int k = 0; k < 4; ++k) {
    l.push_back(random_matrix(32, 2, rng));
    r.push_back(random_matrix(2, 32, rng));
  }
  const Rational expect = enumerate_probability(tt, l, r);
  EXPECT_EQ(acceptance_probability(fourier(tt), l, r), expect);
  EXPECT_EQ(to_string(expect), "19/32");  // frozen from the enumeration oracle
}

TEST(AcceptanceProbability, WideRankFallsBackToProducts) {
  Rng rng(26);
  std::vector<std::uint8_t> tt(8);
  for (auto& x : tt) x = rng.bit();
  std::vector<BitMatrix> l, r;
  for (int k = 0; k < 3; ++k) {
    l.push_back(random_matrix(16, 30, rng));
    r.push_back(random_matrix(30, 8, rng));
  }
  EXPECT_EQ(acceptance_probability(fourier(tt), l, r), enumerate_probability(tt, l, r));
}

TEST(AcceptanceProbability, MidWidthConcatenation) {
  Rng rng(28);
  std::vector<std::uint8_t> tt(8);
  for (auto& x : tt) x = rng.bit();
  std::vector<BitMatrix> l, r;
  for (int k = 0; k < 3; ++k) {
    l.push_back(random_matrix(64, 11, rng));
    r.push_back(random_matrix(11, 32, rng));
  }
  EXPECT_EQ(acceptance_probability(fourier(tt), l, r), enumerate_probability(tt, l, r));
}

TEST(AcceptanceProbability, ShapeMismatch) {
  FourierTable f = fourier({0, 1, 1, 0});
  std::vector<BitMatrix> l{BitMatrix(4, 1), BitMatrix(8, 1)}, r{BitMatrix(1, 4), BitMatrix(1, 4)};
  EXPECT_THROW(acceptance_probability(f, l, r), std::invalid_argument);
}

TEST(Benchmark, JsonShape) {
  CountBenchmark b = benchmark_counting(128, 4, 1, 1);
  const std::string j = b.to_json();
  EXPECT_NE(j.find("\"n\":128"), std::string::npos);
  EXPECT_NE(j.find("\"rho\":4"), std::string::npos);
  EXPECT_NE(j.find("naive_ns"), std::string::npos);
  EXPECT_NE(j.find("bucketed_ns"), std::string::npos);
}

}  // namespace
}  // namespace rectpcp
