#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rectpcp/f2_linalg.hpp"
#include "rectpcp/rational.hpp"

namespace rectpcp {

inline constexpr std::size_t kBucketMaxRank = 24;
inline constexpr std::size_t kFourierMaxArity = 20;

// Coefficients of D(y) = sum_K coeff(K) * (-1)^{xor_{i in K} y_i}, with the
// subset K encoded as a bitmask. Every coefficient is numerator(K) / 2^arity.
class FourierTable {
 public:
  FourierTable() = default;
  FourierTable(std::size_t arity, std::vector<std::int64_t> numerators);

  std::size_t arity() const { return arity_; }
  Rational coeff(std::uint64_t subset) const { return dyadic(num_[subset], static_cast<unsigned>(arity_)); }
  std::int64_t numerator(std::uint64_t subset) const { return num_[subset]; }
  const std::vector<std::int64_t>& numerators() const { return num_; }

  // Evaluates the expansion at y (bit i of y is input i).
  Rational evaluate(std::uint64_t y) const;

 private:
  std::size_t arity_ = 0;
  std::vector<std::int64_t> num_;
};

FourierTable fourier(const std::vector<std::uint8_t>& truth_table);

std::uint64_t count_ones_naive(const BitMatrix& a, const BitMatrix& b);
std::uint64_t count_ones_bucketed(const BitMatrix& a, const BitMatrix& b);

// Pr over uniform (row, col) that D(y) = 1 where y_k = (left_k * right_k)[row][col].
Rational acceptance_probability(const FourierTable& f, const std::vector<BitMatrix>& left,
                                const std::vector<BitMatrix>& right);

struct CountBenchmark {
  std::size_t n = 0;
  std::size_t rho = 0;
  std::uint64_t naive_ns = 0;
  std::uint64_t bucketed_ns = 0;
  std::uint64_t ones = 0;
  std::string to_json() const;
};

// Times both backends on one seeded random instance; takes the best of `reps` runs.
CountBenchmark benchmark_counting(std::size_t n, std::size_t rho, std::uint64_t seed, int reps = 3);

}  // namespace rectpcp
