#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "rectpcp/pcp_core.hpp"

namespace rectpcp {

inline constexpr std::size_t kFieldMaxOrder = 256;
inline constexpr std::uint64_t kBiasMaxCharacters = 1000000;

// GF(p^k) with elements 0..order-1; element digits in base p are polynomial
// coefficients modulo a primitive polynomial.
class FiniteField {
 public:
  explicit FiniteField(unsigned order);
  // Shared instance per order.
  static std::shared_ptr<const FiniteField> get(unsigned order);

  unsigned order() const { return order_; }
  unsigned characteristic() const { return p_; }
  unsigned degree() const { return k_; }
  // Coefficients of the modulus, lowest first (empty for prime fields).
  const std::vector<unsigned>& modulus() const { return modulus_; }
  bool power_of_two() const { return p_ == 2; }
  // Coin bits per element: ceil(log2 order).
  unsigned coin_bits() const { return bits_; }

  unsigned add(unsigned a, unsigned b) const { return add_[a * order_ + b]; }
  unsigned sub(unsigned a, unsigned b) const { return add_[a * order_ + neg_[b]]; }
  unsigned neg(unsigned a) const { return neg_[a]; }
  unsigned mul(unsigned a, unsigned b) const { return mul_[a * order_ + b]; }
  unsigned inv(unsigned a) const;
  unsigned div(unsigned a, unsigned b) const { return mul(a, inv(b)); }
  // Absolute trace into the prime field, as an integer in [0, p).
  unsigned trace(unsigned a) const { return trace_[a]; }

 private:
  unsigned order_, p_, k_, bits_;
  std::vector<unsigned> modulus_;
  std::vector<std::uint8_t> add_, mul_;
  std::vector<unsigned> neg_, inv_, trace_;
};

using FieldPtr = std::shared_ptr<const FiniteField>;

struct CharacterBias {
  // |E_y chi_a(y)|^2, exact when the characteristic is 2 or 3.
  Rational squared = 0;
  double value = 0;
  bool exact = true;
  std::vector<unsigned> witness;  // maximizing character a
};

// Maximum bias of `elements` over characters chi_a(y) = omega^Tr(<a,y>) with
// (a_2, ..., a_m) != 0. Characters living on the first coordinate alone are
// excluded: they have modulus 1 on any set with constant first coordinate.
CharacterBias max_bias(const FiniteField& f, std::size_t m, const std::vector<std::vector<unsigned>>& elements);

struct BiasedSet {
  FieldPtr field;
  std::size_t m = 0;
  Rational lambda;
  std::vector<std::vector<unsigned>> elements;
  CharacterBias bias;

  // Validates y_1 != 0 and computes the bias; throws if it exceeds lambda.
  static BiasedSet from_elements(FieldPtr field, std::size_t m, std::vector<std::vector<unsigned>> elements,
                                 const Rational& lambda);
};

// Seeded greedy set with first coordinate 1 and exact bias at most lambda.
BiasedSet build_biased_set(FieldPtr field, std::size_t m, const Rational& lambda, std::uint64_t seed,
                           std::size_t max_size = 4096);

// Linearity test on f: F2^m -> F2 read as a 2^{m/2} x 2^{m/2} matrix.
// Point z has row index z & (2^{m/2}-1) and column index z >> m/2.
// Coins: x1 | y1 (row) then x2 | y2 (col), no shared part.
class BlrVerifier : public Verifier {
 public:
  explicit BlrVerifier(std::size_t m);
  using Verifier::queries;
  void queries(std::uint64_t coins, std::uint64_t* out) const override;
  std::shared_ptr<const Predicate> predicate(std::uint64_t) const override { return pred_; }

  std::size_t dim() const { return m_; }
  std::uint64_t location(std::uint64_t z) const;
  // Truth table of z -> <a, z> in proof order.
  Proof linear_proof(std::uint64_t a) const;
  // Relative distance of a proof to the nearest linear function.
  Rational distance_to_linear(const Proof& proof) const;

 private:
  std::size_t m_, half_;
  std::shared_ptr<const Predicate> pred_;
};

std::shared_ptr<BlrVerifier> blr_verifier(std::size_t m);

// Query pattern of the line-based verifier over F^m (m odd, m >= 7).
// Coordinate i of the intercept (2 <= i <= m) uses coin_bits() coins; the
// direction index R_y uses ceil(log2 |S|) coins, low half in shared.row and
// high half in shared.col. Query k = (2*b1 + b2) * |F| + t.
class LineQueryPattern : public Verifier {
 public:
  struct QueryIndex {
    unsigned b1 = 0, b2 = 0, t = 0;
  };
  struct Coins {
    std::vector<unsigned> x;  // x[0] = 0, x[i-1] = coordinate i
    std::uint64_t ry = 0;
  };

  LineQueryPattern(BiasedSet directions, std::shared_ptr<const Predicate> predicate = nullptr, std::size_t sigma = 1);

  using Verifier::queries;
  void queries(std::uint64_t coins, std::uint64_t* out) const override;
  std::shared_ptr<const Predicate> predicate(std::uint64_t) const override { return pred_; }
  bool coin_valid(std::uint64_t coins) const override;
  bool full_coin_space() const override { return full_; }

  const FiniteField& field() const { return *set_.field; }
  const BiasedSet& directions() const { return set_; }
  std::size_t dim() const { return dim_; }
  std::size_t y_bits() const { return y_bits_; }
  std::size_t y_low_bits() const { return y_bits_ / 2; }

  QueryIndex split_k(std::size_t k) const;
  std::size_t make_k(QueryIndex qi) const;
  std::vector<unsigned> direction(unsigned b2, std::uint64_t ry) const;
  Coins decode(std::uint64_t coins) const;
  std::uint64_t encode(const Coins& c) const;
  std::uint64_t location_of(const std::vector<unsigned>& z) const;
  std::vector<unsigned> point_of(std::uint64_t location) const;
  // Cyclic shift by j steps to the left.
  static std::vector<unsigned> shift(const std::vector<unsigned>& v, int j);
  // The queried point shift_{b1}(x + t*y).
  std::vector<unsigned> point(const Coins& c, QueryIndex qi) const;

  // Coin segment and bit offset of coordinate i (2 <= i <= m).
  enum class Segment { kRow, kCol, kSharedRow, kSharedCol };
  struct Slot {
    Segment segment;
    std::size_t offset;
  };
  Slot slot(std::size_t i) const;

 private:
  BiasedSet set_;
  std::size_t dim_, half_;
  std::size_t bits_, y_bits_;
  bool full_;
  std::shared_ptr<const Predicate> pred_;
};

std::shared_ptr<LineQueryPattern> line_query_pattern(BiasedSet directions, std::shared_ptr<const Predicate> predicate = nullptr);

// Neighbor-listing agents of the line pattern. Each agent only reads the
// intercept coordinates visible from its own coins and the shared coins.
AgentsPtr line_rnl_agents(std::shared_ptr<const LineQueryPattern> pattern);

// Toy with planted RNL over a 2^{a_row} x 2^{a_col} proof. Coins u (row),
// v (col) and s (shared); query k reads (u ^ c_k(s), v ^ d_k(s)) with seeded
// shifts c_k, d_k. Every configuration has exactly 2^{r_shared} * q neighbors.
struct ShiftOptions {
  std::size_t a_row = 1, a_col = 1;
  std::size_t r_shared_row = 0, r_shared_col = 0;
  std::size_t q = 2;
  std::shared_ptr<const Predicate> predicate;  // default: constant true
  std::uint64_t seed = 1;
  Rational soundness = 1;
  Rational robustness = 0;
};

class ShiftVerifier : public Verifier {
 public:
  explicit ShiftVerifier(ShiftOptions opts);
  using Verifier::queries;
  void queries(std::uint64_t coins, std::uint64_t* out) const override;
  std::shared_ptr<const Predicate> predicate(std::uint64_t) const override { return pred_; }

  const ShiftOptions& options() const { return opts_; }
  std::uint64_t row_shift(std::size_t k, std::uint64_t shared) const { return row_shift_[shared * opts_.q + k]; }
  std::uint64_t col_shift(std::size_t k, std::uint64_t shared) const { return col_shift_[shared * opts_.q + k]; }

 private:
  ShiftOptions opts_;
  std::shared_ptr<const Predicate> pred_;
  std::vector<std::uint64_t> row_shift_, col_shift_;
};

std::shared_ptr<ShiftVerifier> shift_verifier(ShiftOptions opts);
AgentsPtr shift_rnl_agents(std::shared_ptr<const ShiftVerifier> v);

}  // namespace rectpcp
