#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rectpcp {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

inline std::size_t words_for(std::size_t bits) { return (bits + kWordBits - 1) / kWordBits; }

class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t length);
  static BitVector from_string(const std::string& s);
  static BitVector from_uint(std::uint64_t value, std::size_t length);

  std::size_t size() const { return length_; }
  bool get(std::size_t i) const { return (words_[i / kWordBits] >> (i % kWordBits)) & 1U; }
  void set(std::size_t i, bool v);
  void flip(std::size_t i) { words_[i / kWordBits] ^= Word{1} << (i % kWordBits); }

  std::size_t weight() const;
  // Low 64 bits as an integer, bit i at position i.
  std::uint64_t to_uint() const;
  std::string to_string() const;

  const std::vector<Word>& words() const { return words_; }
  std::vector<Word>& words() { return words_; }

  BitVector& operator^=(const BitVector& o);
  bool operator==(const BitVector& o) const = default;
  auto operator<=>(const BitVector& o) const = default;

 private:
  std::size_t length_ = 0;
  std::vector<Word> words_;
};

bool dot(const BitVector& a, const BitVector& b);

class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols);
  static BitMatrix identity(std::size_t n);
  static BitMatrix ones(std::size_t rows, std::size_t cols);
  static BitMatrix from_rows(const std::vector<std::string>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t words_per_row() const { return wpr_; }

  bool get(std::size_t r, std::size_t c) const {
    return (data_[r * wpr_ + c / kWordBits] >> (c % kWordBits)) & 1U;
  }
  void set(std::size_t r, std::size_t c, bool v);
  void flip(std::size_t r, std::size_t c) { data_[r * wpr_ + c / kWordBits] ^= Word{1} << (c % kWordBits); }

  const Word* row_ptr(std::size_t r) const { return data_.data() + r * wpr_; }
  Word* row_ptr(std::size_t r) { return data_.data() + r * wpr_; }
  BitVector row(std::size_t r) const;
  BitVector col(std::size_t c) const;
  void set_row(std::size_t r, const BitVector& v);

  std::size_t weight() const;
  BitMatrix transpose() const;

  const std::vector<Word>& data() const { return data_; }

  bool operator==(const BitMatrix& o) const = default;
  auto operator<=>(const BitMatrix& o) const = default;
  BitMatrix& operator^=(const BitMatrix& o);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t wpr_ = 0;
  std::vector<Word> data_;
};

BitMatrix operator^(BitMatrix a, const BitMatrix& b);

BitMatrix matmul(const BitMatrix& a, const BitMatrix& b);
BitVector vecmul(const BitVector& x, const BitMatrix& a);
std::size_t rank(const BitMatrix& a);
std::size_t hamming_distance(const BitMatrix& a, const BitMatrix& b);
double relative_hamming_distance(const BitMatrix& a, const BitMatrix& b);

// Horizontal [a | b] and vertical [a ; b] concatenation.
BitMatrix hconcat(const BitMatrix& a, const BitMatrix& b);
BitMatrix vconcat(const BitMatrix& a, const BitMatrix& b);

struct Rank3Factors {
  BitMatrix a;  // 2^m x 3
  BitMatrix b;  // 3 x 2^m
};

inline constexpr std::size_t kAffineMaxM = 24;

// A*B has entry <x,u> + <y,v> + b at (x,y); x,y enumerated in binary order
// with coordinate i stored at bit i of the index.
Rank3Factors affine_to_rank3(std::size_t m, const BitVector& u, const BitVector& v, bool b);

class LinearCode {
 public:
  // Verifies full row rank and computes the minimum distance exhaustively (r <= 20).
  explicit LinearCode(BitMatrix generator);
  static LinearCode random_systematic(std::size_t r, std::size_t n, std::uint64_t seed,
                                      std::size_t min_distance = 1);

  std::size_t msg_len() const { return gen_.rows(); }
  std::size_t block_len() const { return gen_.cols(); }
  const BitMatrix& generator() const { return gen_; }
  bool systematic() const { return systematic_; }
  std::size_t min_distance() const { return min_distance_; }

  BitVector encode(const BitVector& msg) const;
  std::optional<BitVector> decode(const BitVector& word) const;
  bool is_codeword(const BitVector& word) const { return decode(word).has_value(); }

 private:
  BitMatrix gen_;
  bool systematic_ = false;
  std::size_t min_distance_ = 0;
  // Columns forming an invertible r x r minor, and the inverse of that minor.
  std::vector<std::size_t> pivots_;
  BitMatrix pivot_inverse_;
};

inline constexpr std::size_t kCodeExhaustiveMax = 20;

void write_text(std::ostream& os, const BitMatrix& m);
BitMatrix read_text(std::istream& is);
void write_binary(std::ostream& os, const BitMatrix& m);
BitMatrix read_binary(std::istream& is);

}  // namespace rectpcp
