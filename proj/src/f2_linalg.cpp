#include "rectpcp/f2_linalg.hpp"

#include <algorithm>
#include <bit>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "rectpcp/rng.hpp"

namespace rectpcp {

namespace {

Word tail_mask(std::size_t bits) {
  const std::size_t r = bits % kWordBits;
  return r == 0 ? ~Word{0} : (Word{1} << r) - 1;
}

}  // namespace

BitVector::BitVector(std::size_t length) : length_(length), words_(words_for(length), 0) {}

BitVector BitVector::from_string(const std::string& s) {
  BitVector v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '0' && s[i] != '1') throw std::invalid_argument("bit string must contain only 0/1");
    v.set(i, s[i] == '1');
  }
  return v;
}

BitVector BitVector::from_uint(std::uint64_t value, std::size_t length) {
  BitVector v(length);
  for (std::size_t i = 0; i < length && i < 64; ++i) v.set(i, (value >> i) & 1U);
  return v;
}

void BitVector::set(std::size_t i, bool v) {
  const Word m = Word{1} << (i % kWordBits);
  if (v) {
    words_[i / kWordBits] |= m;
  } else {
    words_[i / kWordBits] &= ~m;
  }
}

std::size_t BitVector::weight() const {
  std::size_t w = 0;
  for (Word x : words_) w += std::popcount(x);
  return w;
}

std::uint64_t BitVector::to_uint() const { return words_.empty() ? 0 : words_[0]; }

std::string BitVector::to_string() const {
  std::string s(length_, '0');
  for (std::size_t i = 0; i < length_; ++i) s[i] = get(i) ? '1' : '0';
  return s;
}

BitVector& BitVector::operator^=(const BitVector& o) {
  if (o.length_ != length_) throw std::invalid_argument("BitVector length mismatch");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= o.words_[i];
  return *this;
}

bool dot(const BitVector& a, const BitVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  Word acc = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) acc ^= a.words()[i] & b.words()[i];
  return std::popcount(acc) & 1;
}

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), wpr_(words_for(cols)), data_(rows * words_for(cols), 0) {}

BitMatrix BitMatrix::identity(std::size_t n) {
  BitMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
  return m;
}

BitMatrix BitMatrix::ones(std::size_t rows, std::size_t cols) {
  BitMatrix m(rows, cols);
  if (cols == 0) return m;
  const Word tm = tail_mask(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    Word* p = m.row_ptr(r);
    for (std::size_t w = 0; w < m.wpr_; ++w) p[w] = ~Word{0};
    p[m.wpr_ - 1] = tm;
  }
  return m;
}

BitMatrix BitMatrix::from_rows(const std::vector<std::string>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows[0].size();
  BitMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw std::invalid_argument("ragged rows");
    for (std::size_t c = 0; c < cols; ++c) {
      const char ch = rows[r][c];
      if (ch != '0' && ch != '1') throw std::invalid_argument("matrix rows must contain only 0/1");
      m.set(r, c, ch == '1');
    }
  }
  return m;
}

void BitMatrix::set(std::size_t r, std::size_t c, bool v) {
  Word& w = data_[r * wpr_ + c / kWordBits];
  const Word m = Word{1} << (c % kWordBits);
  w = v ? (w | m) : (w & ~m);
}

BitVector BitMatrix::row(std::size_t r) const {
  BitVector v(cols_);
  std::copy(row_ptr(r), row_ptr(r) + wpr_, v.words().begin());
  return v;
}

BitVector BitMatrix::col(std::size_t c) const {
  BitVector v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v.set(r, get(r, c));
  return v;
}

void BitMatrix::set_row(std::size_t r, const BitVector& v) {
  if (v.size() != cols_) throw std::invalid_argument("set_row: length mismatch");
  std::copy(v.words().begin(), v.words().end(), row_ptr(r));
}

std::size_t BitMatrix::weight() const {
  std::size_t w = 0;
  for (Word x : data_) w += std::popcount(x);
  return w;
}

BitMatrix BitMatrix::transpose() const {
  BitMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    const Word* p = row_ptr(r);
    for (std::size_t w = 0; w < wpr_; ++w) {
      Word x = p[w];
      while (x) {
        const std::size_t c = w * kWordBits + std::countr_zero(x);
        t.set(c, r, true);
        x &= x - 1;
      }
    }
  }
  return t;
}

BitMatrix& BitMatrix::operator^=(const BitMatrix& o) {
  if (o.rows_ != rows_ || o.cols_ != cols_) throw std::invalid_argument("BitMatrix shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] ^= o.data_[i];
  return *this;
}

BitMatrix operator^(BitMatrix a, const BitMatrix& b) {
  a ^= b;
  return a;
}

BitMatrix matmul(const BitMatrix& a, const BitMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: dimension mismatch");
  BitMatrix out(a.rows(), b.cols());
  const std::size_t wb = b.words_per_row();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Word* dst = out.row_ptr(i);
    const Word* ar = a.row_ptr(i);
    for (std::size_t w = 0; w < a.words_per_row(); ++w) {
      Word x = ar[w];
      while (x) {
        const std::size_t k = w * kWordBits + std::countr_zero(x);
        const Word* src = b.row_ptr(k);
        for (std::size_t j = 0; j < wb; ++j) dst[j] ^= src[j];
        x &= x - 1;
      }
    }
  }
  return out;
}

BitVector vecmul(const BitVector& x, const BitMatrix& a) {
  if (x.size() != a.rows()) throw std::invalid_argument("vecmul: dimension mismatch");
  BitVector out(a.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    if (!x.get(k)) continue;
    const Word* src = a.row_ptr(k);
    for (std::size_t j = 0; j < a.words_per_row(); ++j) out.words()[j] ^= src[j];
  }
  return out;
}

std::size_t rank(const BitMatrix& in) {
  BitMatrix m = in;
  std::size_t r = 0;
  const std::size_t wpr = m.words_per_row();
  for (std::size_t c = 0; c < m.cols() && r < m.rows(); ++c) {
    const std::size_t w = c / kWordBits;
    const Word bit = Word{1} << (c % kWordBits);
    std::size_t piv = r;
    while (piv < m.rows() && !(m.row_ptr(piv)[w] & bit)) ++piv;
    if (piv == m.rows()) continue;
    if (piv != r) std::swap_ranges(m.row_ptr(piv), m.row_ptr(piv) + wpr, m.row_ptr(r));
    const Word* pr = m.row_ptr(r);
    for (std::size_t i = r + 1; i < m.rows(); ++i) {
      Word* ri = m.row_ptr(i);
      if (ri[w] & bit) {
        for (std::size_t j = w; j < wpr; ++j) ri[j] ^= pr[j];
      }
    }
    ++r;
  }
  return r;
}

std::size_t hamming_distance(const BitMatrix& a, const BitMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("hamming_distance: shape mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) d += std::popcount(a.data()[i] ^ b.data()[i]);
  return d;
}

double relative_hamming_distance(const BitMatrix& a, const BitMatrix& b) {
  const std::size_t d = hamming_distance(a, b);
  const std::size_t total = a.rows() * a.cols();
  return total == 0 ? 0.0 : static_cast<double>(d) / static_cast<double>(total);
}

BitMatrix hconcat(const BitMatrix& a, const BitMatrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("hconcat: row mismatch");
  BitMatrix out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    std::copy(a.row_ptr(r), a.row_ptr(r) + a.words_per_row(), out.row_ptr(r));
    for (std::size_t c = 0; c < b.cols(); ++c) {
      if (b.get(r, c)) out.set(r, a.cols() + c, true);
    }
  }
  return out;
}

BitMatrix vconcat(const BitMatrix& a, const BitMatrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("vconcat: column mismatch");
  BitMatrix out(a.rows() + b.rows(), a.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) std::copy(a.row_ptr(r), a.row_ptr(r) + a.words_per_row(), out.row_ptr(r));
  for (std::size_t r = 0; r < b.rows(); ++r) {
    std::copy(b.row_ptr(r), b.row_ptr(r) + b.words_per_row(), out.row_ptr(a.rows() + r));
  }
  return out;
}

Rank3Factors affine_to_rank3(std::size_t m, const BitVector& u, const BitVector& v, bool b) {
  if (u.size() != m || v.size() != m) throw std::invalid_argument("affine_to_rank3: length mismatch");
  if (m > kAffineMaxM) throw std::length_error("affine_to_rank3: m exceeds size guard");
  const std::size_t n = std::size_t{1} << m;
  const std::uint64_t uu = u.to_uint();
  const std::uint64_t vv = v.to_uint();
  Rank3Factors f{BitMatrix(n, 3), BitMatrix(3, n)};
  for (std::size_t x = 0; x < n; ++x) {
    f.a.set(x, 0, std::popcount(x & uu) & 1);
    f.a.set(x, 1, true);
    f.a.set(x, 2, b);
  }
  f.b = BitMatrix::ones(3, n);
  for (std::size_t y = 0; y < n; ++y) f.b.set(1, y, std::popcount(y & vv) & 1);
  return f;
}

LinearCode::LinearCode(BitMatrix generator) : gen_(std::move(generator)) {
  const std::size_t r = gen_.rows();
  const std::size_t n = gen_.cols();
  if (r == 0 || r > n) throw std::invalid_argument("LinearCode: need 0 < r <= block length");
  if (r > kCodeExhaustiveMax) throw std::length_error("LinearCode: message length exceeds exhaustive guard");
  if (rank(gen_) != r) throw std::invalid_argument("LinearCode: generator is not full rank");

  systematic_ = true;
  for (std::size_t i = 0; i < r && systematic_; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      if (gen_.get(i, j) != (i == j)) {
        systematic_ = false;
        break;
      }
    }
  }

  // Pick pivot columns greedily and invert the corresponding minor.
  BitMatrix t = gen_.transpose();  // n x r
  std::vector<BitVector> reduced;
  std::vector<std::size_t> lead;
  for (std::size_t c = 0; c < n && pivots_.size() < r; ++c) {
    BitVector v = t.row(c);
    for (std::size_t i = 0; i < reduced.size(); ++i) {
      if (v.get(lead[i])) v ^= reduced[i];
    }
    std::size_t l = r;
    for (std::size_t k = 0; k < r; ++k) {
      if (v.get(k)) {
        l = k;
        break;
      }
    }
    if (l == r) continue;
    for (std::size_t i = 0; i < reduced.size(); ++i) {
      if (reduced[i].get(l)) reduced[i] ^= v;
    }
    reduced.push_back(v);
    lead.push_back(l);
    pivots_.push_back(c);
  }
  BitMatrix minor(r, r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) minor.set(i, j, gen_.get(i, pivots_[j]));
  }
  // Invert by Gauss-Jordan on [minor | I].
  BitMatrix aug = hconcat(minor, BitMatrix::identity(r));
  for (std::size_t c = 0; c < r; ++c) {
    std::size_t p = c;
    while (!aug.get(p, c)) ++p;
    if (p != c) {
      BitVector tmp = aug.row(p);
      aug.set_row(p, aug.row(c));
      aug.set_row(c, tmp);
    }
    const BitVector pr = aug.row(c);
    for (std::size_t i = 0; i < r; ++i) {
      if (i != c && aug.get(i, c)) {
        BitVector ri = aug.row(i);
        ri ^= pr;
        aug.set_row(i, ri);
      }
    }
  }
  pivot_inverse_ = BitMatrix(r, r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) pivot_inverse_.set(i, j, aug.get(i, r + j));
  }

  // Gray-code walk over all nonzero messages.
  min_distance_ = n;
  BitVector cw(n);
  for (std::uint64_t i = 1; i < (std::uint64_t{1} << r); ++i) {
    const std::size_t flip = std::countr_zero(i);
    const Word* g = gen_.row_ptr(flip);
    for (std::size_t w = 0; w < gen_.words_per_row(); ++w) cw.words()[w] ^= g[w];
    min_distance_ = std::min(min_distance_, cw.weight());
  }
}

LinearCode LinearCode::random_systematic(std::size_t r, std::size_t n, std::uint64_t seed,
                                         std::size_t min_distance) {
  if (r == 0 || r > n) throw std::invalid_argument("random_systematic: need 0 < r <= n");
  Rng rng(seed);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    BitMatrix g(r, n);
    for (std::size_t i = 0; i < r; ++i) {
      g.set(i, i, true);
      for (std::size_t j = r; j < n; ++j) g.set(i, j, rng.bit());
    }
    LinearCode code(std::move(g));
    if (code.min_distance() >= min_distance) return code;
  }
  throw std::runtime_error("random_systematic: no code met the distance target");
}

BitVector LinearCode::encode(const BitVector& msg) const {
  if (msg.size() != msg_len()) throw std::invalid_argument("encode: message length mismatch");
  return vecmul(msg, gen_);
}

std::optional<BitVector> LinearCode::decode(const BitVector& word) const {
  if (word.size() != block_len()) throw std::invalid_argument("decode: word length mismatch");
  const std::size_t r = msg_len();
  BitVector y(r);
  for (std::size_t j = 0; j < r; ++j) y.set(j, word.get(pivots_[j]));
  BitVector msg = vecmul(y, pivot_inverse_);
  if (encode(msg) != word) return std::nullopt;
  return msg;
}

void write_text(std::ostream& os, const BitMatrix& m) {
  os << m.rows() << ' ' << m.cols() << '\n';
  std::string line(m.cols(), '0');
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) line[c] = m.get(r, c) ? '1' : '0';
    os << line << '\n';
  }
}

BitMatrix read_text(std::istream& is) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  if (!(is >> rows >> cols)) throw std::runtime_error("read_text: bad header");
  BitMatrix m(rows, cols);
  std::string line;
  for (std::size_t r = 0; r < rows; ++r) {
    if (cols == 0) continue;
    if (!(is >> line) || line.size() != cols) throw std::runtime_error("read_text: bad row " + std::to_string(r));
    for (std::size_t c = 0; c < cols; ++c) {
      if (line[c] != '0' && line[c] != '1') throw std::runtime_error("read_text: invalid character");
      m.set(r, c, line[c] == '1');
    }
  }
  return m;
}

namespace {

void put_u64(std::ostream& os, std::uint64_t x) {
  char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((x >> (8 * i)) & 0xFF);
  os.write(buf, 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char buf[8];
  if (!is.read(reinterpret_cast<char*>(buf), 8)) throw std::runtime_error("read_binary: truncated header");
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= std::uint64_t{buf[i]} << (8 * i);
  return x;
}

}  // namespace

// Payload is the row-major bit stream, bit k at byte k/8 position k%8.
void write_binary(std::ostream& os, const BitMatrix& m) {
  put_u64(os, m.rows());
  put_u64(os, m.cols());
  std::vector<char> bytes((m.rows() * m.cols() + 7) / 8, 0);
  std::size_t k = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c, ++k) {
      if (m.get(r, c)) bytes[k / 8] = static_cast<char>(bytes[k / 8] | (1 << (k % 8)));
    }
  }
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

BitMatrix read_binary(std::istream& is) {
  const std::uint64_t rows = get_u64(is);
  const std::uint64_t cols = get_u64(is);
  if (rows != 0 && cols > (std::uint64_t{1} << 40) / rows) throw std::runtime_error("read_binary: matrix too large");
  BitMatrix m(rows, cols);
  std::vector<char> bytes((rows * cols + 7) / 8);
  if (!is.read(bytes.data(), static_cast<std::streamsize>(bytes.size()))) {
    throw std::runtime_error("read_binary: truncated payload");
  }
  std::size_t k = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c, ++k) {
      if ((bytes[k / 8] >> (k % 8)) & 1) m.set(r, c, true);
    }
  }
  return m;
}

}  // namespace rectpcp
