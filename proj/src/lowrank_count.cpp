#include "rectpcp/lowrank_count.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <stdexcept>

#include "json.hpp"

#include "rectpcp/rng.hpp"

namespace rectpcp {

namespace {

struct Bucket {
  std::uint64_t key;
  std::uint64_t count;
};

std::vector<Bucket> buckets(std::vector<std::uint64_t> keys) {
  std::sort(keys.begin(), keys.end());
  std::vector<Bucket> out;
  for (std::uint64_t k : keys) {
    if (!out.empty() && out.back().key == k) {
      ++out.back().count;
    } else {
      out.push_back({k, 1});
    }
  }
  return out;
}

inline constexpr std::size_t kHistogramMaxBits = 20;

// Ones in the N1 x N2 matrix with entry <row_keys[i], col_keys[j]>; keys use
// the low `bits` bits. Small widths go through a column histogram and its
// Walsh-Hadamard transform, wider ones through sorted buckets.
std::uint64_t count_by_buckets(std::vector<std::uint64_t> row_keys, std::vector<std::uint64_t> col_keys,
                               std::size_t bits) {
  if (bits <= kHistogramMaxBits) {
    const std::size_t size = std::size_t{1} << bits;
    std::vector<std::int64_t> h(size, 0);
    for (std::uint64_t v : col_keys) ++h[v];
    for (std::size_t len = 1; len < size; len <<= 1) {
      for (std::size_t i = 0; i < size; i += 2 * len) {
        for (std::size_t j = i; j < i + len; ++j) {
          const std::int64_t x = h[j];
          const std::int64_t y = h[j + len];
          h[j] = x + y;
          h[j + len] = x - y;
        }
      }
    }
    // h[u] = #{v : <u,v> = 0} - #{v : <u,v> = 1}.
    const auto m = static_cast<std::int64_t>(col_keys.size());
    std::uint64_t total = 0;
    for (std::uint64_t u : row_keys) total += static_cast<std::uint64_t>((m - h[u]) / 2);
    return total;
  }
  const auto rows = buckets(std::move(row_keys));
  const auto cols = buckets(std::move(col_keys));
  std::uint64_t total = 0;
  for (const Bucket& u : rows) {
    if (u.key == 0) continue;
    std::uint64_t hits = 0;
    for (const Bucket& v : cols) hits += (std::popcount(u.key & v.key) & 1) ? v.count : 0;
    total += u.count * hits;
  }
  return total;
}

std::vector<std::uint64_t> row_keys(const BitMatrix& a) {
  std::vector<std::uint64_t> keys(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) keys[i] = a.cols() == 0 ? 0 : a.row_ptr(i)[0];
  return keys;
}

std::vector<std::uint64_t> col_keys(const BitMatrix& b) {
  std::vector<std::uint64_t> keys(b.cols(), 0);
  for (std::size_t k = 0; k < b.rows(); ++k) {
    const Word* p = b.row_ptr(k);
    for (std::size_t w = 0; w < b.words_per_row(); ++w) {
      Word x = p[w];
      while (x) {
        keys[w * kWordBits + std::countr_zero(x)] |= std::uint64_t{1} << k;
        x &= x - 1;
      }
    }
  }
  return keys;
}

}  // namespace

FourierTable::FourierTable(std::size_t arity, std::vector<std::int64_t> numerators)
    : arity_(arity), num_(std::move(numerators)) {
  if (num_.size() != (std::size_t{1} << arity_)) throw std::invalid_argument("FourierTable: size mismatch");
}

Rational FourierTable::evaluate(std::uint64_t y) const {
  std::int64_t acc = 0;
  for (std::uint64_t k = 0; k < num_.size(); ++k) acc += (std::popcount(k & y) & 1) ? -num_[k] : num_[k];
  return dyadic(acc, static_cast<unsigned>(arity_));
}

FourierTable fourier(const std::vector<std::uint8_t>& tt) {
  const std::size_t n = tt.size();
  if (n == 0 || !std::has_single_bit(n)) throw std::invalid_argument("fourier: length must be a power of two");
  const auto arity = static_cast<std::size_t>(std::countr_zero(n));
  if (arity > kFourierMaxArity) throw std::length_error("fourier: arity exceeds guard");
  std::vector<std::int64_t> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = tt[i] ? 1 : 0;
  for (std::size_t len = 1; len < n; len <<= 1) {
    for (std::size_t i = 0; i < n; i += 2 * len) {
      for (std::size_t j = i; j < i + len; ++j) {
        const std::int64_t x = h[j];
        const std::int64_t y = h[j + len];
        h[j] = x + y;
        h[j + len] = x - y;
      }
    }
  }
  return FourierTable(arity, std::move(h));
}

std::uint64_t count_ones_naive(const BitMatrix& a, const BitMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("count_ones_naive: dimension mismatch");
  return matmul(a, b).weight();
}

std::uint64_t count_ones_bucketed(const BitMatrix& a, const BitMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("count_ones_bucketed: dimension mismatch");
  if (a.cols() > kBucketMaxRank) throw std::length_error("count_ones_bucketed: rank exceeds bucket guard");
  return count_by_buckets(row_keys(a), col_keys(b), a.cols());
}

Rational acceptance_probability(const FourierTable& f, const std::vector<BitMatrix>& left,
                                const std::vector<BitMatrix>& right) {
  const std::size_t q = f.arity();
  if (left.size() != q || right.size() != q) throw std::invalid_argument("acceptance_probability: need one factor pair per input");
  if (q == 0) return f.coeff(0);
  const std::size_t n1 = left[0].rows();
  const std::size_t n2 = right[0].cols();
  std::size_t total_rank = 0;
  for (std::size_t k = 0; k < q; ++k) {
    if (left[k].rows() != n1 || right[k].cols() != n2 || left[k].cols() != right[k].rows()) {
      throw std::invalid_argument("acceptance_probability: shape mismatch at input " + std::to_string(k));
    }
    total_rank += left[k].cols();
  }

  std::vector<std::vector<std::uint64_t>> lk(q), rk(q);
  std::vector<std::size_t> width(q);
  const bool packed = total_rank <= 64;
  if (packed) {
    for (std::size_t k = 0; k < q; ++k) {
      lk[k] = row_keys(left[k]);
      rk[k] = col_keys(right[k]);
      width[k] = left[k].cols();
    }
  }

  const BigInt cells = BigInt(n1) * n2;
  BigInt acc = 0;
  for (std::uint64_t subset = 0; subset < (std::uint64_t{1} << q); ++subset) {
    const std::int64_t c = f.numerator(subset);
    if (c == 0) continue;
    std::uint64_t ones = 0;
    if (subset != 0) {
      if (packed) {
        std::vector<std::uint64_t> rows(n1, 0), cols(n2, 0);
        std::size_t shift = 0;
        for (std::size_t k = 0; k < q; ++k) {
          if (!((subset >> k) & 1)) continue;
          for (std::size_t i = 0; i < n1; ++i) rows[i] |= lk[k][i] << shift;
          for (std::size_t j = 0; j < n2; ++j) cols[j] |= rk[k][j] << shift;
          shift += width[k];
        }
        ones = count_by_buckets(std::move(rows), std::move(cols), shift);
      } else {
        BitMatrix l(n1, 0), r(0, n2);
        for (std::size_t k = 0; k < q; ++k) {
          if (!((subset >> k) & 1)) continue;
          l = hconcat(l, left[k]);
          r = vconcat(r, right[k]);
        }
        ones = count_ones_naive(l, r);
      }
    }
    acc += BigInt(c) * (cells - 2 * BigInt(ones));
  }
  return Rational(acc, cells << static_cast<unsigned>(q));
}

std::string CountBenchmark::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  j["rho"] = rho;
  j["naive_ns"] = naive_ns;
  j["bucketed_ns"] = bucketed_ns;
  return j.dump();
}

CountBenchmark benchmark_counting(std::size_t n, std::size_t rho, std::uint64_t seed, int reps) {
  Rng rng(seed);
  BitMatrix a(n, rho), b(rho, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < rho; ++k) {
      a.set(i, k, rng.bit());
      b.set(k, i, rng.bit());
    }
  using clock = std::chrono::steady_clock;
  CountBenchmark out{n, rho, UINT64_MAX, UINT64_MAX, 0};
  for (int rep = 0; rep < std::max(reps, 1); ++rep) {
    auto t0 = clock::now();
    const std::uint64_t x = count_ones_naive(a, b);
    auto t1 = clock::now();
    const std::uint64_t y = count_ones_bucketed(a, b);
    auto t2 = clock::now();
    if (x != y) throw std::logic_error("benchmark_counting: backends disagree");
    out.ones = x;
    out.naive_ns = std::min<std::uint64_t>(out.naive_ns, std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count());
    out.bucketed_ns = std::min<std::uint64_t>(out.bucketed_ns, std::chrono::duration_cast<std::chrono::nanoseconds>(t2 - t1).count());
  }
  return out;
}

}  // namespace rectpcp
