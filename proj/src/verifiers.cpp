#include "rectpcp/verifiers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "rectpcp/rng.hpp"

namespace rectpcp {

namespace {

bool is_prime(unsigned n) {
  if (n < 2) return false;
  for (unsigned d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

std::shared_ptr<const Predicate> parity_predicate(std::size_t bits) {
  std::vector<std::uint8_t> tt(std::size_t{1} << bits);
  for (std::size_t a = 0; a < tt.size(); ++a) tt[a] = (std::popcount(a) % 2 == 0) ? 1 : 0;
  return std::make_shared<Predicate>(std::make_shared<TableDecision>(std::move(tt)), bits, std::vector<ParityCheck>{}, 2);
}

std::uint64_t checked_pow(std::uint64_t base, std::size_t exp, std::uint64_t limit, const char* what) {
  std::uint64_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (out > limit / base) throw std::length_error(what);
    out *= base;
  }
  return out;
}

std::size_t ceil_log2(std::uint64_t n) {
  std::size_t b = 0;
  while ((std::uint64_t{1} << b) < n) ++b;
  return b;
}

}  // namespace

FiniteField::FiniteField(unsigned order) : order_(order), p_(0), k_(0), bits_(0) {
  if (order < 2 || order > kFieldMaxOrder) throw std::invalid_argument("field order must lie in 2..256");
  for (unsigned p = 2; p <= order; ++p) {
    if (order % p == 0) {
      p_ = p;
      break;
    }
  }
  unsigned rest = order;
  while (rest % p_ == 0) {
    rest /= p_;
    ++k_;
  }
  if (rest != 1 || !is_prime(p_)) throw std::invalid_argument("field order " + std::to_string(order) + " is not a prime power");
  bits_ = static_cast<unsigned>(ceil_log2(order));

  const unsigned q = order_;
  add_.resize(q * q);
  mul_.resize(q * q);
  neg_.resize(q);
  inv_.assign(q, 0);
  trace_.resize(q);

  auto digits = [&](unsigned a) {
    std::vector<unsigned> d(k_);
    for (unsigned i = 0; i < k_; ++i, a /= p_) d[i] = a % p_;
    return d;
  };
  auto number = [&](const std::vector<unsigned>& d) {
    unsigned a = 0;
    for (unsigned i = k_; i-- > 0;) a = a * p_ + d[i];
    return a;
  };
  for (unsigned a = 0; a < q; ++a) {
    const auto da = digits(a);
    for (unsigned b = 0; b < q; ++b) {
      const auto db = digits(b);
      std::vector<unsigned> s(k_);
      for (unsigned i = 0; i < k_; ++i) s[i] = (da[i] + db[i]) % p_;
      add_[a * q + b] = static_cast<std::uint8_t>(number(s));
    }
    std::vector<unsigned> n(k_);
    for (unsigned i = 0; i < k_; ++i) n[i] = (p_ - da[i]) % p_;
    neg_[a] = number(n);
  }

  if (k_ == 1) {
    for (unsigned a = 0; a < q; ++a)
      for (unsigned b = 0; b < q; ++b) mul_[a * q + b] = static_cast<std::uint8_t>((a * b) % q);
  } else {
    // Smallest monic primitive polynomial: x must have multiplicative order q-1.
    std::vector<unsigned> exp;
    for (unsigned code = 0; code < q && exp.empty(); ++code) {
      const auto c = digits(code);
      if (c[0] == 0) continue;
      std::vector<unsigned> e(k_, 0);
      e[0] = 1;
      std::vector<unsigned> seq{1};
      bool ok = true;
      for (unsigned i = 1; i < q - 1 && ok; ++i) {
        const unsigned top = e[k_ - 1];
        for (unsigned j = k_; j-- > 1;) e[j] = e[j - 1];
        e[0] = 0;
        for (unsigned j = 0; j < k_; ++j) e[j] = (e[j] + p_ * p_ - (top * c[j]) % p_) % p_;
        const unsigned v = number(e);
        if (v == 1 || v == 0) ok = false;
        seq.push_back(v);
      }
      if (ok) {
        modulus_ = c;
        modulus_.push_back(1);
        exp = std::move(seq);
      }
    }
    if (exp.empty()) throw std::logic_error("no primitive polynomial found");
    std::vector<unsigned> log(q, 0);
    for (unsigned i = 0; i < q - 1; ++i) log[exp[i]] = i;
    for (unsigned a = 0; a < q; ++a)
      for (unsigned b = 0; b < q; ++b)
        mul_[a * q + b] = static_cast<std::uint8_t>((a == 0 || b == 0) ? 0 : exp[(log[a] + log[b]) % (q - 1)]);
  }

  for (unsigned a = 1; a < q; ++a)
    for (unsigned b = 1; b < q; ++b)
      if (mul(a, b) == 1) inv_[a] = b;

  for (unsigned a = 0; a < q; ++a) {
    unsigned t = 0, power = a;
    for (unsigned i = 0; i < k_; ++i) {
      t = add(t, power);
      unsigned next = 1;
      for (unsigned j = 0; j < p_; ++j) next = mul(next, power);
      power = next;
    }
    if (t >= p_) throw std::logic_error("trace left the prime field");
    trace_[a] = t;
  }

  for (unsigned a = 0; a < q; ++a) {
    if (add(a, 0) != a || mul(a, 1) != a || add(a, neg(a)) != 0) throw std::logic_error("field identity axiom failed");
    if (a != 0 && mul(a, inv_[a]) != 1) throw std::logic_error("field inverse axiom failed");
    for (unsigned b = 0; b < q; ++b) {
      if (add(a, b) != add(b, a) || mul(a, b) != mul(b, a)) throw std::logic_error("field commutativity failed");
      for (unsigned c = 0; c < q; ++c) {
        if (add(add(a, b), c) != add(a, add(b, c))) throw std::logic_error("field addition is not associative");
        if (mul(mul(a, b), c) != mul(a, mul(b, c))) throw std::logic_error("field multiplication is not associative");
        if (mul(a, add(b, c)) != add(mul(a, b), mul(a, c))) throw std::logic_error("field distributivity failed");
      }
    }
  }
}

std::shared_ptr<const FiniteField> FiniteField::get(unsigned order) {
  static std::mutex mu;
  static std::map<unsigned, std::shared_ptr<const FiniteField>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, std::make_shared<FiniteField>(order)).first;
  return it->second;
}

unsigned FiniteField::inv(unsigned a) const {
  if (a == 0) throw std::domain_error("inverse of zero");
  return inv_[a];
}

namespace {

// Tr(<a, y>) for every character index a (digit i of a is coordinate i+1).
std::vector<std::uint8_t> character_values(const FiniteField& f, std::size_t m, std::uint64_t count,
                                           const std::vector<unsigned>& y) {
  const unsigned q = f.order(), p = f.characteristic();
  std::vector<std::uint8_t> out(count);
  std::vector<unsigned> a(m, 0);
  unsigned val = 0;
  for (std::uint64_t idx = 0; idx < count; ++idx) {
    out[idx] = static_cast<std::uint8_t>(val);
    for (std::size_t i = 0; i < m; ++i) {
      const unsigned old_t = f.trace(f.mul(a[i], y[i]));
      a[i] = (a[i] + 1) % q;
      const unsigned new_t = f.trace(f.mul(a[i], y[i]));
      val = (val + p - old_t + new_t) % p;
      if (a[i] != 0) break;
    }
  }
  return out;
}

// |sum_c n_c omega^c|^2 as an exact integer (p = 2, 3) or a double.
struct SquaredSum {
  BigInt exact;
  double approx;
};

SquaredSum squared_sum(const std::uint32_t* n, unsigned p, bool exact = true) {
  double re = 0, im = 0;
  for (unsigned c = 0; c < p; ++c) {
    const double th = 2 * std::numbers::pi * c / p;
    re += n[c] * std::cos(th);
    im += n[c] * std::sin(th);
  }
  SquaredSum s{0, re * re + im * im};
  if (!exact) return s;
  if (p == 2) {
    const BigInt d = BigInt(n[0]) - BigInt(n[1]);
    s.exact = d * d;
  } else if (p == 3) {
    const BigInt a = n[0], b = n[1], c = n[2];
    s.exact = a * a + b * b + c * c - a * b - b * c - a * c;
  }
  return s;
}

}  // namespace

CharacterBias max_bias(const FiniteField& f, std::size_t m, const std::vector<std::vector<unsigned>>& elements) {
  if (elements.empty()) throw std::invalid_argument("max_bias: empty set");
  if (m == 0) throw std::invalid_argument("max_bias: dimension must be positive");
  for (const auto& y : elements) {
    if (y.size() != m) throw std::invalid_argument("max_bias: element has the wrong dimension");
    for (unsigned c : y)
      if (c >= f.order()) throw std::invalid_argument("max_bias: coordinate outside the field");
  }
  const std::uint64_t count = checked_pow(f.order(), m, kBiasMaxCharacters, "max_bias: |F|^m exceeds the character guard");
  const unsigned p = f.characteristic();
  std::vector<std::uint32_t> n(count * p, 0);
  for (const auto& y : elements) {
    const auto vals = character_values(f, m, count, y);
    for (std::uint64_t a = 0; a < count; ++a) ++n[a * p + vals[a]];
  }
  CharacterBias best;
  best.exact = p <= 3;
  const std::uint64_t first_nontrivial = f.order();
  const BigInt size2 = BigInt(elements.size()) * BigInt(elements.size());
  BigInt best_exact = -1;
  double best_approx = -1;
  std::uint64_t best_a = 0;
  for (std::uint64_t a = first_nontrivial; a < count; ++a) {
    const SquaredSum s = squared_sum(&n[a * p], p);
    const bool better = best.exact ? s.exact > best_exact : s.approx > best_approx;
    if (better) {
      best_exact = s.exact;
      best_approx = s.approx;
      best_a = a;
    }
  }
  if (best_approx < 0) return best;  // m == 1: no qualifying character
  if (best.exact) {
    best.squared = Rational(best_exact, size2);
    best.value = std::sqrt(to_double(best.squared));
  } else {
    best.squared = Rational(best_approx / static_cast<double>(elements.size()) / static_cast<double>(elements.size()));
    best.value = std::sqrt(best_approx) / static_cast<double>(elements.size());
  }
  best.witness.resize(m);
  for (std::size_t i = 0; i < m; ++i, best_a /= f.order()) best.witness[i] = static_cast<unsigned>(best_a % f.order());
  return best;
}

BiasedSet BiasedSet::from_elements(FieldPtr field, std::size_t m, std::vector<std::vector<unsigned>> elements,
                                   const Rational& lambda) {
  if (!field) throw std::invalid_argument("biased set needs a field");
  for (const auto& y : elements)
    if (y.empty() || y[0] == 0) throw std::invalid_argument("biased set elements need a nonzero first coordinate");
  BiasedSet s{field, m, lambda, std::move(elements), {}};
  s.bias = max_bias(*field, m, s.elements);
  if (s.bias.squared > lambda * lambda) {
    throw std::invalid_argument("set bias " + std::to_string(s.bias.value) + " exceeds lambda " + to_string(lambda));
  }
  return s;
}

BiasedSet build_biased_set(FieldPtr field, std::size_t m, const Rational& lambda, std::uint64_t seed, std::size_t max_size) {
  if (!field) throw std::invalid_argument("build_biased_set needs a field");
  if (m == 0) throw std::invalid_argument("build_biased_set: dimension must be positive");
  if (lambda <= 0 || lambda > 1) throw std::invalid_argument("build_biased_set: lambda must lie in (0, 1]");
  const FiniteField& f = *field;
  const unsigned q = f.order(), p = f.characteristic();
  const std::uint64_t count = checked_pow(q, m, kBiasMaxCharacters, "build_biased_set: |F|^m exceeds the character guard");
  const std::uint64_t pool_size = count / q;
  const double target = to_double(lambda * lambda);

  auto element = [&](std::uint64_t idx) {
    std::vector<unsigned> y(m);
    y[0] = 1;
    for (std::size_t i = 1; i < m; ++i, idx /= q) y[i] = static_cast<unsigned>(idx % q);
    return y;
  };

  Rng rng(seed);
  std::vector<std::uint64_t> pool(pool_size);
  for (std::uint64_t i = 0; i < pool_size; ++i) pool[i] = i;
  std::vector<std::uint32_t> n(count * p, 0);
  std::vector<std::vector<unsigned>> chosen;
  constexpr int kCandidates = 4;

  while (!pool.empty() && chosen.size() < max_size) {
    double best_score = 0;
    std::size_t best_pos = 0;
    std::vector<std::uint8_t> best_vals;
    const int tries = static_cast<int>(std::min<std::size_t>(kCandidates, pool.size()));
    for (int t = 0; t < tries; ++t) {
      const std::size_t pos = rng.below(pool.size());
      auto vals = character_values(f, m, count, element(pool[pos]));
      double score = 0;
      std::vector<std::uint32_t> tmp(p);
      for (std::uint64_t a = q; a < count; ++a) {
        std::copy_n(&n[a * p], p, tmp.begin());
        ++tmp[vals[a]];
        score = std::max(score, squared_sum(tmp.data(), p, false).approx);
      }
      if (t == 0 || score < best_score) {
        best_score = score;
        best_pos = pos;
        best_vals = std::move(vals);
      }
    }
    for (std::uint64_t a = 0; a < count; ++a) ++n[a * p + best_vals[a]];
    chosen.push_back(element(pool[best_pos]));
    std::swap(pool[best_pos], pool.back());
    pool.pop_back();
    const double size = static_cast<double>(chosen.size());
    if (count == q || best_score / (size * size) <= target + 1e-9) {
      CharacterBias b = max_bias(f, m, chosen);
      if (b.squared <= lambda * lambda) return BiasedSet{field, m, lambda, std::move(chosen), std::move(b)};
    }
  }
  throw std::runtime_error("build_biased_set: budget exhausted before reaching lambda " + to_string(lambda));
}

BlrVerifier::BlrVerifier(std::size_t m)
    : Verifier([m] {
        if (m % 2 != 0 || m < 2 || m > 20) throw std::invalid_argument("BLR needs an even m in 2..20");
        VerifierInfo info;
        info.name = "blr";
        info.partition = {m, m, 0, 0};
        info.r = 2 * m;
        info.q = 3;
        info.m = std::uint64_t{1} << m;
        info.ell = std::uint64_t{1} << (m / 2);
        info.decision_size = 2;
        return info;
      }()),
      m_(m),
      half_(m / 2),
      pred_(parity_predicate(3)) {}

std::uint64_t BlrVerifier::location(std::uint64_t z) const {
  return (z & RandomnessPartition::mask(half_)) * info_.ell + (z >> half_);
}

void BlrVerifier::queries(std::uint64_t coins, std::uint64_t* out) const {
  const std::uint64_t h = RandomnessPartition::mask(half_);
  const std::uint64_t x1 = coins & h, y1 = (coins >> half_) & h;
  const std::uint64_t x2 = (coins >> m_) & h, y2 = (coins >> (m_ + half_)) & h;
  const std::uint64_t x = x1 | (x2 << half_), y = y1 | (y2 << half_);
  out[0] = location(x);
  out[1] = location(y);
  out[2] = location(x ^ y);
}

Proof BlrVerifier::linear_proof(std::uint64_t a) const {
  Proof p(info_.m);
  for (std::uint64_t z = 0; z < info_.m; ++z) p[location(z)] = static_cast<std::uint32_t>(std::popcount(a & z) & 1);
  return p;
}

Rational BlrVerifier::distance_to_linear(const Proof& proof) const {
  if (m_ > 12) throw std::length_error("distance_to_linear: m exceeds 12");
  if (proof.size() != info_.m) throw std::invalid_argument("distance_to_linear: proof length mismatch");
  std::uint64_t best = info_.m;
  for (std::uint64_t a = 0; a < info_.m; ++a) {
    std::uint64_t d = 0;
    for (std::uint64_t z = 0; z < info_.m; ++z) d += (proof[location(z)] & 1) != (std::popcount(a & z) & 1);
    best = std::min(best, d);
  }
  return Rational(BigInt(best), BigInt(info_.m));
}

std::shared_ptr<BlrVerifier> blr_verifier(std::size_t m) { return std::make_shared<BlrVerifier>(m); }

namespace {

VerifierInfo line_info(const BiasedSet& s, std::size_t sigma) {
  if (!s.field) throw std::invalid_argument("line pattern needs a field");
  const std::size_t dim = s.m;
  if (dim % 2 == 0) throw std::invalid_argument("line pattern needs an odd dimension m");
  if (dim < 7) {
    throw std::invalid_argument("line pattern needs m >= 7: the row part (R_3..R_{(m-1)/2}) and column part "
                                "(R_{(m+5)/2}..R_{m-1}) are empty below that");
  }
  if (s.elements.empty()) throw std::invalid_argument("line pattern needs a nonempty direction set");
  for (const auto& y : s.elements)
    if (y.size() != dim || y[0] == 0) throw std::invalid_argument("line pattern directions need y_1 != 0 and length m");
  const std::size_t bits = s.field->coin_bits();
  const std::size_t y_bits = ceil_log2(s.elements.size());
  const std::size_t h = (dim - 1) / 2;
  VerifierInfo info;
  info.name = "line";
  info.partition = {(h - 2) * bits, (h - 2) * bits, 2 * bits + y_bits / 2, 2 * bits + (y_bits - y_bits / 2)};
  info.r = info.partition.r();
  if (info.r > 63) throw std::length_error("line pattern needs more than 63 coins");
  info.q = 4 * s.field->order();
  info.m = checked_pow(s.field->order(), dim, std::uint64_t{1} << 40, "line pattern: |F|^m exceeds 2^40");
  info.sigma = sigma;
  return info;
}

}  // namespace

LineQueryPattern::LineQueryPattern(BiasedSet directions, std::shared_ptr<const Predicate> predicate, std::size_t sigma)
    : Verifier(line_info(directions, sigma)),
      set_(std::move(directions)),
      dim_(set_.m),
      half_((set_.m - 1) / 2),
      bits_(set_.field->coin_bits()),
      y_bits_(ceil_log2(set_.elements.size())),
      full_(set_.field->power_of_two() && std::has_single_bit(set_.elements.size())),
      pred_(predicate ? std::move(predicate) : constant_predicate(true, info_.q * info_.sigma)) {
  if (pred_->answer_bits() != info_.q * info_.sigma || pred_->p() != 0) {
    throw std::invalid_argument("line pattern predicate must read q*sigma answer bits and no parities");
  }
}

LineQueryPattern::Slot LineQueryPattern::slot(std::size_t i) const {
  const std::size_t h = half_;
  if (i < 2 || i > dim_) throw std::out_of_range("coordinate index out of range");
  if (i == 2) return {Segment::kSharedRow, 0};
  if (i == h + 1) return {Segment::kSharedRow, bits_};
  if (i == h + 2) return {Segment::kSharedCol, 0};
  if (i == dim_) return {Segment::kSharedCol, bits_};
  if (i <= h) return {Segment::kRow, (i - 3) * bits_};
  return {Segment::kCol, (i - (h + 3)) * bits_};
}

namespace {

std::size_t segment_base(const RandomnessPartition& p, LineQueryPattern::Segment s) {
  switch (s) {
    case LineQueryPattern::Segment::kRow: return 0;
    case LineQueryPattern::Segment::kCol: return p.r_row;
    case LineQueryPattern::Segment::kSharedRow: return p.r_obliv();
    case LineQueryPattern::Segment::kSharedCol: return p.r_obliv() + p.r_shared_row;
  }
  return 0;
}

}  // namespace

LineQueryPattern::Coins LineQueryPattern::decode(std::uint64_t coins) const {
  Coins c;
  c.x.assign(dim_, 0);
  const auto& part = info_.partition;
  for (std::size_t i = 2; i <= dim_; ++i) {
    const Slot s = slot(i);
    c.x[i - 1] = static_cast<unsigned>((coins >> (segment_base(part, s.segment) + s.offset)) & RandomnessPartition::mask(bits_));
  }
  const std::size_t lo = y_low_bits();
  c.ry = part.shared_row(coins) >> (2 * bits_);
  c.ry |= (part.shared_col(coins) >> (2 * bits_)) << lo;
  return c;
}

std::uint64_t LineQueryPattern::encode(const Coins& c) const {
  const auto& part = info_.partition;
  std::uint64_t coins = 0;
  for (std::size_t i = 2; i <= dim_; ++i) {
    const Slot s = slot(i);
    coins |= std::uint64_t{c.x[i - 1]} << (segment_base(part, s.segment) + s.offset);
  }
  const std::size_t lo = y_low_bits();
  coins |= (c.ry & RandomnessPartition::mask(lo)) << (part.r_obliv() + 2 * bits_);
  coins |= (c.ry >> lo) << (part.r_obliv() + part.r_shared_row + 2 * bits_);
  return coins;
}

bool LineQueryPattern::coin_valid(std::uint64_t coins) const {
  if (full_) return true;
  const Coins c = decode(coins);
  if (c.ry >= set_.elements.size()) return false;
  return std::all_of(c.x.begin(), c.x.end(), [&](unsigned v) { return v < field().order(); });
}

LineQueryPattern::QueryIndex LineQueryPattern::split_k(std::size_t k) const {
  const unsigned q = field().order();
  if (k >= info_.q) throw std::out_of_range("query index out of range");
  const unsigned hi = static_cast<unsigned>(k / q);
  return {hi >> 1, hi & 1, static_cast<unsigned>(k % q)};
}

std::size_t LineQueryPattern::make_k(QueryIndex qi) const { return (2 * qi.b1 + qi.b2) * field().order() + qi.t; }

std::vector<unsigned> LineQueryPattern::direction(unsigned b2, std::uint64_t ry) const {
  if (b2 == 0) {
    std::vector<unsigned> e(dim_, 0);
    e[0] = 1;
    return e;
  }
  return set_.elements.at(ry);
}

std::uint64_t LineQueryPattern::location_of(const std::vector<unsigned>& z) const {
  std::uint64_t loc = 0;
  for (std::size_t i = dim_; i-- > 0;) loc = loc * field().order() + z[i];
  return loc;
}

std::vector<unsigned> LineQueryPattern::point_of(std::uint64_t location) const {
  std::vector<unsigned> z(dim_);
  for (std::size_t i = 0; i < dim_; ++i, location /= field().order()) z[i] = static_cast<unsigned>(location % field().order());
  return z;
}

std::vector<unsigned> LineQueryPattern::shift(const std::vector<unsigned>& v, int j) {
  const std::size_t n = v.size();
  std::vector<unsigned> out(n);
  const std::size_t s = static_cast<std::size_t>(((j % static_cast<int>(n)) + static_cast<int>(n)) % static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i) out[i] = v[(i + s) % n];
  return out;
}

std::vector<unsigned> LineQueryPattern::point(const Coins& c, QueryIndex qi) const {
  const auto y = direction(qi.b2, c.ry);
  std::vector<unsigned> v(dim_);
  for (std::size_t i = 0; i < dim_; ++i) v[i] = field().add(c.x[i], field().mul(qi.t, y[i]));
  return shift(v, static_cast<int>(qi.b1));
}

void LineQueryPattern::queries(std::uint64_t coins, std::uint64_t* out) const {
  const Coins c = decode(coins);
  for (std::size_t k = 0; k < info_.q; ++k) out[k] = location_of(point(c, split_k(k)));
}

std::shared_ptr<LineQueryPattern> line_query_pattern(BiasedSet directions, std::shared_ptr<const Predicate> predicate) {
  return std::make_shared<LineQueryPattern>(std::move(directions), std::move(predicate));
}

namespace {

class LineAgents : public RnlAgents {
 public:
  explicit LineAgents(std::shared_ptr<const LineQueryPattern> v) : v_(std::move(v)) {}

  AgentList<RowConfig> row(std::uint64_t r_row, std::uint64_t shared, std::size_t k) const override {
    auto entries = list(r_row, shared, k, true);
    AgentList<RowConfig> out;
    for (const auto& e : entries) out.list.push_back({e.own, e.shared_part, e.k});
    out.self = self_index(entries, shared, k);
    return out;
  }

  AgentList<ColConfig> col(std::uint64_t r_col, std::uint64_t shared, std::size_t k) const override {
    auto entries = list(r_col, shared, k, false);
    AgentList<ColConfig> out;
    for (const auto& e : entries) out.list.push_back({e.own, e.shared_part, e.k});
    out.self = self_index(entries, shared, k);
    return out;
  }

 private:
  using Segment = LineQueryPattern::Segment;

  struct Entry {
    std::uint64_t ry;
    std::size_t k;
    std::uint64_t own;
    std::uint64_t shared_part;
  };

  // Intercept with only the coordinates readable from one side; -1 marks unknown.
  std::vector<int> visible(std::uint64_t own, std::uint64_t shared, bool row_side) const {
    const auto& part = v_->partition();
    const std::size_t bits = v_->field().coin_bits();
    std::vector<int> x(v_->dim(), -1);
    x[0] = 0;
    for (std::size_t i = 2; i <= v_->dim(); ++i) {
      const auto s = v_->slot(i);
      std::uint64_t word = 0;
      switch (s.segment) {
        case Segment::kRow:
          if (!row_side) continue;
          word = own;
          break;
        case Segment::kCol:
          if (row_side) continue;
          word = own;
          break;
        case Segment::kSharedRow: word = shared; break;
        case Segment::kSharedCol: word = shared >> part.r_shared_row; break;
      }
      x[i - 1] = static_cast<int>((word >> s.offset) & RandomnessPartition::mask(bits));
    }
    return x;
  }

  std::uint64_t shared_ry(std::uint64_t shared) const {
    const auto& part = v_->partition();
    const std::size_t bits = v_->field().coin_bits();
    const std::uint64_t lo = (shared & RandomnessPartition::mask(part.r_shared_row)) >> (2 * bits);
    const std::uint64_t hi = (shared >> part.r_shared_row) >> (2 * bits);
    return lo | (hi << v_->y_low_bits());
  }

  std::vector<Entry> list(std::uint64_t own, std::uint64_t shared, std::size_t k, bool row_side) const {
    const FiniteField& f = v_->field();
    const std::size_t n = v_->dim(), h = (n - 1) / 2, bits = f.coin_bits();
    const auto x = visible(own, shared, row_side);
    const std::uint64_t ry = shared_ry(shared);
    const auto qi = v_->split_k(k);
    const auto y = v_->direction(qi.b2, ry);
    auto vcoord = [&](std::size_t i) {
      if (x[i] < 0) throw std::logic_error("line agent read an intercept coordinate outside its view");
      return f.add(static_cast<unsigned>(x[i]), f.mul(qi.t, y[i]));
    };
    // Output coordinates (1-based): 2..h+1 on the row side, h+2..m on the column side.
    const std::size_t lo = row_side ? 2 : h + 2, hi = row_side ? h + 1 : n;

    std::vector<Entry> out;
    for (std::uint64_t ry2 = 0; ry2 < v_->directions().elements.size(); ++ry2) {
      for (unsigned b1 = 0; b1 < 2; ++b1) {
        for (unsigned b2 = 0; b2 < 2; ++b2) {
          const auto y2 = v_->direction(b2, ry2);
          const int j = static_cast<int>(qi.b1) - static_cast<int>(b1);
          auto s = [&](std::size_t i0) {  // 0-based coordinate of shift_j(x + t*y)
            return vcoord(static_cast<std::size_t>((static_cast<int>(i0) + j + static_cast<int>(n)) % static_cast<int>(n)));
          };
          const unsigned s0 = s(0);
          unsigned t2 = 0, hits = 0;
          for (unsigned t = 0; t < f.order(); ++t) {
            if (f.sub(s0, f.mul(t, y2[0])) == 0) {
              t2 = t;
              ++hits;
            }
          }
          if (hits != 1) throw std::logic_error("line agent: realizable t' is not unique");
          std::uint64_t own2 = 0, shared2 = 0;
          for (std::size_t i = lo; i <= hi; ++i) {
            const std::uint64_t xi = f.sub(s(i - 1), f.mul(t2, y2[i - 1]));
            const auto sl = v_->slot(i);
            if (sl.segment == Segment::kRow || sl.segment == Segment::kCol) {
              own2 |= xi << sl.offset;
            } else {
              shared2 |= xi << sl.offset;
            }
          }
          const std::uint64_t ry_part = row_side ? (ry2 & RandomnessPartition::mask(v_->y_low_bits())) : (ry2 >> v_->y_low_bits());
          shared2 |= ry_part << (2 * bits);
          out.push_back({ry2, v_->make_k({b1, b2, t2}), own2, shared2});
        }
      }
    }
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return std::tie(a.ry, a.k) < std::tie(b.ry, b.k); });
    return out;
  }

  std::size_t self_index(const std::vector<Entry>& entries, std::uint64_t shared, std::size_t k) const {
    const std::uint64_t ry = shared_ry(shared);
    for (std::size_t i = 0; i < entries.size(); ++i)
      if (entries[i].ry == ry && entries[i].k == k) return i;
    throw std::logic_error("line agent: configuration missing from its own list");
  }

  std::shared_ptr<const LineQueryPattern> v_;
};

}  // namespace

AgentsPtr line_rnl_agents(std::shared_ptr<const LineQueryPattern> pattern) {
  if (!pattern) throw std::invalid_argument("line_rnl_agents needs a pattern");
  return std::make_shared<LineAgents>(std::move(pattern));
}

ShiftVerifier::ShiftVerifier(ShiftOptions opts)
    : Verifier([&opts] {
        if (opts.q == 0) throw std::invalid_argument("shift toy needs q >= 1");
        const std::size_t r = opts.a_row + opts.a_col + opts.r_shared_row + opts.r_shared_col;
        if (r > 40) throw std::invalid_argument("shift toy: too many coins");
        if (opts.predicate && (opts.predicate->answer_bits() != opts.q))
          throw std::invalid_argument("shift toy: predicate must read q answer bits");
        VerifierInfo info;
        info.name = "shift";
        info.partition = {opts.a_row, opts.a_col, opts.r_shared_row, opts.r_shared_col};
        info.r = r;
        info.q = opts.q;
        info.p = opts.predicate ? opts.predicate->p() : 0;
        info.m = std::uint64_t{1} << (opts.a_row + opts.a_col);
        info.ell = opts.a_row == opts.a_col ? std::uint64_t{1} << opts.a_row : 0;
        info.soundness = opts.soundness;
        info.robustness = opts.robustness;
        info.decision_size = opts.predicate ? opts.predicate->size() : 0;
        return info;
      }()),
      opts_(std::move(opts)),
      pred_(opts_.predicate ? opts_.predicate : constant_predicate(true, opts_.q)) {
  const std::uint64_t shared = std::uint64_t{1} << info_.partition.r_shared();
  Rng rng(mix64(opts_.seed));
  row_shift_.resize(shared * opts_.q);
  col_shift_.resize(shared * opts_.q);
  for (std::size_t i = 0; i < row_shift_.size(); ++i) {
    row_shift_[i] = rng.next() & RandomnessPartition::mask(opts_.a_row);
    col_shift_[i] = rng.next() & RandomnessPartition::mask(opts_.a_col);
  }
}

void ShiftVerifier::queries(std::uint64_t coins, std::uint64_t* out) const {
  const auto& part = info_.partition;
  const std::uint64_t u = part.row(coins), v = part.col(coins), s = part.shared(coins);
  for (std::size_t k = 0; k < opts_.q; ++k) out[k] = ((u ^ row_shift(k, s)) << opts_.a_col) | (v ^ col_shift(k, s));
}

std::shared_ptr<ShiftVerifier> shift_verifier(ShiftOptions opts) { return std::make_shared<ShiftVerifier>(std::move(opts)); }

namespace {

class ShiftAgents : public RnlAgents {
 public:
  explicit ShiftAgents(std::shared_ptr<const ShiftVerifier> v) : v_(std::move(v)) {}

  AgentList<RowConfig> row(std::uint64_t r_row, std::uint64_t shared, std::size_t k) const override {
    const auto& part = v_->partition();
    const std::uint64_t target = r_row ^ v_->row_shift(k, shared);
    AgentList<RowConfig> out;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << part.r_shared()); ++s)
      for (std::size_t k2 = 0; k2 < v_->q(); ++k2)
        out.list.push_back({target ^ v_->row_shift(k2, s), s & RandomnessPartition::mask(part.r_shared_row), k2});
    out.self = shared * v_->q() + k;
    return out;
  }

  AgentList<ColConfig> col(std::uint64_t r_col, std::uint64_t shared, std::size_t k) const override {
    const auto& part = v_->partition();
    const std::uint64_t target = r_col ^ v_->col_shift(k, shared);
    AgentList<ColConfig> out;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << part.r_shared()); ++s)
      for (std::size_t k2 = 0; k2 < v_->q(); ++k2)
        out.list.push_back({target ^ v_->col_shift(k2, s), s >> part.r_shared_row, k2});
    out.self = shared * v_->q() + k;
    return out;
  }

 private:
  std::shared_ptr<const ShiftVerifier> v_;
};

}  // namespace

AgentsPtr shift_rnl_agents(std::shared_ptr<const ShiftVerifier> v) { return std::make_shared<ShiftAgents>(std::move(v)); }

}  // namespace rectpcp
