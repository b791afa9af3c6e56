#include "rectpcp/verifiers.hpp"

#include <gtest/gtest.h>

#include <complex>
#include <numbers>
#include <set>

#include "rectpcp/rng.hpp"

using namespace rectpcp;

namespace {

// Polynomial multiplication over F_p reduced by the field's modulus.
unsigned poly_mul(const FiniteField& f, unsigned a, unsigned b) {
  const unsigned p = f.characteristic(), k = f.degree();
  if (k == 1) return (a * b) % p;
  std::vector<unsigned> da(k), db(k), prod(2 * k, 0);
  for (unsigned i = 0; i < k; ++i, a /= p, b /= p) {
    da[i] = a % p;
    db[i] = b % p;
  }
  for (unsigned i = 0; i < k; ++i)
    for (unsigned j = 0; j < k; ++j) prod[i + j] = (prod[i + j] + da[i] * db[j]) % p;
  const auto& mod = f.modulus();
  for (unsigned d = 2 * k - 1; d >= k; --d) {
    const unsigned c = prod[d];
    if (c == 0) continue;
    for (unsigned j = 0; j <= k; ++j) prod[d - k + j] = (prod[d - k + j] + p * p - (c * mod[j]) % p) % p;
  }
  unsigned out = 0;
  for (unsigned i = k; i-- > 0;) out = out * p + prod[i];
  return out;
}

std::vector<std::vector<unsigned>> random_directions(const FiniteField& f, std::size_t m, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::set<std::vector<unsigned>> seen;
  std::vector<std::vector<unsigned>> out;
  while (out.size() < count) {
    std::vector<unsigned> y(m);
    y[0] = 1 + static_cast<unsigned>(rng.below(f.order() - 1));
    for (std::size_t i = 1; i < m; ++i) y[i] = static_cast<unsigned>(rng.below(f.order()));
    if (seen.insert(y).second) out.push_back(y);
  }
  return out;
}

std::shared_ptr<LineQueryPattern> small_line(unsigned order, std::size_t dirs, std::uint64_t seed) {
  auto f = FiniteField::get(order);
  return line_query_pattern(BiasedSet::from_elements(f, 7, random_directions(*f, 7, dirs, seed), Rational(1)));
}

// Bias over the same characters via complex exponentials, traces by Frobenius.
double oracle_bias(const FiniteField& f, std::size_t m, const std::vector<std::vector<unsigned>>& s) {
  const unsigned q = f.order(), p = f.characteristic();
  auto trace = [&](unsigned a) {
    unsigned t = 0, pw = a;
    for (unsigned i = 0; i < f.degree(); ++i) {
      t = f.add(t, pw);
      unsigned nx = 1;
      for (unsigned j = 0; j < p; ++j) nx = poly_mul(f, nx, pw);
      pw = nx;
    }
    return t;
  };
  std::uint64_t count = 1;
  for (std::size_t i = 0; i < m; ++i) count *= q;
  double best = 0;
  for (std::uint64_t idx = q; idx < count; ++idx) {
    std::vector<unsigned> a(m);
    std::uint64_t t = idx;
    for (std::size_t i = 0; i < m; ++i, t /= q) a[i] = static_cast<unsigned>(t % q);
    std::complex<double> sum = 0;
    for (const auto& y : s) {
      unsigned dot = 0;
      for (std::size_t i = 0; i < m; ++i) dot = f.add(dot, poly_mul(f, a[i], y[i]));
      sum += std::polar(1.0, 2 * std::numbers::pi * trace(dot) / p);
    }
    best = std::max(best, std::abs(sum) / static_cast<double>(s.size()));
  }
  return best;
}

}  // namespace

TEST(FiniteField, RejectsNonPrimePowers) {
  for (unsigned n : {0u, 1u, 6u, 10u, 12u, 257u}) EXPECT_THROW(FiniteField{n}, std::invalid_argument) << n;
}

TEST(FiniteField, MultiplicationMatchesPolynomialArithmetic) {
  for (unsigned order : {2u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 25u, 27u}) {
    auto f = FiniteField::get(order);
    EXPECT_EQ(f->modulus().size(), f->degree() == 1 ? 0u : f->degree() + 1);
    for (unsigned a = 0; a < order; ++a) {
      for (unsigned b = 0; b < order; ++b) ASSERT_EQ(f->mul(a, b), poly_mul(*f, a, b)) << order << " " << a << " " << b;
      unsigned sum = 0;
      for (unsigned i = 0; i < f->characteristic(); ++i) sum = f->add(sum, a);
      EXPECT_EQ(sum, 0u);
      if (a != 0) EXPECT_EQ(f->mul(a, f->inv(a)), 1u);
    }
    EXPECT_THROW(f->inv(0), std::domain_error);
  }
}

TEST(FiniteField, CoinBitsAndTraceOnGf4) {
  auto f = FiniteField::get(4);
  EXPECT_EQ(f->coin_bits(), 2u);
  EXPECT_EQ(FiniteField::get(3)->coin_bits(), 2u);
  EXPECT_TRUE(f->power_of_two());
  for (unsigned a = 0; a < 4; ++a) EXPECT_EQ(f->trace(a), f->add(a, f->mul(a, a)));
  // Trace is onto F2 and balanced.
  int ones = 0;
  for (unsigned a = 0; a < 4; ++a) ones += f->trace(a);
  EXPECT_EQ(ones, 2);
}

TEST(BiasedSet, FullCosetHasZeroBias) {
  auto f = FiniteField::get(3);
  std::vector<std::vector<unsigned>> all;
  for (unsigned a = 0; a < 3; ++a)
    for (unsigned b = 0; b < 3; ++b) all.push_back({1, a, b});
  auto b = max_bias(*f, 3, all);
  EXPECT_TRUE(b.exact);
  EXPECT_EQ(b.squared, Rational(0));
}

TEST(BiasedSet, SingletonHasBiasOne) {
  for (unsigned order : {2u, 3u, 5u}) {
    auto f = FiniteField::get(order);
    auto b = max_bias(*f, 3, {{1, 0, 1}});
    EXPECT_NEAR(b.value, 1.0, 1e-12);
    if (b.exact) EXPECT_EQ(b.squared, Rational(1));
    EXPECT_EQ(b.witness.size(), 3u);
    EXPECT_FALSE(b.witness[1] == 0 && b.witness[2] == 0);
  }
}

TEST(BiasedSet, MatchesComplexOracle) {
  for (unsigned order : {2u, 3u, 4u, 5u}) {
    auto f = FiniteField::get(order);
    for (int trial = 0; trial < 4; ++trial) {
      const std::size_t available = (order - 1) * order * order;
      auto s = random_directions(*f, 3, std::min<std::size_t>(3 + trial, available), 100 * order + trial);
      auto b = max_bias(*f, 3, s);
      EXPECT_NEAR(b.value, oracle_bias(*f, 3, s), 1e-9) << order << " " << trial;
    }
  }
}

TEST(BiasedSet, SeededBuildMeetsLambda) {
  auto f = FiniteField::get(3);
  auto s = build_biased_set(f, 3, Rational(1, 4), 11);
  EXPECT_LE(s.bias.squared, Rational(1, 16));
  EXPECT_TRUE(s.bias.exact);
  std::set<std::vector<unsigned>> distinct(s.elements.begin(), s.elements.end());
  EXPECT_EQ(distinct.size(), s.elements.size());
  for (const auto& y : s.elements) EXPECT_EQ(y[0], 1u);
  EXPECT_NEAR(s.bias.value, oracle_bias(*f, 3, s.elements), 1e-9);
  auto again = build_biased_set(f, 3, Rational(1, 4), 11);
  EXPECT_EQ(again.elements, s.elements);
}

TEST(BiasedSet, BudgetAndValidation) {
  auto f = FiniteField::get(2);
  EXPECT_THROW(build_biased_set(f, 6, Rational(1, 100), 1, 3), std::runtime_error);
  EXPECT_THROW(BiasedSet::from_elements(f, 3, {{0, 1, 1}}, Rational(1)), std::invalid_argument);
  EXPECT_THROW(BiasedSet::from_elements(f, 3, {{1, 1, 1}}, Rational(1, 2)), std::invalid_argument);
  EXPECT_THROW(max_bias(*FiniteField::get(16), 6, {{1, 0, 0, 0, 0, 0}}), std::length_error);
}

TEST(Blr, LinearFunctionsAccepted) {
  for (std::size_t m : {2u, 4u}) {
    auto v = blr_verifier(m);
    for (std::uint64_t a = 0; a < (1u << m); ++a) EXPECT_EQ(emulate(*v, v->linear_proof(a)), Rational(1));
  }
}

TEST(Blr, RectangularAndSmooth) {
  for (std::size_t m : {2u, 4u, 6u}) {
    auto v = blr_verifier(m);
    EXPECT_TRUE(check_rectangular(*v).ok) << m;
    auto s = measure_smoothness(*v);
    EXPECT_TRUE(s.smooth);
    EXPECT_EQ(s.probability(0), Rational(1, 1 << m));
    auto g = config_graph(*v);
    EXPECT_EQ(g.location.size(), (std::uint64_t{1} << (2 * m)) * 3);
  }
}

TEST(Blr, RejectionAtLeastDistance) {
  auto v = blr_verifier(4);
  Rng rng(5);
  for (int trial = 0; trial < 600; ++trial) {
    Proof proof(16);
    std::uint64_t word = rng.next() & 0xffff;
    if (trial % 3 == 0) {
      // Near-linear: a linear function with a few flips.
      const Proof base = v->linear_proof(rng.below(16));
      word = 0;
      for (int z = 0; z < 16; ++z) word |= std::uint64_t{base[z]} << z;
      for (int f = 0; f < 1 + trial % 4; ++f) word ^= std::uint64_t{1} << rng.below(16);
    }
    for (int z = 0; z < 16; ++z) proof[z] = (word >> z) & 1;
    // Oracle: distance to the nearest linear function, and direct rejection count.
    auto f = [&](std::uint64_t z) { return proof[v->location(z)]; };
    int best = 16;
    for (std::uint64_t a = 0; a < 16; ++a) {
      int d = 0;
      for (std::uint64_t z = 0; z < 16; ++z) d += f(z) != static_cast<std::uint32_t>(std::popcount(a & z) & 1);
      best = std::min(best, d);
    }
    int rejected = 0;
    for (std::uint64_t x = 0; x < 16; ++x)
      for (std::uint64_t y = 0; y < 16; ++y) rejected += (f(x) ^ f(y) ^ f(x ^ y)) & 1;
    const Rational acc = emulate(*v, proof);
    EXPECT_EQ(acc, Rational(256 - rejected, 256));
    EXPECT_EQ(v->distance_to_linear(proof), Rational(best, 16));
    EXPECT_GE(Rational(1) - acc, Rational(best, 16));
  }
}

TEST(Blr, RejectsOddOrOversizedDimension) {
  EXPECT_THROW(blr_verifier(3), std::invalid_argument);
  EXPECT_THROW(blr_verifier(0), std::invalid_argument);
  EXPECT_THROW(blr_verifier(22), std::invalid_argument);
}

TEST(LinePattern, RejectsBadDimensions) {
  auto f = FiniteField::get(2);
  EXPECT_THROW(line_query_pattern(BiasedSet::from_elements(f, 5, random_directions(*f, 5, 2, 1), Rational(1))),
               std::invalid_argument);
  EXPECT_THROW(line_query_pattern(BiasedSet::from_elements(f, 8, random_directions(*f, 8, 2, 1), Rational(1))),
               std::invalid_argument);
}

TEST(LinePattern, PartitionFollowsCoordinateLayout) {
  auto v = small_line(2, 4, 3);
  const auto& p = v->partition();
  EXPECT_EQ(p.r_row, 1u);
  EXPECT_EQ(p.r_col, 1u);
  EXPECT_EQ(p.r_shared_row, 3u);
  EXPECT_EQ(p.r_shared_col, 3u);
  EXPECT_EQ(v->q(), 8u);
  EXPECT_EQ(v->m(), 128u);
  EXPECT_TRUE(v->full_coin_space());
  using S = LineQueryPattern::Segment;
  EXPECT_EQ(v->slot(3).segment, S::kRow);
  EXPECT_EQ(v->slot(6).segment, S::kCol);
  EXPECT_EQ(v->slot(2).segment, S::kSharedRow);
  EXPECT_EQ(v->slot(4).segment, S::kSharedRow);
  EXPECT_EQ(v->slot(5).segment, S::kSharedCol);
  EXPECT_EQ(v->slot(7).segment, S::kSharedCol);
  for (std::uint64_t c = 0; c < (1u << v->r()); ++c) EXPECT_EQ(v->encode(v->decode(c)), c);
}

TEST(LinePattern, TZeroQueriesTheInterceptOrItsShift) {
  auto v = small_line(3, 3, 4);
  EXPECT_FALSE(v->full_coin_space());
  for (std::uint64_t c = 0; c < (1u << v->r()); c += 7) {
    if (!v->coin_valid(c)) continue;
    const auto coins = v->decode(c);
    const auto locs = v->queries(c);
    EXPECT_EQ(locs.size(), 4u * 3u);
    EXPECT_EQ(locs[v->make_k({0, 0, 0})], v->location_of(coins.x));
    EXPECT_EQ(locs[v->make_k({1, 0, 0})], v->location_of(LineQueryPattern::shift(coins.x, 1)));
  }
}

TEST(LinePattern, QueriesAreTheFourLines) {
  // Recompute L0, shift(L0), L1, shift(L1) with integer arithmetic mod 3.
  auto v = small_line(3, 3, 5);
  std::uint64_t valid = 0;
  for (std::uint64_t c = 0; c < (1u << v->r()); ++c) {
    if (!v->coin_valid(c)) continue;
    ++valid;
    const auto coins = v->decode(c);
    const auto& y1 = v->directions().elements[coins.ry];
    std::multiset<std::uint64_t> expect;
    for (int line = 0; line < 2; ++line) {
      for (unsigned t = 0; t < 3; ++t) {
        std::vector<unsigned> z(7);
        for (int i = 0; i < 7; ++i) z[i] = (coins.x[i] + t * (line == 0 ? (i == 0) : y1[i])) % 3;
        std::vector<unsigned> sz(7);
        for (int i = 0; i < 7; ++i) sz[i] = z[(i + 1) % 7];
        for (const auto& w : {z, sz}) {
          std::uint64_t loc = 0;
          for (int i = 6; i >= 0; --i) loc = loc * 3 + w[i];
          expect.insert(loc);
        }
      }
    }
    const auto locs = v->queries(c);
    EXPECT_EQ(std::multiset<std::uint64_t>(locs.begin(), locs.end()), expect) << c;
  }
  EXPECT_EQ(valid, 729u * 3u);
  EXPECT_EQ(v->valid_coin_count(), valid);
}

TEST(LinePattern, ShiftIsABijection) {
  const std::vector<unsigned> v{0, 1, 2, 3, 4, 5, 6};
  EXPECT_EQ(LineQueryPattern::shift(LineQueryPattern::shift(v, 1), -1), v);
  EXPECT_EQ(LineQueryPattern::shift(v, 1), (std::vector<unsigned>{1, 2, 3, 4, 5, 6, 0}));
  EXPECT_EQ(LineQueryPattern::shift(v, 7), v);
}

TEST(LineAgents, RnlHoldsOverGf2) {
  auto v = small_line(2, 4, 6);
  auto r = check_rnl(*v, *line_rnl_agents(v));
  EXPECT_TRUE(r.ok) << r.to_json();
}

TEST(LineAgents, RnlHoldsOverGf3) {
  auto v = small_line(3, 2, 7);
  auto r = check_rnl(*v, *line_rnl_agents(v));
  EXPECT_TRUE(r.ok) << r.to_json();
}

TEST(LineAgents, RnlHoldsOverGf4) {
  auto v = small_line(4, 1, 8);
  auto r = check_rnl(*v, *line_rnl_agents(v));
  EXPECT_TRUE(r.ok) << r.to_json();
}

TEST(LineAgents, ListedPairsSatisfyTheLocationEquation) {
  auto v = small_line(2, 4, 9);
  auto agents = line_rnl_agents(v);
  const auto& part = v->partition();
  for (std::uint64_t c = 0; c < (1u << v->r()); c += 5) {
    for (std::size_t k = 0; k < v->q(); k += 3) {
      const auto rl = agents->row(part.row(c), part.shared(c), k);
      const auto cl = agents->col(part.col(c), part.shared(c), k);
      ASSERT_EQ(rl.list.size(), 4u * 4u);
      EXPECT_EQ(rl.self, cl.self);
      const auto target = v->point(v->decode(c), v->split_k(k));
      for (std::size_t i = 0; i < rl.list.size(); ++i) {
        const std::uint64_t c2 = part.join(rl.list[i].r_row, cl.list[i].r_col, rl.list[i].r_shared_row, cl.list[i].r_shared_col);
        EXPECT_EQ(v->point(v->decode(c2), v->split_k(rl.list[i].k)), target);
      }
    }
  }
}

TEST(LineAgents, DroppedEntryIsCaught) {
  class Dropping : public RnlAgents {
   public:
    explicit Dropping(AgentsPtr inner) : inner_(std::move(inner)) {}
    AgentList<RowConfig> row(std::uint64_t a, std::uint64_t s, std::size_t k) const override {
      auto l = inner_->row(a, s, k);
      if (l.self + 1 < l.list.size()) l.list.pop_back();
      return l;
    }
    AgentList<ColConfig> col(std::uint64_t a, std::uint64_t s, std::size_t k) const override {
      auto l = inner_->col(a, s, k);
      if (l.self + 1 < l.list.size()) l.list.pop_back();
      return l;
    }

   private:
    AgentsPtr inner_;
  };
  auto v = small_line(2, 2, 10);
  auto r = check_rnl(*v, Dropping(line_rnl_agents(v)));
  EXPECT_FALSE(r.ok);
  EXPECT_TRUE(r.witness.has_value());
}
