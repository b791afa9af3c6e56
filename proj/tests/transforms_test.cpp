#include "rectpcp/transforms.hpp"

#include <gtest/gtest.h>

#include "rectpcp/rng.hpp"
#include "rectpcp/verifiers.hpp"

using namespace rectpcp;

namespace {

std::shared_ptr<const Decision> table(std::size_t arity, bool (*f)(std::uint64_t)) {
  std::vector<std::uint8_t> tt(std::size_t{1} << arity);
  for (std::uint64_t a = 0; a < tt.size(); ++a) tt[a] = f(a) ? 1 : 0;
  return std::make_shared<TableDecision>(std::move(tt));
}

std::shared_ptr<const Predicate> equal_pair() {
  return std::make_shared<Predicate>(table(2, [](std::uint64_t a) { return (a & 1) == (a >> 1); }), 2,
                                     std::vector<ParityCheck>{});
}

std::shared_ptr<const Predicate> xor_pair() {
  return std::make_shared<Predicate>(table(2, [](std::uint64_t a) { return ((a ^ (a >> 1)) & 1) != 0; }), 2,
                                     std::vector<ParityCheck>{});
}

std::shared_ptr<const Predicate> pairs_equal4() {
  return std::make_shared<Predicate>(
      table(4, [](std::uint64_t a) { return (a & 1) == ((a >> 1) & 1) && ((a >> 2) & 1) == ((a >> 3) & 1); }), 4,
      std::vector<ParityCheck>{});
}

Proof random_proof(std::uint64_t m, Rng& rng) {
  Proof p(m);
  for (auto& b : p) b = rng.bit() ? 1 : 0;
  return p;
}

Proof from_bits(std::uint64_t bits, std::uint64_t m) {
  Proof p(m);
  for (std::uint64_t i = 0; i < m; ++i) p[i] = (bits >> i) & 1;
  return p;
}

struct SmoothCase {
  std::shared_ptr<ShiftVerifier> base;
  Transformed out;
};

SmoothCase smooth_case(std::size_t q, std::shared_ptr<const Predicate> pred, const Rational& mu, std::uint64_t seed = 7) {
  ShiftOptions o;
  o.a_row = 2;
  o.a_col = 2;
  o.r_shared_row = 1;
  o.r_shared_col = 1;
  o.q = q;
  o.predicate = std::move(pred);
  o.seed = seed;
  auto v = shift_verifier(o);
  return {v, smoothify(v, shift_rnl_agents(v), mu)};
}

}  // namespace

TEST(ShiftToy, PlantedRnlHolds) {
  ShiftOptions o;
  o.a_row = 2;
  o.a_col = 1;
  o.r_shared_row = 1;
  o.r_shared_col = 1;
  o.q = 3;
  auto v = shift_verifier(o);
  EXPECT_TRUE(check_rnl(*v, *shift_rnl_agents(v)).ok);
  EXPECT_TRUE(check_rop(*v).ok);
  EXPECT_EQ(v->m(), 8u);
}

TEST(ZeroRop, ConstantSharedParitiesPass) {
  ShiftOptions o;
  o.r_shared_row = 1;
  o.q = 4;
  o.predicate = pairs_equal4();
  auto v = shift_verifier(o);
  auto code = std::make_shared<LinearCode>(LinearCode::random_systematic(3, 4, 3));
  auto t = add_rop(v, shift_rnl_agents(v), code);
  EXPECT_TRUE(check_zero_rop(*t.verifier).ok);
}

TEST(Smoothify, SmoothRectangularAndRop) {
  const auto c = smooth_case(2, equal_pair(), Rational{1, 2});
  const auto& sv = dynamic_cast<const SmoothVerifier&>(*c.out.verifier);
  EXPECT_TRUE(measure_smoothness(sv).smooth);
  EXPECT_TRUE(check_rectangular(sv).ok);
  EXPECT_TRUE(check_rop(sv).ok);
  EXPECT_TRUE(sv.info().smooth);
}

TEST(Smoothify, ParametersFollowTheSampler) {
  const Rational mu{1, 2};
  const auto c = smooth_case(4, pairs_equal4(), mu);
  const auto& sv = dynamic_cast<const SmoothVerifier&>(*c.out.verifier);
  EXPECT_EQ(sv.list_size(), 4u * 4u);
  ASSERT_TRUE(sv.sampler().has_value());
  EXPECT_TRUE(sv.sampler()->is_complete());
  EXPECT_EQ(sv.delta(), sv.list_size());
  EXPECT_EQ(sv.q(), 4 * sv.delta());
  EXPECT_EQ(sv.info().soundness, c.base->info().soundness + mu);
  EXPECT_EQ(sv.info().ell * sv.info().ell, sv.m());
  EXPECT_EQ(sv.r(), c.base->r() + sv.pad_row() + sv.pad_col());
  EXPECT_EQ(sv.info().partition.r_shared(), c.base->partition().r_shared());
}

TEST(Smoothify, HonestProofStaysAccepted) {
  for (std::size_t q : {2, 4}) {
    const auto c = smooth_case(q, q == 2 ? equal_pair() : pairs_equal4(), Rational{1, 4});
    for (std::uint32_t b : {0u, 1u}) {
      const Proof p(c.base->m(), b);
      ASSERT_EQ(emulate(*c.base, p), 1);
      EXPECT_EQ(emulate(*c.out.verifier, c.out.transform(p)), 1) << "q=" << q;
    }
  }
}

TEST(Smoothify, InconsistentBlockIsRejected) {
  const auto c = smooth_case(2, equal_pair(), Rational{1, 2});
  Proof p = c.out.transform(Proof(c.base->m(), 0));
  std::vector<std::uint64_t> loc = c.out.verifier->queries(0);
  p[loc[1]] ^= 1;
  EXPECT_FALSE(c.out.verifier->accepts(p, 0));
  EXPECT_LT(emulate(*c.out.verifier, p), 1);
}

TEST(Smoothify, SoundnessBoundOnRandomAndGreedyProofs) {
  const Rational mu{1, 4};
  // Seed 1 makes the XOR constraints contradictory.
  const auto c = smooth_case(2, xor_pair(), mu, 1);
  const Rational s = exhaustive_max_acceptance(*c.base, 16).best;
  ASSERT_EQ(s, Rational(3, 4));
  const Rational bound = s + mu;
  const Verifier& sv = *c.out.verifier;
  Rng rng(11);
  for (int t = 0; t < 200; ++t) EXPECT_LE(emulate(sv, random_proof(sv.m(), rng)), bound);
  for (int t = 0; t < 5; ++t) {
    Proof p = random_proof(sv.m(), rng);
    Rational cur = emulate(sv, p);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::uint64_t i = 0; i < sv.m(); ++i) {
        p[i] ^= 1;
        const Rational nxt = emulate(sv, p);
        if (nxt > cur)
          cur = nxt;
        else
          p[i] ^= 1;
      }
    }
    EXPECT_LE(cur, bound);
  }
}

TEST(Smoothify, RejectsUnsupportedInputs) {
  ShiftOptions o;
  o.q = 3;
  o.predicate = std::make_shared<Predicate>(table(3, [](std::uint64_t) { return true; }), 3, std::vector<ParityCheck>{});
  auto v = shift_verifier(o);
  EXPECT_THROW(smoothify(v, shift_rnl_agents(v), Rational{1, 2}), std::invalid_argument);
  auto blr = blr_verifier(2);
  EXPECT_THROW(smoothify(blr, std::make_shared<IdentityAgents>(blr->partition()), Rational{1, 2}), PreconditionError);
  o.q = 2;
  o.predicate = nullptr;
  v = shift_verifier(o);
  EXPECT_THROW(smoothify(v, shift_rnl_agents(v), Rational{0}), std::invalid_argument);
}

TEST(AlphabetReduce, AcceptanceEqualOnEveryProof) {
  ShiftOptions o;
  o.r_shared_row = 1;
  o.q = 2;
  o.predicate = equal_pair();
  auto v = shift_verifier(o);
  auto code = std::make_shared<LinearCode>(BitMatrix::from_rows({"111"}));
  auto t = alphabet_reduce(v, shift_rnl_agents(v), code);
  EXPECT_EQ(t.verifier->q(), 6u);
  EXPECT_EQ(t.verifier->m(), 3 * v->m());
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << v->m()); ++bits) {
    const Proof p = from_bits(bits, v->m());
    EXPECT_EQ(emulate(*v, p), emulate(*t.verifier, t.transform(p)));
  }
  EXPECT_TRUE(check_rnl(*t.verifier, *t.agents).ok);
  Proof bad = t.transform(Proof(v->m(), 0));
  bad[1] ^= 1;
  EXPECT_LT(emulate(*t.verifier, bad), 1);
}

TEST(AlphabetReduce, NeedsMatchingSystematicCode) {
  auto v = shift_verifier({});
  EXPECT_THROW(alphabet_reduce(v, nullptr, std::make_shared<LinearCode>(BitMatrix::from_rows({"110", "011"}))),
               std::invalid_argument);
  EXPECT_THROW(alphabet_reduce(v, nullptr, std::make_shared<LinearCode>(BitMatrix::from_rows({"011"}))), std::invalid_argument);
}

TEST(AddRop, RopAndExactAcceptance) {
  ShiftOptions o;
  o.r_shared_row = 1;
  o.q = 4;
  o.predicate = pairs_equal4();
  o.seed = 5;
  auto v = shift_verifier(o);
  auto code = std::make_shared<LinearCode>(LinearCode::random_systematic(3, 4, 9));
  auto t = add_rop(v, shift_rnl_agents(v), code);
  EXPECT_EQ(t.verifier->info().p, 4u);
  EXPECT_TRUE(check_rop(*t.verifier).ok);
  EXPECT_TRUE(check_rnl(*t.verifier, *t.agents).ok);
  for (std::uint64_t bits = 0; bits < 16; ++bits) {
    const Proof p = from_bits(bits, v->m());
    EXPECT_EQ(emulate(*v, p), emulate(*t.verifier, p));
  }
}

TEST(AddRop, ParitiesEncodeTheCoins) {
  ShiftOptions o;
  o.r_shared_row = 1;
  o.q = 4;
  o.predicate = pairs_equal4();
  auto v = shift_verifier(o);
  auto code = std::make_shared<LinearCode>(LinearCode::random_systematic(3, 4, 4));
  auto t = add_rop(v, nullptr, code);
  const auto& part = t.verifier->partition();
  for (std::uint64_t c = 0; c < 8; ++c) {
    const auto pred = t.verifier->predicate(c);
    const BitVector enc = code->encode(BitVector::from_uint(c, 3));
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(pred->parities()[i].eval(part.obliv(c)), enc.get(i));
  }
}

TEST(AddRop, NonCodewordParitiesReject) {
  ShiftOptions o;
  o.q = 2;
  o.predicate = constant_predicate(true, 2);
  auto v = shift_verifier(o);
  auto code = std::make_shared<LinearCode>(BitMatrix::from_rows({"1100", "0011"}));
  ShiftOptions o4 = o;
  o4.q = 4;
  o4.predicate = constant_predicate(true, 4);
  auto v4 = shift_verifier(o4);
  auto t = add_rop(v4, nullptr, code);
  const auto pred = t.verifier->predicate(0);
  BitVector in(8);
  EXPECT_TRUE(pred->eval(in));
  in.set(4, true);
  EXPECT_FALSE(pred->eval(in));
  EXPECT_THROW(add_rop(v, nullptr, code), std::invalid_argument);
}

TEST(Quadratic, AssignmentSatisfiesExactlyTheAcceptedInputs) {
  Rng rng(21);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 1 + t % 4;
    std::vector<std::uint8_t> tt(std::size_t{1} << n);
    for (auto& b : tt) b = rng.bit();
    if (t % 5 == 0) std::fill(tt.begin(), tt.end(), 0);
    TableDecision d(tt);
    QuadraticSystem sys;
    try {
      sys = QuadraticSystem::from_decision(d);
    } catch (const std::length_error&) {
      continue;
    }
    for (std::uint64_t a = 0; a < tt.size(); ++a) EXPECT_EQ(sys.satisfied(sys.assign(a)), tt[a] != 0) << "t=" << t;
  }
}

TEST(Quadratic, AffineSetsNeedNoProducts) {
  const auto parity = table(3, [](std::uint64_t a) { return (std::popcount(a) & 1) == 1; });
  const auto sys = QuadraticSystem::from_decision(*parity);
  EXPECT_TRUE(sys.products.empty());
  EXPECT_TRUE(sys.tensor.empty());
  EXPECT_EQ(sys.constraints.size(), 1u);
}

TEST(Hadamard, HonestProofsAccepted) {
  const auto d = table(3, [](std::uint64_t a) { return ((a & 1) && ((a >> 1) & 1)) || ((a >> 2) & 1); });
  auto h = hadamard_pcpp(*d);
  EXPECT_EQ(h->info().q, HadamardPcpp::kQueries);
  for (std::uint64_t a = 0; a < 8; ++a) {
    if (!d->eval(BitVector::from_uint(a, 3))) continue;
    const BitVector x = BitVector::from_uint(a, 3);
    Rng rng(a);
    for (int t = 0; t < 500; ++t) {
      const std::uint64_t c = rng.next() & RandomnessPartition::mask(h->info().r);
      ASSERT_TRUE(h->accepts(x, h->prove(x), c));
    }
  }
}

TEST(Hadamard, ExhaustiveSoundnessOnSmallCircuit) {
  const auto d = table(2, [](std::uint64_t a) { return ((a ^ (a >> 1)) & 1) == 1; });
  auto h = hadamard_pcpp(*d);
  ASSERT_LE(h->info().proof_length, 12u);
  for (std::uint64_t a : {0u, 3u}) {
    const BitVector x = BitVector::from_uint(a, 2);
    Rational worst = 0;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << h->info().proof_length); ++bits)
      worst = std::max(worst, h->acceptance(x, from_bits(bits, h->info().proof_length)));
    EXPECT_LE(worst, h->info().soundness);
  }
}

TEST(Hadamard, GuardsOnTensorWidth) {
  const auto d = table(5, [](std::uint64_t a) {
    return ((a & 1) && ((a >> 1) & 1)) != (((a >> 2) & 1) && ((a >> 3) & 1) && ((a >> 4) & 1));
  });
  EXPECT_THROW(hadamard_pcpp(*d), std::length_error);
}

namespace {

struct ComposeCase {
  Transformed outer;
  std::shared_ptr<HadamardPcpp> inner;
  Transformed out;
};

ComposeCase compose_case() {
  ShiftOptions o;
  o.a_row = 1;
  o.a_col = 0;
  o.r_shared_row = 1;
  o.q = 2;
  o.predicate = equal_pair();
  o.robustness = Rational{1, 2};
  o.soundness = Rational{1, 2};
  auto v = shift_verifier(o);
  auto code = std::make_shared<LinearCode>(BitMatrix::identity(2));
  ComposeCase c;
  c.outer = add_rop(v, shift_rnl_agents(v), code);
  c.inner = hadamard_pcpp(c.outer.verifier->predicate(0)->decision());
  c.out = compose(c.outer.verifier, c.outer.agents, c.inner);
  return c;
}

}  // namespace

TEST(Compose, Bookkeeping) {
  const auto c = compose_case();
  const auto& o = c.outer.verifier->info();
  const auto& n = c.out.verifier->info();
  EXPECT_EQ(n.r, o.r + c.inner->info().r);
  EXPECT_EQ(n.q, HadamardPcpp::kQueries);
  EXPECT_EQ(n.p, o.p);
  EXPECT_EQ(n.m, o.m + (std::uint64_t{1} << o.r) * c.inner->info().proof_length);
  EXPECT_EQ(n.soundness, o.soundness + c.inner->info().soundness);
  EXPECT_EQ(n.partition.r_row, o.partition.r_row);
  EXPECT_EQ(n.partition.r_col, o.partition.r_col);
}

TEST(Compose, RnlAndRopHold) {
  const auto c = compose_case();
  EXPECT_TRUE(check_rop(*c.out.verifier).ok);
  const auto rnl = check_rnl(*c.out.verifier, *c.out.agents);
  EXPECT_TRUE(rnl.ok) << rnl.detail;
}

TEST(Compose, HonestProofAccepted) {
  const auto c = compose_case();
  for (std::uint32_t b : {0u, 1u}) {
    const Proof p(c.outer.verifier->m(), b);
    ASSERT_EQ(emulate(*c.outer.verifier, p), 1);
    EXPECT_EQ(emulate(*c.out.verifier, c.out.transform(p)), 1);
  }
}

TEST(Compose, PreconditionsAreEnforced) {
  auto c = compose_case();
  ComposeOptions bad;
  bad.threshold = 1;
  EXPECT_THROW(compose(c.outer.verifier, c.outer.agents, c.inner, bad), std::invalid_argument);
  HadamardOptions far;
  far.delta = Rational{3, 4};
  auto inner = hadamard_pcpp(c.outer.verifier->predicate(0)->decision(), far);
  EXPECT_THROW(compose(c.outer.verifier, c.outer.agents, inner, {}), PreconditionError);
  auto other = hadamard_pcpp(*table(4, [](std::uint64_t a) { return (a & 1) == 0; }));
  EXPECT_THROW(compose(c.outer.verifier, c.outer.agents, other, {}), std::invalid_argument);
}
