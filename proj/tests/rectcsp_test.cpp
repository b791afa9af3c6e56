#include "rectpcp/rectcsp.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "rectpcp/rng.hpp"

using namespace rectpcp;

namespace {

BitMatrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  BitMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m.set(i, j, rng.bit());
  return m;
}

// Endpoint lookup per product edge, independent of the incidence algebra.
BitMatrix direct_indicator(const Digraph& g1, const Digraph& g2, const BitMatrix& s) {
  BitMatrix out(g1.m(), g2.m());
  for (std::size_t e1 = 0; e1 < g1.m(); ++e1)
    for (std::size_t e2 = 0; e2 < g2.m(); ++e2) {
      const auto [u1, v1] = g1.edges[e1];
      const auto [u2, v2] = g2.edges[e2];
      out.set(e1, e2, s.get(u1, u2) != s.get(v1, v2));
    }
  return out;
}

}  // namespace

TEST(ProductGraph, SingleEdgeAndEmpty) {
  Digraph a{2, {{0, 1}}}, b{3, {{2, 0}}}, empty{3, {}};
  const Digraph p = product_graph(a, b);
  EXPECT_EQ(p.n, 6u);
  ASSERT_EQ(p.m(), 1u);
  EXPECT_EQ(p.edges[0].first, 2u);
  EXPECT_EQ(p.edges[0].second, 3u);
  EXPECT_EQ(product_graph(a, empty).m(), 0u);
}

TEST(ProductGraph, MembershipRule) {
  const Digraph a = random_digraph(3, 3, 1), b = random_digraph(3, 3, 2);
  const Digraph p = product_graph(a, b);
  EXPECT_EQ(p.m(), 9u);
  std::multiset<std::pair<std::size_t, std::size_t>> got(p.edges.begin(), p.edges.end()), want;
  for (std::size_t u1 = 0; u1 < 3; ++u1)
    for (std::size_t v1 = 0; v1 < 3; ++v1)
      for (std::size_t u2 = 0; u2 < 3; ++u2)
        for (std::size_t v2 = 0; v2 < 3; ++v2) {
          const auto c1 = std::count(a.edges.begin(), a.edges.end(), std::make_pair(u1, v1));
          const auto c2 = std::count(b.edges.begin(), b.edges.end(), std::make_pair(u2, v2));
          for (long i = 0; i < c1 * c2; ++i) want.emplace(u1 * 3 + u2, v1 * 3 + v2);
        }
  EXPECT_EQ(got, want);
}

TEST(CutIndicator, ConstantSetsCutNothing) {
  const ProductMaxcutInstance inst(random_digraph(4, 4, 3), random_digraph(3, 4, 4));
  EXPECT_EQ(cut_indicator(inst, BitMatrix(4, 3)).weight(), 0u);
  EXPECT_EQ(cut_indicator(inst, BitMatrix::ones(4, 3)).weight(), 0u);
  EXPECT_THROW(cut_indicator(inst, BitMatrix(3, 4)), std::invalid_argument);
}

TEST(CutIndicator, MatchesEndpointXor) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const ProductMaxcutInstance inst(random_digraph(4, 4, 10 + t), random_digraph(5, 4, 50 + t));
    const BitMatrix s = random_matrix(4, 5, rng);
    EXPECT_EQ(cut_indicator(inst, s), direct_indicator(inst.g1, inst.g2, s));
  }
}

TEST(CutIndicator, IncidenceMatricesHaveOneOnePerRow) {
  const ProductMaxcutInstance inst(random_digraph(5, 6, 7), random_digraph(4, 3, 8));
  for (const auto& inc : {inst.l1(), inst.r1(), inst.l2(), inst.r2()}) {
    const BitMatrix m = inc.matrix();
    for (std::size_t e = 0; e < m.rows(); ++e) EXPECT_EQ(m.row(e).weight(), 1u);
  }
  Rng rng(1);
  const BitMatrix s = random_matrix(5, 4, rng);
  const BitMatrix l = matmul(matmul(inst.l1().matrix(), s), inst.l2().matrix().transpose());
  const BitMatrix r = matmul(matmul(inst.r1().matrix(), s), inst.r2().matrix().transpose());
  EXPECT_EQ(cut_indicator(inst, s), l ^ r);
}

TEST(CutValue, PlantedCutOnTwoByTwo) {
  // Both factors are the 2-cycle; S picks vertex (0,0) only.
  const Digraph c2{2, {{0, 1}, {1, 0}}};
  const ProductMaxcutInstance inst(c2, c2);
  BitMatrix s(2, 2);
  s.set(0, 0, true);
  // Product edges: (00->11), (01->10), (10->01), (11->00); two touch 00.
  EXPECT_EQ(cut_value(inst, s), 2u);
  EXPECT_EQ(cut_value(inst, BitMatrix(2, 2)), 0u);
}

TEST(CutValue, LowRankTripleCrossCheck) {
  Rng rng(9);
  for (int t = 0; t < 25; ++t) {
    const ProductMaxcutInstance inst(random_digraph(6, 7, 100 + t), random_digraph(5, 6, 200 + t));
    const BitMatrix p = random_matrix(6, 2, rng), q = random_matrix(2, 5, rng);
    const BitMatrix s = matmul(p, q);
    const std::uint64_t brute = brute_cut_value(product_graph(inst.g1, inst.g2), flatten(s));
    EXPECT_EQ(cut_value(inst, s), brute);
    EXPECT_EQ(cut_value_lowrank(inst, p, q), brute);
    EXPECT_LE(rank(cut_indicator(inst, s)), 2 * rank(s));
  }
}

TEST(CutValue, ComplementSymmetry) {
  Rng rng(12);
  const ProductMaxcutInstance inst(random_digraph(4, 5, 1), random_digraph(4, 5, 2));
  for (int t = 0; t < 10; ++t) {
    const BitMatrix s = random_matrix(4, 4, rng);
    EXPECT_EQ(cut_value(inst, s), cut_value(inst, s ^ BitMatrix::ones(4, 4)));
  }
}

TEST(Digraph, FileRoundTripAndErrors) {
  const Digraph g = random_digraph(5, 7, 4);
  std::stringstream ss;
  write_digraph(ss, g);
  const Digraph h = read_digraph(ss);
  EXPECT_EQ(h.n, g.n);
  EXPECT_EQ(h.edges, g.edges);
  std::stringstream bad("3 2\n0 1\n");
  EXPECT_THROW(read_digraph(bad), std::invalid_argument);
  std::stringstream out_of_range("2 1\n0 2\n");
  EXPECT_THROW(read_digraph(out_of_range), std::invalid_argument);
}

TEST(AlmostRectangular, SingleProductPasses) {
  const Digraph a = random_digraph(3, 4, 1), b = random_digraph(2, 4, 2);
  const auto rep = check_almost_rectangular(product_graph(a, b), {{a, b}});
  EXPECT_TRUE(rep.ok) << rep.detail;
  EXPECT_DOUBLE_EQ(rep.tau, 0.0);
}

TEST(AlmostRectangular, OverlapFails) {
  const Digraph a{2, {{0, 1}}}, b{2, {{1, 0}}};
  Digraph g = product_graph(a, b);
  g.edges.push_back(g.edges[0]);
  const auto rep = check_almost_rectangular(g, {{a, b}, {a, b}});
  EXPECT_FALSE(rep.ok);
  EXPECT_FALSE(rep.disjoint);
}

TEST(AlmostRectangular, PlantedTwoPieceDecomposition) {
  // Two pieces on V1 = V2 = {0..3}, each 2 x 2 factor edges, disjoint by construction.
  const Digraph a1{4, {{0, 1}, {1, 2}}}, b1{4, {{0, 1}, {2, 3}}};
  const Digraph a2{4, {{2, 3}, {3, 0}}}, b2{4, {{1, 2}, {3, 0}}};
  Digraph g{16, {}};
  for (const auto& piece : {product_graph(a1, b1), product_graph(a2, b2)})
    g.edges.insert(g.edges.end(), piece.edges.begin(), piece.edges.end());
  Rng rng(3);
  rng.shuffle(g.edges.begin(), g.edges.end());
  const auto rep = check_almost_rectangular(g, {{a1, b1}, {a2, b2}});
  EXPECT_TRUE(rep.ok) << rep.detail;
  EXPECT_NEAR(rep.tau, std::log(2.0) / std::log(8.0), 1e-12);
  const auto unbalanced = check_almost_rectangular(product_graph(a1, Digraph{4, {{0, 1}}}), {{a1, Digraph{4, {{0, 1}}}}});
  EXPECT_FALSE(unbalanced.balanced);
}
