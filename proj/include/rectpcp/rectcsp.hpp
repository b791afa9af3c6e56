#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rectpcp/f2_linalg.hpp"

namespace rectpcp {

// Edge list is a multiset; parallel edges are allowed.
struct Digraph {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;

  std::size_t m() const { return edges.size(); }
  void validate() const;
};

Digraph random_digraph(std::size_t n, std::size_t m, std::uint64_t seed);

// "n m" then m lines "u v".
Digraph read_digraph(std::istream& is);
void write_digraph(std::ostream& os, const Digraph& g);

// Vertex (u1, u2) is u1 * n2 + u2; edge (e1, e2) is e1 * m2 + e2.
Digraph product_graph(const Digraph& g1, const Digraph& g2);

// Incidence rows have a single 1, so the matrix is only materialized on request.
class Incidence {
 public:
  enum class Side { kTail, kHead };
  Incidence(const Digraph& g, Side side) : g_(&g), side_(side) {}
  std::size_t rows() const { return g_->m(); }
  std::size_t cols() const { return g_->n; }
  std::size_t endpoint(std::size_t e) const { return side_ == Side::kTail ? g_->edges[e].first : g_->edges[e].second; }
  // Row e of this matrix times x: row endpoint(e) of x.
  BitMatrix times(const BitMatrix& x) const;
  BitMatrix matrix() const;

 private:
  const Digraph* g_;
  Side side_;
};

struct ProductMaxcutInstance {
  Digraph g1, g2;

  ProductMaxcutInstance(Digraph a, Digraph b);
  Incidence l1() const { return {g1, Incidence::Side::kTail}; }
  Incidence r1() const { return {g1, Incidence::Side::kHead}; }
  Incidence l2() const { return {g2, Incidence::Side::kTail}; }
  Incidence r2() const { return {g2, Incidence::Side::kHead}; }
};

// M(S) = L1 S L2^T + R1 S R2^T, an |E1| x |E2| matrix.
BitMatrix cut_indicator(const ProductMaxcutInstance& inst, const BitMatrix& s);
std::uint64_t cut_value(const ProductMaxcutInstance& inst, const BitMatrix& s);
// Cut value of S = P Q through the rank-2rho factorization [L1 P | R1 P] [Q L2^T ; Q R2^T].
std::uint64_t cut_value_lowrank(const ProductMaxcutInstance& inst, const BitMatrix& p, const BitMatrix& q);
std::uint64_t brute_cut_value(const Digraph& g, const BitVector& membership);
// S as a membership vector of the product graph.
BitVector flatten(const BitMatrix& s);

struct AlmostRectangularReport {
  bool ok = false;
  bool disjoint = false;
  bool covers = false;     // multiset union equals E(G)
  bool balanced = false;   // |E(G1^j)| = |E(G2^j)| = sqrt(m / pieces) for every piece
  double tau = 0;          // log(pieces) / log(m)
  std::string detail;
  std::string to_json() const;
};

// Pieces are product graphs on the common vertex set V1 x V2 of G.
AlmostRectangularReport check_almost_rectangular(const Digraph& g, const std::vector<std::pair<Digraph, Digraph>>& pieces);

}  // namespace rectpcp
