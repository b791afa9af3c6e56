#include "rectpcp/rectcsp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <stdexcept>

#include "rectpcp/lowrank_count.hpp"
#include "rectpcp/rng.hpp"

namespace rectpcp {

void Digraph::validate() const {
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].first >= n || edges[e].second >= n) {
      throw std::invalid_argument("digraph: edge " + std::to_string(e) + " has an endpoint outside [0, " + std::to_string(n) + ")");
    }
  }
}

Digraph random_digraph(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n == 0 && m > 0) throw std::invalid_argument("random_digraph: edges need vertices");
  Rng rng(seed);
  Digraph g;
  g.n = n;
  for (std::size_t e = 0; e < m; ++e) g.edges.emplace_back(rng.below(n), rng.below(n));
  return g;
}

Digraph read_digraph(std::istream& is) {
  Digraph g;
  std::size_t m = 0;
  if (!(is >> g.n >> m)) throw std::invalid_argument("digraph: expected a header line \"n m\"");
  g.edges.resize(m);
  for (std::size_t e = 0; e < m; ++e) {
    if (!(is >> g.edges[e].first >> g.edges[e].second)) {
      throw std::invalid_argument("digraph: expected " + std::to_string(m) + " edges, read " + std::to_string(e));
    }
  }
  std::string extra;
  if (is >> extra) throw std::invalid_argument("digraph: trailing content after " + std::to_string(m) + " edges");
  g.validate();
  return g;
}

void write_digraph(std::ostream& os, const Digraph& g) {
  os << g.n << ' ' << g.m() << '\n';
  for (const auto& [u, v] : g.edges) os << u << ' ' << v << '\n';
}

Digraph product_graph(const Digraph& g1, const Digraph& g2) {
  g1.validate();
  g2.validate();
  Digraph g;
  g.n = g1.n * g2.n;
  g.edges.reserve(g1.m() * g2.m());
  for (const auto& [u1, v1] : g1.edges)
    for (const auto& [u2, v2] : g2.edges) g.edges.emplace_back(u1 * g2.n + u2, v1 * g2.n + v2);
  return g;
}

BitMatrix Incidence::times(const BitMatrix& x) const {
  if (x.rows() != cols()) throw std::invalid_argument("incidence product: shape mismatch");
  BitMatrix out(rows(), x.cols());
  for (std::size_t e = 0; e < rows(); ++e) {
    const std::size_t u = endpoint(e);
    for (std::size_t c = 0; c < x.cols(); ++c)
      if (x.get(u, c)) out.set(e, c, true);
  }
  return out;
}

BitMatrix Incidence::matrix() const {
  BitMatrix out(rows(), cols());
  for (std::size_t e = 0; e < rows(); ++e) out.set(e, endpoint(e), true);
  return out;
}

ProductMaxcutInstance::ProductMaxcutInstance(Digraph a, Digraph b) : g1(std::move(a)), g2(std::move(b)) {
  g1.validate();
  g2.validate();
}

BitMatrix cut_indicator(const ProductMaxcutInstance& inst, const BitMatrix& s) {
  if (s.rows() != inst.g1.n || s.cols() != inst.g2.n) {
    throw std::invalid_argument("cut_indicator: S must be |V1| x |V2| = " + std::to_string(inst.g1.n) + " x " +
                                std::to_string(inst.g2.n));
  }
  const BitMatrix left = inst.l2().times(inst.l1().times(s).transpose()).transpose();
  const BitMatrix right = inst.r2().times(inst.r1().times(s).transpose()).transpose();
  return left ^ right;
}

std::uint64_t cut_value(const ProductMaxcutInstance& inst, const BitMatrix& s) { return cut_indicator(inst, s).weight(); }

std::uint64_t cut_value_lowrank(const ProductMaxcutInstance& inst, const BitMatrix& p, const BitMatrix& q) {
  if (p.rows() != inst.g1.n || q.cols() != inst.g2.n || p.cols() != q.rows()) {
    throw std::invalid_argument("cut_value_lowrank: need P |V1| x rho and Q rho x |V2|");
  }
  const BitMatrix pt = hconcat(inst.l1().times(p), inst.r1().times(p));
  const BitMatrix qt = vconcat(inst.l2().times(q.transpose()).transpose(), inst.r2().times(q.transpose()).transpose());
  return count_ones_bucketed(pt, qt);
}

std::uint64_t brute_cut_value(const Digraph& g, const BitVector& membership) {
  if (membership.size() != g.n) throw std::invalid_argument("brute_cut_value: membership length differs from n");
  std::uint64_t cut = 0;
  for (const auto& [u, v] : g.edges) cut += membership.get(u) != membership.get(v) ? 1 : 0;
  return cut;
}

BitVector flatten(const BitMatrix& s) {
  BitVector out(s.rows() * s.cols());
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j) out.set(i * s.cols() + j, s.get(i, j));
  return out;
}

std::string AlmostRectangularReport::to_json() const {
  nlohmann::ordered_json j;
  j["ok"] = ok;
  j["disjoint"] = disjoint;
  j["covers"] = covers;
  j["balanced"] = balanced;
  j["tau"] = tau;
  j["detail"] = detail;
  return j.dump();
}

AlmostRectangularReport check_almost_rectangular(const Digraph& g, const std::vector<std::pair<Digraph, Digraph>>& pieces) {
  g.validate();
  AlmostRectangularReport rep;
  if (pieces.empty()) {
    rep.detail = "no pieces";
    rep.disjoint = true;
    rep.covers = g.m() == 0;
    return rep;
  }
  using Edge = std::pair<std::size_t, std::size_t>;
  std::map<Edge, std::size_t> owner, counts;
  rep.disjoint = true;
  rep.balanced = true;
  const std::size_t total = g.m();
  const double side = std::sqrt(static_cast<double>(total) / static_cast<double>(pieces.size()));
  for (std::size_t j = 0; j < pieces.size(); ++j) {
    const auto& [a, b] = pieces[j];
    if (a.n * b.n != g.n) {
      rep.detail = "piece " + std::to_string(j) + " has |V1||V2| = " + std::to_string(a.n * b.n) + ", expected " + std::to_string(g.n);
      return rep;
    }
    if (a.m() != b.m() || static_cast<double>(a.m()) != side) {
      if (rep.balanced) rep.detail = "piece " + std::to_string(j) + " has factor sizes " + std::to_string(a.m()) + " and " + std::to_string(b.m());
      rep.balanced = false;
    }
    const Digraph prod = product_graph(a, b);
    std::map<Edge, std::size_t> local;
    for (const auto& e : prod.edges) {
      ++counts[e];
      if (local[e]++ > 0) continue;
      const auto [it, fresh] = owner.emplace(e, j);
      if (!fresh && rep.disjoint) {
        rep.disjoint = false;
        rep.detail = "edge (" + std::to_string(e.first) + "," + std::to_string(e.second) + ") lies in pieces " +
                     std::to_string(it->second) + " and " + std::to_string(j);
      }
    }
  }
  std::map<Edge, std::size_t> want;
  for (const auto& e : g.edges) ++want[e];
  rep.covers = want == counts;
  if (!rep.covers && rep.detail.empty()) rep.detail = "union of pieces differs from E(G)";
  rep.tau = total > 1 ? std::log(static_cast<double>(pieces.size())) / std::log(static_cast<double>(total)) : 0.0;
  rep.ok = rep.disjoint && rep.covers && rep.balanced;
  return rep;
}

}  // namespace rectpcp
