#include "rectpcp/rigidity.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "rectpcp/rng.hpp"

namespace rectpcp {

namespace {

// Orders coefficient vectors so that bit 0 is the most significant position.
std::uint64_t lex_key(std::uint64_t c, std::size_t rho) {
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < rho; ++i) r |= ((c >> i) & 1) << (rho - 1 - i);
  return r;
}

// All 2^rho combinations of the columns of p, indexed by coefficient mask.
std::vector<BitVector> span_of_columns(const BitMatrix& p) {
  const std::size_t rho = p.cols();
  std::vector<BitVector> cols;
  for (std::size_t c = 0; c < rho; ++c) cols.push_back(p.col(c));
  std::vector<BitVector> span(std::size_t{1} << rho, BitVector(p.rows()));
  for (std::uint64_t c = 1; c < span.size(); ++c) {
    const std::size_t low = std::countr_zero(c);
    span[c] = span[c & (c - 1)];
    span[c] ^= cols[low];
  }
  return span;
}

// Given P, picks each column of Q to minimize the distance of that column,
// breaking ties toward the lexicographically smallest Q.
LowRankWitness best_q(const BitMatrix& m, const BitMatrix& p) {
  const std::size_t rho = p.cols();
  const auto span = span_of_columns(p);
  LowRankWitness w{0, p, BitMatrix(rho, m.cols())};
  for (std::size_t j = 0; j < m.cols(); ++j) {
    const BitVector target = m.col(j);
    std::size_t best = SIZE_MAX;
    std::uint64_t best_c = 0;
    for (std::uint64_t c = 0; c < span.size(); ++c) {
      BitVector diff = span[c];
      diff ^= target;
      const std::size_t d = diff.weight();
      if (d < best || (d == best && lex_key(c, rho) < lex_key(best_c, rho))) {
        best = d;
        best_c = c;
      }
    }
    w.distance += best;
    for (std::size_t k = 0; k < rho; ++k) w.q.set(k, j, (best_c >> k) & 1);
  }
  return w;
}

// Column space of p as a sorted basis in reduced echelon form; equal keys
// mean equal column spaces.
std::vector<BitVector> column_space_key(const BitMatrix& p) {
  std::vector<BitVector> basis;
  std::vector<std::size_t> lead;
  for (std::size_t c = 0; c < p.cols(); ++c) {
    BitVector v = p.col(c);
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if (v.get(lead[i])) v ^= basis[i];
    }
    if (v.weight() == 0) continue;
    std::size_t l = 0;
    while (!v.get(l)) ++l;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      if (basis[i].get(l)) basis[i] ^= v;
    }
    basis.push_back(v);
    lead.push_back(l);
  }
  std::sort(basis.begin(), basis.end());
  return basis;
}

BitMatrix matrix_from_lex_index(std::uint64_t x, std::size_t rows, std::size_t cols) {
  BitMatrix p(rows, cols);
  const std::size_t total = rows * cols;
  for (std::size_t k = 0; k < total; ++k) {
    if ((x >> (total - 1 - k)) & 1) p.set(k / cols, k % cols, true);
  }
  return p;
}

// Given Q, re-fits each row of P against the row space of Q.
void refit_p(const BitMatrix& m, LowRankWitness& w) {
  const BitMatrix pt = best_q(m.transpose(), w.q.transpose()).q;
  w.p = pt.transpose();
}

std::size_t product_distance(const BitMatrix& m, const LowRankWitness& w) {
  return hamming_distance(m, matmul(w.p, w.q));
}

}  // namespace

LowRankWitness distance_to_rank(const BitMatrix& m, std::size_t rho) {
  if (m.rows() * rho > kRigidityExactBits || rho * m.cols() > kRigidityExactBits) {
    throw std::length_error("distance_to_rank: instance exceeds the exact-mode guard; use search_low_rank_witness");
  }
  const std::size_t bits = m.rows() * rho;
  std::set<std::vector<BitVector>> seen;
  LowRankWitness best{SIZE_MAX, {}, {}};
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << bits); ++x) {
    BitMatrix p = matrix_from_lex_index(x, m.rows(), rho);
    if (!seen.insert(column_space_key(p)).second) continue;
    LowRankWitness w = best_q(m, p);
    if (w.distance < best.distance) best = std::move(w);
  }
  if (best.distance == SIZE_MAX) best = best_q(m, BitMatrix(m.rows(), rho));
  return best;
}

bool is_rigid(const BitMatrix& m, std::size_t delta, std::size_t rho) {
  return distance_to_rank(m, rho).distance > delta;
}

LowRankWitness exact_factorization(const BitMatrix& m) {
  // Incremental basis over the columns of m, tracking each reduced vector as a
  // combination of the chosen pivot columns.
  std::vector<std::size_t> pivots;
  std::vector<BitVector> reduced;
  std::vector<std::vector<std::size_t>> combo;
  std::vector<std::size_t> lead;
  std::vector<std::vector<std::size_t>> col_combo(m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    BitVector v = m.col(j);
    std::set<std::size_t> parity;
    for (std::size_t i = 0; i < reduced.size(); ++i) {
      if (v.get(lead[i])) {
        v ^= reduced[i];
        for (std::size_t t : combo[i]) {
          if (!parity.erase(t)) parity.insert(t);
        }
      }
    }
    if (v.weight() == 0) {
      col_combo[j].assign(parity.begin(), parity.end());
      continue;
    }
    // New pivot: reduced = col_j + sum(parity).
    const std::size_t id = pivots.size();
    pivots.push_back(j);
    std::vector<std::size_t> c(parity.begin(), parity.end());
    c.push_back(id);
    std::size_t l = 0;
    while (!v.get(l)) ++l;
    reduced.push_back(v);
    combo.push_back(c);
    lead.push_back(l);
    col_combo[j] = {id};
  }
  const std::size_t r = pivots.size();
  LowRankWitness w{0, BitMatrix(m.rows(), r), BitMatrix(r, m.cols())};
  for (std::size_t k = 0; k < r; ++k) {
    for (std::size_t i = 0; i < m.rows(); ++i) w.p.set(i, k, m.get(i, pivots[k]));
  }
  for (std::size_t j = 0; j < m.cols(); ++j) {
    for (std::size_t k : col_combo[j]) w.q.flip(k, j);
  }
  return w;
}

LowRankWitness search_low_rank_witness(const BitMatrix& m, std::size_t rho, std::size_t budget,
                                       std::uint64_t seed) {
  LowRankWitness best{m.weight(), BitMatrix(m.rows(), rho), BitMatrix(rho, m.cols())};
  if (budget == 0 || rho == 0) return best;

  const std::size_t r = rank(m);
  if (r <= rho) {
    LowRankWitness f = exact_factorization(m);
    best.distance = 0;
    for (std::size_t k = 0; k < r; ++k) {
      for (std::size_t i = 0; i < m.rows(); ++i) best.p.set(i, k, f.p.get(i, k));
      for (std::size_t j = 0; j < m.cols(); ++j) best.q.set(k, j, f.q.get(k, j));
    }
    return best;
  }

  const std::size_t eff = std::min(rho, kWitnessMaxRank);
  Rng rng(seed);
  for (std::size_t restart = 0; restart < budget; ++restart) {
    BitMatrix p(m.rows(), eff);
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t k = 0; k < eff; ++k) p.set(i, k, rng.bit());
    LowRankWitness w = best_q(m, p);
    bool improved = true;
    while (improved && w.distance > 0) {
      improved = false;
      LowRankWitness alt = w;
      refit_p(m, alt);
      alt = best_q(m, alt.p);
      if (alt.distance < w.distance) {
        w = std::move(alt);
        improved = true;
        continue;
      }
      for (std::size_t i = 0; i < m.rows() && !improved; ++i) {
        for (std::size_t k = 0; k < eff && !improved; ++k) {
          BitMatrix flipped = w.p;
          flipped.flip(i, k);
          LowRankWitness cand = best_q(m, flipped);
          if (cand.distance < w.distance) {
            w = std::move(cand);
            improved = true;
          }
        }
      }
    }
    if (w.distance < best.distance) {
      best.distance = w.distance;
      best.p = BitMatrix(m.rows(), rho);
      best.q = BitMatrix(rho, m.cols());
      for (std::size_t k = 0; k < eff; ++k) {
        for (std::size_t i = 0; i < m.rows(); ++i) best.p.set(i, k, w.p.get(i, k));
        for (std::size_t j = 0; j < m.cols(); ++j) best.q.set(k, j, w.q.get(k, j));
      }
    }
    if (best.distance == 0) break;
  }
  if (product_distance(m, best) != best.distance) throw std::logic_error("search_low_rank_witness: witness mismatch");
  return best;
}

RigidityReport rigidity_report(const BitMatrix& m, std::size_t max_rho, std::size_t budget, std::uint64_t seed) {
  RigidityReport rep;
  rep.rows = m.rows();
  rep.cols = m.cols();
  rep.rank = rank(m);
  for (std::size_t rho = 0; rho <= max_rho; ++rho) {
    RigidityRow row;
    row.rho = rho;
    const bool exact = m.rows() * rho <= kRigidityExactBits && rho * m.cols() <= kRigidityExactBits;
    row.exact = exact;
    row.witness = exact ? distance_to_rank(m, rho) : search_low_rank_witness(m, rho, budget, mix64(seed + rho));
    if (!rep.table.empty() && rep.table.back().distance < row.witness.distance) {
      // A rank-(rho-1) witness padded with a zero factor is also rank <= rho.
      const LowRankWitness& prev = rep.table.back().witness;
      row.witness.distance = prev.distance;
      row.witness.p = hconcat(prev.p, BitMatrix(m.rows(), 1));
      row.witness.q = vconcat(prev.q, BitMatrix(1, m.cols()));
    }
    row.distance = row.witness.distance;
    rep.table.push_back(std::move(row));
  }
  return rep;
}

namespace {

std::vector<std::string> rows_of(const BitMatrix& m) {
  std::vector<std::string> out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::string s(m.cols(), '0');
    for (std::size_t c = 0; c < m.cols(); ++c) s[c] = m.get(r, c) ? '1' : '0';
    out.push_back(s);
  }
  return out;
}

}  // namespace

std::string RigidityReport::to_json() const {
  nlohmann::ordered_json j;
  j["rows"] = rows;
  j["cols"] = cols;
  j["rank"] = rank;
  nlohmann::ordered_json t = nlohmann::ordered_json::array();
  for (const auto& row : table) {
    nlohmann::ordered_json e;
    e["rho"] = row.rho;
    e["distance"] = row.distance;
    e["exact"] = row.exact;
    e["witness"] = {{"p", rows_of(row.witness.p)}, {"q", rows_of(row.witness.q)}};
    t.push_back(e);
  }
  j["table"] = t;
  return j.dump();
}

}  // namespace rectpcp
