#include "rectpcp/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "rectpcp/lowrank_count.hpp"
#include "rectpcp/rigidity.hpp"
#include "rectpcp/rng.hpp"
#include "rectpcp/transforms.hpp"

namespace rectpcp {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t since(Clock::time_point t0) {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());
}

void require_matrix_verifier(const Verifier& v, const std::string& what) {
  const auto& info = v.info();
  if (info.sigma != 1) throw std::invalid_argument(what + ": needs a Boolean alphabet");
  if (info.ell == 0 || info.ell * info.ell != info.m) throw std::invalid_argument(what + ": proof is not an ell x ell matrix");
  if (!v.full_coin_space()) throw std::invalid_argument(what + ": needs the full coin space");
  if (v.r() > kEnumMaxCoins) throw std::length_error(what + ": randomness exceeds the enumeration guard");
}

BitMatrix from_bits(std::uint64_t bits, std::size_t rows, std::size_t cols) {
  BitMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m.set(i, j, (bits >> (i * cols + j)) & 1);
  return m;
}

std::uint64_t to_bits(const BitMatrix& m) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) bits |= static_cast<std::uint64_t>(m.get(i, j)) << (i * m.cols() + j);
  return bits;
}

nlohmann::ordered_json matrix_json(const BitMatrix& m) {
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(m.row(i).to_string());
  return rows;
}

class IdentityToy : public Verifier {
 public:
  IdentityToy(std::size_t a, const Rational& soundness) : Verifier(make_info(a, soundness)), a_(a) {
    std::vector<ParityCheck> par(a);
    for (std::size_t i = 0; i < a; ++i) par[i] = {(std::uint64_t{1} << i) | (std::uint64_t{1} << (a + i)), true};
    std::vector<std::uint8_t> tt(std::size_t{1} << (1 + a));
    for (std::uint64_t x = 0; x < tt.size(); ++x) tt[x] = (x & 1) == ((x >> 1) == RandomnessPartition::mask(a) ? 1u : 0u);
    pred_ = std::make_shared<Predicate>(std::make_shared<TableDecision>(std::move(tt)), 1, std::move(par), 1 + a);
  }
  using Verifier::queries;
  void queries(std::uint64_t coins, std::uint64_t* out) const override {
    out[0] = (coins & RandomnessPartition::mask(a_)) * info_.ell + (coins >> a_);
  }
  std::shared_ptr<const Predicate> predicate(std::uint64_t) const override { return pred_; }

 private:
  static VerifierInfo make_info(std::size_t a, const Rational& soundness) {
    if (a == 0 || a > 8) throw std::invalid_argument("identity_toy: need 1 <= a <= 8");
    VerifierInfo info;
    info.name = "identity" + std::to_string(std::size_t{1} << a);
    info.r = 2 * a;
    info.q = 1;
    info.p = a;
    info.ell = std::uint64_t{1} << a;
    info.m = info.ell * info.ell;
    info.partition = {a, a, 0, 0};
    info.soundness = soundness;
    info.smooth = true;
    info.decision_size = 1 + a;
    return info;
  }
  std::size_t a_;
  std::shared_ptr<const Predicate> pred_;
};

}  // namespace

BitMatrix proof_matrix(const Verifier& v, const Proof& proof) {
  const std::uint64_t ell = v.info().ell;
  if (ell == 0 || ell * ell != proof.size()) throw std::invalid_argument("proof_matrix: proof is not ell x ell");
  BitMatrix m(ell, ell);
  for (std::uint64_t i = 0; i < proof.size(); ++i) m.set(i / ell, i % ell, proof[i] & 1);
  return m;
}

Proof matrix_proof(const BitMatrix& m) {
  Proof p(m.rows() * m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) p[i * m.cols() + j] = m.get(i, j) ? 1 : 0;
  return p;
}

bool fnp_machine(const Verifier& v, const Proof& proof) {
  if (v.r() > kEnumMaxCoins) throw std::length_error("fnp_machine: randomness exceeds the enumeration guard");
  if (proof.size() != v.m()) throw std::invalid_argument("fnp_machine: proof length mismatch");
  for (std::uint64_t c = 0; c < (std::uint64_t{1} << v.r()); ++c)
    if (v.coin_valid(c) && !v.accepts(proof, c)) return false;
  return true;
}

std::string PipelineReport::to_json(bool timings) const {
  nlohmann::ordered_json j;
  j["schema"] = "rectpcp.pipeline/1";
  j["input"] = input;
  j["rho"] = rho;
  auto per = nlohmann::ordered_json::array();
  for (const auto& x : per_shared) per.push_back(to_string(x));
  j["per_shared"] = per;
  j["total"] = to_string(total);
  j["threshold"] = to_string(threshold);
  j["accept"] = accept;
  if (timings) {
    j["timing_ns"] = {{"predicates", ns_predicates}, {"queries", ns_queries}, {"parities", ns_parities}, {"counting", ns_counting}};
  }
  return j.dump();
}

PipelineReport refuter_report(const Verifier& v, const BitMatrix& p, const BitMatrix& q, const Rational& threshold,
                              RefuterOptions opts) {
  require_matrix_verifier(v, "refuter");
  const auto& info = v.info();
  const auto& part = v.partition();
  if (p.rows() != info.ell || q.cols() != info.ell || p.cols() != q.rows()) {
    throw std::invalid_argument("refuter: need P ell x rho and Q rho x ell with ell = " + std::to_string(info.ell));
  }
  if (part.r_row != part.r_col) throw std::invalid_argument("refuter: row and column coin counts differ");
  if (info.q + info.p > kFourierMaxArity) throw std::length_error("refuter: q + p exceeds the Fourier guard");
  if (opts.verify) {
    CheckResult rect = check_rectangular(v);
    if (!rect.ok) throw PreconditionError("refuter: verifier is not rectangular", rect);
    CheckResult rop = check_rop(v);
    if (!rop.ok) throw PreconditionError("refuter: verifier is not ROP", rop);
  }

  const std::size_t half = part.r_row, qn = info.q, rho = p.cols();
  const std::uint64_t side = std::uint64_t{1} << half;
  const std::uint64_t shared_count = std::uint64_t{1} << part.r_shared();
  PipelineReport rep;
  rep.input = info.name;
  rep.rho = rho;
  rep.threshold = threshold;
  rep.per_shared.assign(shared_count, Rational(0));

  std::mutex mu;
  std::map<const Decision*, std::pair<std::shared_ptr<const Decision>, FourierTable>> fourier_cache;
  std::atomic<std::uint64_t> next{0}, t_pred{0}, t_query{0}, t_par{0}, t_count{0};
  std::exception_ptr error;

  auto work = [&] {
    std::vector<std::uint64_t> loc(qn);
    for (;;) {
      const std::uint64_t sh = next.fetch_add(1);
      if (sh >= shared_count) return;
      try {
        auto t0 = Clock::now();
        const auto pred = v.predicate(part.join_shared(0, 0, sh));
        const FourierTable* f = nullptr;
        {
          std::lock_guard<std::mutex> lock(mu);
          auto it = fourier_cache.find(&pred->decision());
          if (it == fourier_cache.end())
            it = fourier_cache.emplace(&pred->decision(), std::make_pair(pred->decision_ptr(), fourier(pred->truth_table()))).first;
          f = &it->second.second;
        }
        t_pred += since(t0);

        t0 = Clock::now();
        std::vector<BitMatrix> left(qn + pred->p()), right(qn + pred->p());
        for (std::size_t k = 0; k < qn; ++k) {
          left[k] = BitMatrix(side, rho);
          right[k] = BitMatrix(rho, side);
        }
        for (std::uint64_t x = 0; x < side; ++x) {
          v.queries(part.join_shared(x, 0, sh), loc.data());
          for (std::size_t k = 0; k < qn; ++k) {
            const std::size_t row = static_cast<std::size_t>(loc[k] / info.ell);
            for (std::size_t t = 0; t < rho; ++t) left[k].set(x, t, p.get(row, t));
          }
          v.queries(part.join_shared(0, x, sh), loc.data());
          for (std::size_t k = 0; k < qn; ++k) {
            const std::size_t col = static_cast<std::size_t>(loc[k] % info.ell);
            for (std::size_t t = 0; t < rho; ++t) right[k].set(t, x, q.get(t, col));
          }
        }
        t_query += since(t0);

        t0 = Clock::now();
        for (std::size_t j = 0; j < pred->p(); ++j) {
          const ParityCheck& pc = pred->parities()[j];
          const auto f3 = affine_to_rank3(half, BitVector::from_uint(pc.coeff & RandomnessPartition::mask(half), half),
                                          BitVector::from_uint(pc.coeff >> half, half), pc.constant);
          left[qn + j] = f3.a;
          right[qn + j] = f3.b;
        }
        t_par += since(t0);

        t0 = Clock::now();
        rep.per_shared[sh] = acceptance_probability(*f, left, right);
        t_count += since(t0);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        next = shared_count;
        return;
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(opts.threads, static_cast<unsigned>(shared_count)));
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  Rational sum = 0;
  for (const auto& x : rep.per_shared) sum += x;
  rep.total = sum / Rational(BigInt(shared_count));
  rep.accept = rep.total >= threshold;
  rep.ns_predicates = t_pred;
  rep.ns_queries = t_query;
  rep.ns_parities = t_par;
  rep.ns_counting = t_count;
  return rep;
}

Rational refuter_acceptance(const Verifier& v, const BitMatrix& p, const BitMatrix& q, RefuterOptions opts) {
  return refuter_report(v, p, q, 1, opts).total;
}

std::string DecideResult::to_json() const {
  nlohmann::ordered_json j;
  j["accept"] = accept;
  j["best"] = to_string(best);
  j["evaluated"] = evaluated;
  j["exhaustive"] = exhaustive;
  j["p"] = matrix_json(p);
  j["q"] = matrix_json(q);
  return j.dump();
}

DecideResult decide(const Verifier& v, std::size_t rho, const Rational& s, DecideOptions opts) {
  require_matrix_verifier(v, "decide");
  if (rho == 0) throw std::invalid_argument("decide: rho must be positive");
  const std::size_t ell = static_cast<std::size_t>(v.info().ell);
  {
    RefuterOptions check;
    check.verify = true;
    refuter_report(v, BitMatrix(ell, rho), BitMatrix(rho, ell), s, check);
  }
  RefuterOptions fast;
  fast.verify = false;
  fast.threads = opts.threads;

  DecideResult res;
  res.p = BitMatrix(ell, rho);
  res.q = BitMatrix(rho, ell);
  bool have = false;
  std::unordered_map<std::uint64_t, Rational> memo;
  const bool memoize = ell * ell <= 64;
  auto consider = [&](const BitMatrix& a, const BitMatrix& b) {
    Rational acc;
    if (memoize) {
      const std::uint64_t key = to_bits(matmul(a, b));
      auto it = memo.find(key);
      if (it == memo.end()) it = memo.emplace(key, refuter_acceptance(v, a, b, fast)).first;
      acc = it->second;
    } else {
      acc = refuter_acceptance(v, a, b, fast);
    }
    ++res.evaluated;
    if (!have || acc > res.best) {
      have = true;
      res.best = acc;
      res.p = a;
      res.q = b;
    }
  };

  if (opts.mode == SearchMode::kExhaustive) {
    res.exhaustive = true;
    const std::size_t pair_bits = 2 * ell * rho, matrix_bits = ell * ell;
    if (std::min(pair_bits, matrix_bits) > kDecideMaxEnumBits) {
      throw std::length_error("decide: exhaustive search over " + std::to_string(std::min(pair_bits, matrix_bits)) +
                              " bits exceeds the guard of " + std::to_string(kDecideMaxEnumBits));
    }
    if (pair_bits <= matrix_bits) {
      const std::size_t fb = ell * rho;
      for (std::uint64_t x = 0; x < (std::uint64_t{1} << fb); ++x) {
        const BitMatrix a = from_bits(x, ell, rho);
        for (std::uint64_t y = 0; y < (std::uint64_t{1} << fb); ++y) consider(a, from_bits(y, rho, ell));
      }
    } else {
      for (std::uint64_t x = 0; x < (std::uint64_t{1} << matrix_bits); ++x) {
        const BitMatrix m = from_bits(x, ell, ell);
        if (rank(m) > rho) continue;
        const LowRankWitness w = exact_factorization(m);
        BitMatrix a(ell, rho), b(rho, ell);
        for (std::size_t t = 0; t < w.p.cols(); ++t)
          for (std::size_t i = 0; i < ell; ++i) {
            a.set(i, t, w.p.get(i, t));
            b.set(t, i, w.q.get(t, i));
          }
        consider(a, b);
      }
    }
  } else {
    Rng rng(opts.seed);
    for (std::size_t t = 0; t < opts.budget; ++t) {
      BitMatrix a(ell, rho), b(rho, ell);
      for (std::size_t i = 0; i < ell; ++i)
        for (std::size_t j = 0; j < rho; ++j) {
          a.set(i, j, rng.bit());
          b.set(j, i, rng.bit());
        }
      consider(a, b);
    }
  }
  res.accept = have && res.best >= s;
  return res;
}

std::string RigidExtractReport::outcome() const {
  if (!consistent) return "inconsistent";
  if (any_close) return "close-accepted-proof";
  if (accepted.empty()) return "no-accepted-proof";
  return decision.accept ? "all-rigid-low-rank-accepts" : "all-rigid";
}

std::string RigidExtractReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "rectpcp.rigid_extract/1";
  j["rho"] = rho;
  j["s"] = to_string(s);
  j["threshold"] = to_string(threshold);
  auto list = nlohmann::ordered_json::array();
  for (const auto& e : accepted) {
    nlohmann::ordered_json x;
    x["matrix"] = matrix_json(e.matrix);
    x["distance"] = e.distance;
    x["rigid"] = e.rigid;
    list.push_back(x);
  }
  j["accepted"] = list;
  j["any_close"] = any_close;
  j["decide"] = nlohmann::ordered_json::parse(decision.to_json());
  j["consistent"] = consistent;
  j["outcome"] = outcome();
  return j.dump();
}

RigidExtractReport rigid_extract(const Verifier& v, std::size_t rho, const Rational& s, DecideOptions opts) {
  require_matrix_verifier(v, "rigid_extract");
  if (v.m() > kExtractMaxProofBits) {
    throw std::length_error("rigid_extract: " + std::to_string(v.m()) + " proof bits exceed the guard of " +
                            std::to_string(kExtractMaxProofBits));
  }
  RigidExtractReport rep;
  rep.rho = rho;
  rep.s = s;
  rep.threshold = (1 - s) / Rational(BigInt(v.q())) * Rational(BigInt(v.m()));
  const std::size_t ell = static_cast<std::size_t>(v.info().ell);
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << v.m()); ++bits) {
    const BitMatrix m = from_bits(bits, ell, ell);
    if (!fnp_machine(v, matrix_proof(m))) continue;
    ExtractedProof e;
    e.matrix = m;
    e.distance = distance_to_rank(m, rho).distance;
    e.rigid = Rational(BigInt(e.distance)) > rep.threshold;
    rep.any_close = rep.any_close || !e.rigid;
    rep.accepted.push_back(std::move(e));
  }
  rep.decision = decide(v, rho, s, opts);
  rep.consistent = !rep.any_close || rep.decision.accept;
  return rep;
}

std::string ParameterReport::to_json() const {
  nlohmann::ordered_json j;
  j["budget"] = budget;
  j["lhs1"] = lhs1;
  j["lhs2"] = lhs2;
  j["cond1"] = cond1;
  j["cond2"] = cond2;
  return j.dump();
}

ParameterReport parameter_check(const ParameterInputs& in) {
  if (in.n <= 1) throw std::invalid_argument("parameter_check: n must exceed 1");
  if (in.tau < 0 || in.tau > 1) throw std::invalid_argument("parameter_check: tau must lie in [0, 1]");
  if (in.t + in.rho <= 0 || (in.q + in.p) * in.rho <= 1) throw std::invalid_argument("parameter_check: logs of non-positive values");
  ParameterReport rep;
  rep.budget = in.n - std::log2(in.n);
  rep.lhs1 = (1 + in.tau) / 2 * in.r + std::log2(in.t + in.rho);
  rep.lhs2 = in.q + in.p + in.r - in.omega * (1 - in.tau) * in.r / std::log2((in.q + in.p) * in.rho);
  rep.cond1 = rep.lhs1 <= rep.budget;
  rep.cond2 = rep.lhs2 <= rep.budget;
  return rep;
}

VerifierPtr identity_toy(std::size_t a, const Rational& soundness) { return std::make_shared<IdentityToy>(a, soundness); }

}  // namespace rectpcp
