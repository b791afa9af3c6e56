#include "rectpcp/transforms.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>

namespace rectpcp {

namespace {

std::string digest(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

bool parity(std::uint64_t x) { return (std::popcount(x) & 1) != 0; }

std::uint64_t mask(std::size_t bits) { return RandomnessPartition::mask(bits); }

std::size_t ceil_log2(std::uint64_t n) { return n <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(n - 1)); }

void enum_guard(std::size_t r, const std::string& what) {
  if (r > kEnumMaxCoins) {
    throw std::length_error(what + ": randomness " + std::to_string(r) + " exceeds the enumeration guard of " +
                            std::to_string(kEnumMaxCoins) + " coins");
  }
}

CheckResult failed(std::string property, std::uint64_t coins, std::size_t k, std::string detail) {
  CheckResult c;
  c.property = std::move(property);
  c.ok = false;
  c.witness = Configuration{coins, k};
  c.detail = std::move(detail);
  return c;
}

// Decision and parity coefficients equal, constants ignored.
bool same_shape(const Predicate& a, const Predicate& b) {
  if (a.answer_bits() != b.answer_bits() || a.p() != b.p()) return false;
  std::vector<ParityCheck> pa = a.parities(), pb = b.parities();
  for (auto& c : pa) c.constant = false;
  for (auto& c : pb) c.constant = false;
  if (pa != pb) return false;
  if (a.decision_ptr() == b.decision_ptr()) return true;
  return same_predicate(Predicate(a.decision_ptr(), a.answer_bits(), pa), Predicate(b.decision_ptr(), b.answer_bits(), pb));
}

class SmoothDecision : public Decision {
 public:
  SmoothDecision(std::shared_ptr<const Decision> old, std::size_t q, std::size_t delta, std::size_t p)
      : old_(std::move(old)), q_(q), delta_(delta), p_(p),
        fp_("smooth:" + std::to_string(q) + ":" + std::to_string(delta) + ":" + digest(old_->fingerprint())) {}
  std::size_t arity() const override { return q_ * delta_ + p_; }
  bool eval(const BitVector& in) const override {
    BitVector x(q_ + p_);
    for (std::size_t k = 0; k < q_; ++k) {
      const bool b = in.get(k * delta_);
      for (std::size_t t = 1; t < delta_; ++t)
        if (in.get(k * delta_ + t) != b) return false;
      x.set(k, b);
    }
    for (std::size_t i = 0; i < p_; ++i) x.set(q_ + i, in.get(q_ * delta_ + i));
    return old_->eval(x);
  }
  std::string fingerprint() const override { return fp_; }

 private:
  std::shared_ptr<const Decision> old_;
  std::size_t q_, delta_, p_;
  std::string fp_;
};

class AlphabetDecision : public Decision {
 public:
  AlphabetDecision(std::shared_ptr<const Decision> old, std::size_t q, std::size_t sigma, std::size_t p,
                   std::shared_ptr<const LinearCode> code)
      : old_(std::move(old)), q_(q), sigma_(sigma), p_(p), code_(std::move(code)) {
    std::string g;
    for (std::size_t i = 0; i < code_->msg_len(); ++i) g += code_->generator().row(i).to_string() + "/";
    fp_ = "alphabet:" + std::to_string(q) + ":" + digest(g) + ":" + digest(old_->fingerprint());
  }
  std::size_t arity() const override { return q_ * code_->block_len() + p_; }
  bool eval(const BitVector& in) const override {
    const std::size_t n = code_->block_len();
    BitVector x(q_ * sigma_ + p_);
    BitVector word(n);
    for (std::size_t k = 0; k < q_; ++k) {
      for (std::size_t j = 0; j < n; ++j) word.set(j, in.get(k * n + j));
      if (!code_->is_codeword(word)) return false;
      for (std::size_t b = 0; b < sigma_; ++b) x.set(k * sigma_ + b, word.get(b));
    }
    for (std::size_t i = 0; i < p_; ++i) x.set(q_ * sigma_ + i, in.get(q_ * n + i));
    return old_->eval(x);
  }
  std::string fingerprint() const override { return fp_; }

 private:
  std::shared_ptr<const Decision> old_;
  std::size_t q_, sigma_, p_;
  std::shared_ptr<const LinearCode> code_;
  std::string fp_;
};

class RopDecision : public Decision {
 public:
  RopDecision(VerifierPtr v, std::shared_ptr<const LinearCode> code, std::string fp)
      : v_(std::move(v)), code_(std::move(code)), qs_(v_->q() * v_->info().sigma), fp_(std::move(fp)) {}
  std::size_t arity() const override { return qs_ + code_->block_len(); }
  bool eval(const BitVector& in) const override {
    BitVector y(code_->block_len());
    for (std::size_t i = 0; i < y.size(); ++i) y.set(i, in.get(qs_ + i));
    const auto msg = code_->decode(y);
    if (!msg) return false;
    const std::uint64_t coins = msg->to_uint();
    if (!v_->coin_valid(coins)) return false;
    BitVector z(qs_);
    for (std::size_t i = 0; i < qs_; ++i) z.set(i, in.get(i));
    return v_->predicate(coins)->accepts(z, v_->partition().obliv(coins));
  }
  std::string fingerprint() const override { return fp_; }

 private:
  VerifierPtr v_;
  std::shared_ptr<const LinearCode> code_;
  std::size_t qs_;
  std::string fp_;
};

// Inner decision fed from the answers, except slots that read a parity bit.
class CompositeDecision : public Decision {
 public:
  CompositeDecision(std::shared_ptr<const Decision> inner, std::vector<int> slots, std::size_t p)
      : inner_(std::move(inner)), slots_(std::move(slots)), p_(p) {
    fp_ = "compose:" + std::to_string(p) + ":" + digest(inner_->fingerprint()) + ":";
    for (int s : slots_) fp_ += std::to_string(s) + ",";
  }
  std::size_t arity() const override { return slots_.size() + p_; }
  bool eval(const BitVector& in) const override {
    BitVector x(slots_.size());
    for (std::size_t k = 0; k < slots_.size(); ++k)
      x.set(k, slots_[k] < 0 ? in.get(k) : in.get(slots_.size() + static_cast<std::size_t>(slots_[k])));
    return inner_->eval(x);
  }
  std::string fingerprint() const override { return fp_; }

 private:
  std::shared_ptr<const Decision> inner_;
  std::vector<int> slots_;
  std::size_t p_;
  std::string fp_;
};

// Inner decision with some answers replaced by fixed input bits.
class BoundDecision : public Decision {
 public:
  BoundDecision(std::shared_ptr<const Decision> inner, std::vector<int> fixed)
      : inner_(std::move(inner)), fixed_(std::move(fixed)) {
    fp_ = "bound:" + digest(inner_->fingerprint()) + ":";
    for (int f : fixed_) fp_ += std::to_string(f);
  }
  std::size_t arity() const override { return fixed_.size(); }
  bool eval(const BitVector& in) const override {
    BitVector x(fixed_.size());
    for (std::size_t k = 0; k < fixed_.size(); ++k) x.set(k, fixed_[k] < 0 ? in.get(k) : fixed_[k] == 1);
    return inner_->eval(x);
  }
  std::string fingerprint() const override { return fp_; }

 private:
  std::shared_ptr<const Decision> inner_;
  std::vector<int> fixed_;
  std::string fp_;
};

}  // namespace

CheckResult check_zero_rop(const Verifier& v) {
  enum_guard(v.r(), "check_zero_rop");
  CheckResult res;
  res.property = "zero_rop";
  std::shared_ptr<const Predicate> first;
  std::map<std::shared_ptr<const Predicate>, bool> seen;
  for (std::uint64_t c = 0; c < (std::uint64_t{1} << v.r()); ++c) {
    if (!v.coin_valid(c)) continue;
    auto p = v.predicate(c);
    if (!first) {
      first = p;
      continue;
    }
    if (p == first || seen.count(p)) continue;
    seen[p] = true;
    if (!same_shape(*first, *p)) return failed("zero_rop", c, 0, "decision or parity coefficients differ from the first coin sequence");
  }
  return res;
}

// ---------------------------------------------------------------- smoothify

SmoothVerifier::SmoothVerifier(VerifierPtr base, AgentsPtr agents, const Rational& mu)
    : Verifier(base ? base->info() : VerifierInfo{}), base_(std::move(base)), agents_(std::move(agents)), mu_(mu) {
  if (!base_ || !agents_) throw std::invalid_argument("smoothify: needs a verifier and its listing agents");
  if (mu_ <= 0 || mu_ >= 1) throw std::invalid_argument("smoothify: mu must lie in (0, 1)");
  const VerifierInfo& b = base_->info();
  if (b.sigma != 1) throw std::invalid_argument("smoothify: needs a Boolean alphabet");
  if (!base_->full_coin_space()) throw std::invalid_argument("smoothify: needs every coin sequence to be valid");
  if (!std::has_single_bit(b.q)) throw std::invalid_argument("smoothify: q must be a power of two for a square layout");
  const RandomnessPartition& bp = b.partition;

  list_size_ = agents_->row(bp.row(0), bp.shared(0), 0).list.size();
  if (list_size_ == 0) throw std::invalid_argument("smoothify: agents returned an empty list");
  const Rational alpha = mu_ / (2 * static_cast<long long>(b.q));
  if (list_size_ >= 2) {
    sampler_ = canonical_sampler(list_size_, alpha);
    delta_ = sampler_->delta();
  }
  blocks_.reserve(list_size_ * delta_);
  for (std::size_t v = 0; v < list_size_; ++v) {
    blocks_.push_back(v);
    if (!sampler_) continue;
    for (std::size_t u : closed_neighborhood(*sampler_, v).vertices)
      if (u != v) blocks_.push_back(u);
  }

  const std::size_t kb = static_cast<std::size_t>(std::countr_zero(b.q));
  const long long row0 = static_cast<long long>(bp.r_row + bp.r_shared_row);
  const long long col0 = static_cast<long long>(bp.r_col + bp.r_shared_col);
  long long best = -1;
  for (std::size_t kr = 0; kr <= kb; ++kr) {
    const long long d = row0 + static_cast<long long>(kr) - col0 - static_cast<long long>(kb - kr);
    if (best < 0 || std::llabs(d) < best) {
      best = std::llabs(d);
      kr_ = kr;
    }
  }
  kc_ = kb - kr_;
  const long long diff = row0 + static_cast<long long>(kr_) - col0 - static_cast<long long>(kc_);
  if (diff < 0) pad_row_ = static_cast<std::size_t>(-diff);
  if (diff > 0) pad_col_ = static_cast<std::size_t>(diff);
  row_bits_ = static_cast<std::size_t>(row0) + pad_row_ + kr_;

  VerifierInfo info = b;
  info.name = "smoothify(" + b.name + ")";
  info.partition = {bp.r_row, bp.r_col, bp.r_shared_row + pad_row_, bp.r_shared_col + pad_col_};
  info.r = info.partition.r();
  if (info.r > 62 || 2 * row_bits_ > 62) throw std::length_error("smoothify: layout exceeds 62 bits");
  info.q = b.q * delta_;
  info.m = std::uint64_t{1} << (2 * row_bits_);
  info.ell = std::uint64_t{1} << row_bits_;
  info.sigma = 1;
  info.soundness = b.soundness + mu_;
  info.robustness = 0;
  info.smooth = true;
  info.decision_size = b.decision_size + b.q * delta_;
  info_ = info;
}

std::uint64_t SmoothVerifier::row_index(const RowConfig& c, std::uint64_t dummy_row) const {
  const auto& bp = base_->partition();
  std::size_t at = bp.r_row;
  std::uint64_t x = c.r_row | (c.r_shared_row << at);
  at += bp.r_shared_row;
  x |= dummy_row << at;
  at += pad_row_;
  return x | (static_cast<std::uint64_t>(c.k >> kc_) << at);
}

std::uint64_t SmoothVerifier::col_index(const ColConfig& c, std::uint64_t dummy_col) const {
  const auto& bp = base_->partition();
  std::size_t at = bp.r_col;
  std::uint64_t x = c.r_col | (c.r_shared_col << at);
  at += bp.r_shared_col;
  x |= dummy_col << at;
  at += pad_col_;
  return x | (static_cast<std::uint64_t>(c.k & mask(kc_)) << at);
}

std::uint64_t SmoothVerifier::base_coins(std::uint64_t coins) const {
  const auto& np = info_.partition;
  const auto& bp = base_->partition();
  return bp.join(np.row(coins), np.col(coins), np.shared_row(coins) & mask(bp.r_shared_row),
                 np.shared_col(coins) & mask(bp.r_shared_col));
}

std::uint64_t SmoothVerifier::lift(std::uint64_t base_coins, std::uint64_t dummy_row, std::uint64_t dummy_col) const {
  const auto& bp = base_->partition();
  return info_.partition.join(bp.row(base_coins), bp.col(base_coins), bp.shared_row(base_coins) | (dummy_row << bp.r_shared_row),
                              bp.shared_col(base_coins) | (dummy_col << bp.r_shared_col));
}

std::uint64_t SmoothVerifier::location(std::uint64_t bc, std::uint64_t dummy_row, std::uint64_t dummy_col,
                                       std::size_t k) const {
  const auto& bp = base_->partition();
  return row_index({bp.row(bc), bp.shared_row(bc), k}, dummy_row) * info_.ell +
         col_index({bp.col(bc), bp.shared_col(bc), k}, dummy_col);
}

void SmoothVerifier::queries(std::uint64_t coins, std::uint64_t* out) const {
  const auto& np = info_.partition;
  const auto& bp = base_->partition();
  const std::uint64_t bc = base_coins(coins);
  const std::uint64_t dr = np.shared_row(coins) >> bp.r_shared_row, dc = np.shared_col(coins) >> bp.r_shared_col;
  for (std::size_t k = 0; k < base_->q(); ++k) {
    const auto lr = agents_->row(bp.row(bc), bp.shared(bc), k);
    const auto lc = agents_->col(bp.col(bc), bp.shared(bc), k);
    if (lr.list.size() != list_size_ || lc.list.size() != list_size_ || lr.self != lc.self || lr.self >= list_size_) {
      throw std::logic_error("smoothify: neighbor lists of coins " + std::to_string(bc) + ", query " + std::to_string(k) +
                             " do not have the uniform length " + std::to_string(list_size_));
    }
    const std::size_t* blk = block(lr.self);
    for (std::size_t t = 0; t < delta_; ++t)
      out[k * delta_ + t] = row_index(lr.list[blk[t]], dr) * info_.ell + col_index(lc.list[blk[t]], dc);
  }
}

std::shared_ptr<const Predicate> SmoothVerifier::predicate(std::uint64_t coins) const {
  auto old = base_->predicate(base_coins(coins));
  std::lock_guard<std::mutex> lock(mu_cache_);
  auto it = cache_.find(old);
  if (it != cache_.end()) return it->second;
  auto& dec = decisions_[old->decision_ptr()];
  if (!dec) dec = std::make_shared<SmoothDecision>(old->decision_ptr(), base_->q(), delta_, old->p());
  auto p = std::make_shared<Predicate>(dec, info_.q, old->parities(), info_.decision_size);
  cache_.emplace(old, p);
  return p;
}

Transformed smoothify(VerifierPtr v, AgentsPtr agents, const Rational& mu, SmoothifyOptions opts) {
  if (!v || !agents) throw std::invalid_argument("smoothify: needs a verifier and its listing agents");
  if (opts.verify) {
    CheckResult rnl = check_rnl(*v, *agents);
    if (!rnl.ok) throw PreconditionError("smoothify: the input verifier fails RNL", rnl);
    CheckResult rop = check_rop(*v);
    if (!rop.ok) throw PreconditionError("smoothify: the input verifier fails ROP", rop);
    const auto& part = v->partition();
    std::size_t size = 0;
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << v->r()); ++c) {
      if (!v->coin_valid(c)) continue;
      for (std::size_t k = 0; k < v->q(); ++k) {
        const std::size_t n = agents->row(part.row(c), part.shared(c), k).list.size();
        if (size == 0) size = n;
        if (n != size) {
          throw PreconditionError("smoothify: neighbor lists differ in length",
                                  failed("uniform_lists", c, k, std::to_string(n) + " vs " + std::to_string(size)));
        }
      }
    }
  }
  auto sv = std::make_shared<SmoothVerifier>(v, agents, mu);
  Transformed out;
  out.verifier = sv;
  out.transform.name = "smoothify";
  out.transform.forward = [sv](const Proof& old) {
    const Verifier& b = sv->base();
    if (old.size() != b.m()) throw std::invalid_argument("smoothify transform: proof length mismatch");
    enum_guard(sv->r(), "smoothify transform");
    Proof p(sv->m(), 0);
    std::vector<std::uint64_t> loc(b.q());
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << b.r()); ++c) {
      b.queries(c, loc.data());
      for (std::uint64_t dr = 0; dr < (std::uint64_t{1} << sv->pad_row()); ++dr)
        for (std::uint64_t dc = 0; dc < (std::uint64_t{1} << sv->pad_col()); ++dc)
          for (std::size_t k = 0; k < b.q(); ++k) p[sv->location(c, dr, dc, k)] = old[loc[k]];
    }
    return p;
  };
  if (sv->pad_row() + sv->pad_col() > 0) {
    out.notes.push_back("padded " + std::to_string(sv->pad_row()) + " row and " + std::to_string(sv->pad_col()) +
                        " column dummy shared coins for a square layout");
  }
  if (sv->sampler() && sv->sampler()->is_complete()) {
    out.notes.push_back("sampler on " + std::to_string(sv->list_size()) + " vertices is complete");
  }
  return out;
}

// ---------------------------------------------------------- alphabet_reduce

namespace {

class AlphabetVerifier : public Verifier {
 public:
  AlphabetVerifier(VerifierPtr base, std::shared_ptr<const LinearCode> code, VerifierInfo info)
      : Verifier(std::move(info)), base_(std::move(base)), code_(std::move(code)) {}

  using Verifier::queries;
  void queries(std::uint64_t coins, std::uint64_t* out) const override {
    const std::size_t n = code_->block_len();
    const auto loc = base_->queries(coins);
    for (std::size_t k = 0; k < loc.size(); ++k)
      for (std::size_t j = 0; j < n; ++j) out[k * n + j] = loc[k] * n + j;
  }
  std::shared_ptr<const Predicate> predicate(std::uint64_t coins) const override {
    auto old = base_->predicate(coins);
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(old);
    if (it != cache_.end()) return it->second;
    auto& dec = decisions_[old->decision_ptr()];
    if (!dec) dec = std::make_shared<AlphabetDecision>(old->decision_ptr(), base_->q(), base_->info().sigma, old->p(), code_);
    auto p = std::make_shared<Predicate>(dec, info_.q, old->parities(), info_.decision_size);
    cache_.emplace(old, p);
    return p;
  }
  bool coin_valid(std::uint64_t coins) const override { return base_->coin_valid(coins); }
  bool full_coin_space() const override { return base_->full_coin_space(); }

 private:
  VerifierPtr base_;
  std::shared_ptr<const LinearCode> code_;
  mutable std::mutex mu_;
  mutable std::map<std::shared_ptr<const Predicate>, std::shared_ptr<const Predicate>> cache_;
  mutable std::map<std::shared_ptr<const Decision>, std::shared_ptr<const Decision>> decisions_;
};

class AlphabetAgents : public RnlAgents {
 public:
  AlphabetAgents(AgentsPtr base, std::size_t n) : base_(std::move(base)), n_(n) {}
  AgentList<RowConfig> row(std::uint64_t r_row, std::uint64_t shared, std::size_t k) const override {
    auto l = base_->row(r_row, shared, k / n_);
    for (auto& e : l.list) e.k = e.k * n_ + k % n_;
    return l;
  }
  AgentList<ColConfig> col(std::uint64_t r_col, std::uint64_t shared, std::size_t k) const override {
    auto l = base_->col(r_col, shared, k / n_);
    for (auto& e : l.list) e.k = e.k * n_ + k % n_;
    return l;
  }

 private:
  AgentsPtr base_;
  std::size_t n_;
};

}  // namespace

Transformed alphabet_reduce(VerifierPtr v, AgentsPtr agents, std::shared_ptr<const LinearCode> code) {
  if (!v || !code) throw std::invalid_argument("alphabet_reduce: needs a verifier and a code");
  const VerifierInfo& b = v->info();
  if (!code->systematic()) throw std::invalid_argument("alphabet_reduce: the code must be systematic");
  if (code->msg_len() != b.sigma) {
    throw std::invalid_argument("alphabet_reduce: code message length " + std::to_string(code->msg_len()) +
                                " differs from sigma = " + std::to_string(b.sigma));
  }
  const std::size_t n = code->block_len();
  VerifierInfo info = b;
  info.name = "alphabet_reduce(" + b.name + ")";
  info.q = b.q * n;
  info.m = b.m * n;
  info.ell = 0;
  info.sigma = 1;
  info.robustness = b.robustness * static_cast<long long>(b.sigma) / (2 * static_cast<long long>(n));
  info.smooth = false;
  info.decision_size = b.decision_size + b.q * n;
  auto av = std::make_shared<AlphabetVerifier>(v, code, std::move(info));
  Transformed out;
  out.verifier = av;
  if (agents) out.agents = std::make_shared<AlphabetAgents>(agents, n);
  out.transform.name = "alphabet_reduce";
  out.transform.forward = [v, code, n](const Proof& old) {
    if (old.size() != v->m()) throw std::invalid_argument("alphabet_reduce transform: proof length mismatch");
    const std::size_t sigma = v->info().sigma;
    Proof p(old.size() * n);
    for (std::size_t i = 0; i < old.size(); ++i) {
      const BitVector w = code->encode(BitVector::from_uint(old[i], sigma));
      for (std::size_t j = 0; j < n; ++j) p[i * n + j] = w.get(j) ? 1 : 0;
    }
    return p;
  };
  return out;
}

// ------------------------------------------------------------------ add_rop

namespace {

class RopVerifier : public Verifier {
 public:
  RopVerifier(VerifierPtr base, std::shared_ptr<const LinearCode> code, VerifierInfo info, std::shared_ptr<const Decision> dec)
      : Verifier(std::move(info)), base_(std::move(base)), code_(std::move(code)), dec_(std::move(dec)) {}

  using Verifier::queries;
  void queries(std::uint64_t coins, std::uint64_t* out) const override { base_->queries(coins, out); }
  bool coin_valid(std::uint64_t coins) const override { return base_->coin_valid(coins); }
  bool full_coin_space() const override { return base_->full_coin_space(); }

  std::shared_ptr<const Predicate> predicate(std::uint64_t coins) const override {
    const auto& part = info_.partition;
    const std::uint64_t shared = part.shared(coins);
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(shared);
    if (it != cache_.end()) return it->second;
    const std::size_t ro = part.r_obliv();
    std::vector<ParityCheck> par(code_->block_len());
    for (std::size_t i = 0; i < par.size(); ++i) {
      for (std::size_t j = 0; j < info_.r; ++j) {
        if (!code_->generator().get(j, i)) continue;
        if (j < ro)
          par[i].coeff |= std::uint64_t{1} << j;
        else if ((coins >> j) & 1)
          par[i].constant = !par[i].constant;
      }
    }
    auto p = std::make_shared<Predicate>(dec_, base_->q() * base_->info().sigma, std::move(par), info_.decision_size);
    cache_.emplace(shared, p);
    return p;
  }

 private:
  VerifierPtr base_;
  std::shared_ptr<const LinearCode> code_;
  std::shared_ptr<const Decision> dec_;
  mutable std::mutex mu_;
  mutable std::map<std::uint64_t, std::shared_ptr<const Predicate>> cache_;
};

}  // namespace

Transformed add_rop(VerifierPtr v, AgentsPtr agents, std::shared_ptr<const LinearCode> code) {
  if (!v || !code) throw std::invalid_argument("add_rop: needs a verifier and a code");
  const VerifierInfo& b = v->info();
  if (b.q < b.r) {
    throw std::invalid_argument("add_rop: needs q >= r (q = " + std::to_string(b.q) + ", r = " + std::to_string(b.r) + ")");
  }
  if (code->msg_len() != b.r || code->block_len() != b.q) {
    throw std::invalid_argument("add_rop: the code must map r = " + std::to_string(b.r) + " bits to q = " +
                                std::to_string(b.q) + " bits");
  }
  enum_guard(b.r, "add_rop");
  std::string fp = b.name + ":" + std::to_string(b.r) + ":" + std::to_string(b.q) + ":";
  for (std::size_t i = 0; i < code->msg_len(); ++i) fp += code->generator().row(i).to_string() + "/";
  for (std::uint64_t c = 0; c < (std::uint64_t{1} << b.r); ++c) {
    if (!v->coin_valid(c)) {
      fp += "-;";
      continue;
    }
    const auto pred = v->predicate(c);
    fp += pred->decision().fingerprint() + "|";
    for (const auto& pc : pred->parities()) fp += std::to_string(pc.coeff) + (pc.constant ? "+" : ",");
    fp += ";";
  }

  VerifierInfo info = b;
  info.name = "add_rop(" + b.name + ")";
  info.p = code->block_len();
  const Rational via_code{BigInt(code->min_distance()), BigInt(2 * b.q * b.sigma)};
  info.robustness = std::min(Rational(b.robustness / 2), via_code);
  info.smooth = false;
  info.decision_size = b.decision_size + code->block_len() * code->msg_len();
  auto dec = std::make_shared<RopDecision>(v, code, "rop:" + digest(fp));
  auto rv = std::make_shared<RopVerifier>(v, code, std::move(info), std::move(dec));
  Transformed out;
  out.verifier = rv;
  out.agents = std::move(agents);
  out.transform.name = "add_rop";
  out.transform.forward = [](const Proof& p) { return p; };
  return out;
}

// --------------------------------------------------------------------- PCPP

std::vector<PcppVerifier::Query> PcppVerifier::queries(std::uint64_t coins) const {
  std::vector<Query> out(info_.q);
  queries(coins, out.data());
  for (const auto& qy : out) {
    if (qy.proof ? qy.index >= info_.proof_length : qy.index >= info_.input_length)
      throw std::logic_error("pcpp query out of range for its oracle");
  }
  return out;
}

bool PcppVerifier::accepts(const BitVector& input, const Proof& proof, std::uint64_t coins) const {
  if (input.size() != info_.input_length) throw std::invalid_argument("pcpp: input length mismatch");
  if (proof.size() != info_.proof_length) throw std::invalid_argument("pcpp: proof length mismatch");
  const auto qs = queries(coins);
  BitVector a(qs.size());
  for (std::size_t k = 0; k < qs.size(); ++k) a.set(k, qs[k].proof ? (proof[qs[k].index] & 1) != 0 : input.get(qs[k].index));
  return decision(coins)->eval(a);
}

Rational PcppVerifier::acceptance(const BitVector& input, const Proof& proof) const {
  enum_guard(info_.r, "pcpp acceptance");
  std::uint64_t acc = 0;
  for (std::uint64_t c = 0; c < (std::uint64_t{1} << info_.r); ++c) acc += accepts(input, proof, c) ? 1 : 0;
  return Rational{BigInt(acc), BigInt(1) << info_.r};
}

QuadraticSystem QuadraticSystem::from_decision(const Decision& d) {
  const std::size_t n = d.arity();
  if (n == 0) throw std::invalid_argument("quadratic system: the circuit needs at least one input");
  if (n > kHadamardMaxWires) throw std::length_error("quadratic system: more than " + std::to_string(kHadamardMaxWires) + " inputs");
  std::vector<std::uint8_t> tt(std::size_t{1} << n);
  std::vector<std::uint64_t> acc;
  for (std::uint64_t a = 0; a < tt.size(); ++a) {
    tt[a] = d.eval(BitVector::from_uint(a, n)) ? 1 : 0;
    if (tt[a]) acc.push_back(a);
  }
  QuadraticSystem sys;
  sys.inputs = n;
  sys.wires = n;
  if (acc.empty()) {
    sys.constraints.push_back({0, 0, true});
    return sys;
  }

  // Reduced echelon basis of the differences, indexed by pivot bit.
  const std::uint64_t a0 = acc.front();
  std::vector<std::uint64_t> piv(n, 0);
  std::size_t dim = 0;
  for (std::uint64_t a : acc) {
    std::uint64_t v = a ^ a0;
    for (std::size_t b = n; b-- > 0;)
      if (((v >> b) & 1) && piv[b]) v ^= piv[b];
    if (v == 0) continue;
    const std::size_t top = static_cast<std::size_t>(std::bit_width(v)) - 1;
    piv[top] = v;
    ++dim;
  }
  if (acc.size() == (std::size_t{1} << dim)) {
    for (std::size_t b = 0; b < n; ++b) {
      if (!piv[b]) continue;
      for (std::size_t o = 0; o < n; ++o)
        if (o != b && piv[o] && ((piv[o] >> b) & 1)) piv[o] ^= piv[b];
    }
    for (std::size_t f = 0; f < n; ++f) {
      if (piv[f]) continue;
      std::uint64_t h = std::uint64_t{1} << f;
      for (std::size_t b = 0; b < n; ++b)
        if (piv[b] && ((piv[b] >> f) & 1)) h |= std::uint64_t{1} << b;
      sys.constraints.push_back({0, h, parity(h & a0)});
    }
    return sys;
  }

  std::vector<std::uint8_t> anf = tt;
  for (std::size_t i = 0; i < n; ++i)
    for (std::uint64_t a = 0; a < anf.size(); ++a)
      if ((a >> i) & 1) anf[a] ^= anf[a ^ (std::uint64_t{1} << i)];
  std::map<std::uint64_t, std::size_t> memo;
  auto wire_of = [&](auto&& self, std::uint64_t s) -> std::size_t {
    if (std::popcount(s) == 1) return static_cast<std::size_t>(std::countr_zero(s));
    auto it = memo.find(s);
    if (it != memo.end()) return it->second;
    const std::size_t hi = static_cast<std::size_t>(std::bit_width(s)) - 1;
    const std::size_t rest = self(self, s ^ (std::uint64_t{1} << hi));
    if (sys.wires >= kHadamardMaxWires) throw std::length_error("quadratic system: product wires exceed the guard");
    const std::size_t w = sys.wires++;
    sys.products.push_back({rest, hi});
    memo[s] = w;
    return w;
  };
  Constraint last{0, 0, anf[0] == 0};
  for (std::uint64_t s = 1; s < anf.size(); ++s)
    if (anf[s]) last.linear ^= std::uint64_t{1} << wire_of(wire_of, s);
  for (const auto& [a, b] : sys.products) {
    sys.tensor.push_back(a);
    sys.tensor.push_back(b);
  }
  std::sort(sys.tensor.begin(), sys.tensor.end());
  sys.tensor.erase(std::unique(sys.tensor.begin(), sys.tensor.end()), sys.tensor.end());
  const std::size_t om = sys.tensor.size();
  if (om > kHadamardMaxTensor) {
    throw std::length_error("quadratic system: " + std::to_string(om) + " wires in products exceed the tensor guard of " +
                            std::to_string(kHadamardMaxTensor));
  }
  auto widx = [&](std::size_t w) {
    return static_cast<std::size_t>(std::lower_bound(sys.tensor.begin(), sys.tensor.end(), w) - sys.tensor.begin());
  };
  for (std::size_t i = 0; i < sys.products.size(); ++i) {
    const auto [a, b] = sys.products[i];
    sys.constraints.push_back({std::uint64_t{1} << (widx(a) * om + widx(b)), std::uint64_t{1} << (n + i), false});
  }
  sys.constraints.push_back(last);
  return sys;
}

std::uint64_t QuadraticSystem::assign(std::uint64_t input) const {
  std::uint64_t z = input & mask(inputs);
  for (std::size_t i = 0; i < products.size(); ++i) {
    const auto [a, b] = products[i];
    z |= (((z >> a) & (z >> b)) & 1) << (inputs + i);
  }
  return z;
}

std::uint64_t QuadraticSystem::tensor_word(std::uint64_t z) const {
  const std::size_t om = tensor.size();
  std::uint64_t t = 0;
  for (std::size_t a = 0; a < om; ++a)
    for (std::size_t b = 0; b < om; ++b) t |= (((z >> tensor[a]) & (z >> tensor[b])) & 1) << (a * om + b);
  return t;
}

bool QuadraticSystem::satisfied(std::uint64_t z) const {
  const std::uint64_t t = tensor_word(z);
  for (const auto& c : constraints)
    if (parity(c.quad & t) != (parity(c.linear & z) != c.constant)) return false;
  return true;
}

HadamardPcpp::HadamardPcpp(QuadraticSystem system, HadamardOptions opts, std::string circuit)
    : PcppVerifier(Info{}), sys_(std::move(system)) {
  if (opts.delta <= 0 || opts.delta > 1) throw std::invalid_argument("hadamard pcpp: delta must lie in (0, 1]");
  if (opts.soundness <= 0 || opts.soundness > 1) throw std::invalid_argument("hadamard pcpp: soundness must lie in (0, 1]");
  if (sys_.inputs == 0 || sys_.wires > kHadamardMaxWires || sys_.tensor.size() > kHadamardMaxTensor)
    throw std::length_error("hadamard pcpp: circuit outside the wire guards");
  omega_ = sys_.tensor.size();
  jbits_ = ceil_log2(sys_.inputs);
  info_.name = "hadamard";
  info_.circuit = std::move(circuit);
  info_.input_length = sys_.inputs;
  info_.proof_length = (std::uint64_t{1} << sys_.wires) + (std::uint64_t{1} << (omega_ * omega_));
  info_.r = 2 * sys_.wires + 2 * omega_ * omega_ + 2 * omega_ + sys_.constraints.size() + jbits_;
  if (info_.r > 62) throw std::length_error("hadamard pcpp: randomness exceeds 62 bits");
  info_.q = kQueries;
  info_.delta = opts.delta;
  info_.soundness = opts.soundness;
  info_.decision_size = kQueries;
  for (int c = 0; c < 2; ++c) {
    std::vector<std::uint8_t> tt(std::size_t{1} << kQueries);
    for (std::uint64_t a = 0; a < tt.size(); ++a) {
      auto bit = [a](int i) { return static_cast<unsigned>((a >> i) & 1); };
      const bool lin_f = (bit(0) ^ bit(1) ^ bit(2)) == 0;
      const bool lin_g = (bit(3) ^ bit(4) ^ bit(5)) == 0;
      const bool tensor = ((bit(6) ^ bit(0)) & (bit(7) ^ bit(1))) == (bit(8) ^ bit(3));
      const bool cons = (bit(9) ^ bit(0) ^ bit(10) ^ bit(4)) == static_cast<unsigned>(c);
      const bool prox = (bit(11) ^ bit(1)) == bit(12);
      tt[a] = lin_f && lin_g && tensor && cons && prox;
    }
    dec_[c] = std::make_shared<TableDecision>(std::move(tt));
  }
}

HadamardPcpp::Coins HadamardPcpp::split(std::uint64_t coins) const {
  Coins c{};
  std::size_t at = 0;
  auto take = [&](std::size_t bits) {
    const std::uint64_t v = (coins >> at) & mask(bits);
    at += bits;
    return v;
  };
  c.x = take(sys_.wires);
  c.x2 = take(sys_.wires);
  c.big = take(omega_ * omega_);
  c.big2 = take(omega_ * omega_);
  c.u = take(omega_);
  c.u2 = take(omega_);
  c.rho = take(sys_.constraints.size());
  c.j = take(jbits_) % sys_.inputs;
  return c;
}

void HadamardPcpp::queries(std::uint64_t coins, Query* out) const {
  const Coins c = split(coins);
  const std::uint64_t g0 = std::uint64_t{1} << sys_.wires;
  auto f = [](std::uint64_t x) { return Query{true, x}; };
  auto g = [g0](std::uint64_t x) { return Query{true, g0 + x}; };
  std::uint64_t eu = 0, eu2 = 0, uu = 0;
  for (std::size_t a = 0; a < omega_; ++a) {
    eu |= ((c.u >> a) & 1) << sys_.tensor[a];
    eu2 |= ((c.u2 >> a) & 1) << sys_.tensor[a];
    for (std::size_t b = 0; b < omega_; ++b) uu |= ((c.u >> a) & (c.u2 >> b) & 1) << (a * omega_ + b);
  }
  std::uint64_t lin = 0, quad = 0;
  for (std::size_t i = 0; i < sys_.constraints.size(); ++i) {
    if (!((c.rho >> i) & 1)) continue;
    lin ^= sys_.constraints[i].linear;
    quad ^= sys_.constraints[i].quad;
  }
  out[0] = f(c.x);
  out[1] = f(c.x2);
  out[2] = f(c.x ^ c.x2);
  out[3] = g(c.big);
  out[4] = g(c.big2);
  out[5] = g(c.big ^ c.big2);
  out[6] = f(c.x ^ eu);
  out[7] = f(c.x2 ^ eu2);
  out[8] = g(c.big ^ uu);
  out[9] = f(c.x ^ lin);
  out[10] = g(c.big2 ^ quad);
  out[11] = f(c.x2 ^ (std::uint64_t{1} << c.j));
  out[12] = Query{false, c.j};
}

std::shared_ptr<const Decision> HadamardPcpp::decision(std::uint64_t coins) const {
  const Coins c = split(coins);
  bool constant = false;
  for (std::size_t i = 0; i < sys_.constraints.size(); ++i)
    if ((c.rho >> i) & 1) constant = constant != sys_.constraints[i].constant;
  return dec_[constant ? 1 : 0];
}

Proof HadamardPcpp::prove(const BitVector& input) const {
  if (input.size() != sys_.inputs) throw std::invalid_argument("hadamard pcpp: input length mismatch");
  const std::uint64_t z = sys_.assign(input.to_uint());
  const std::uint64_t t = sys_.tensor_word(z);
  Proof p(info_.proof_length);
  const std::uint64_t g0 = std::uint64_t{1} << sys_.wires;
  for (std::uint64_t x = 0; x < g0; ++x) p[x] = parity(x & z) ? 1 : 0;
  for (std::uint64_t x = 0; x < p.size() - g0; ++x) p[g0 + x] = parity(x & t) ? 1 : 0;
  return p;
}

std::shared_ptr<HadamardPcpp> hadamard_pcpp(const Decision& circuit, HadamardOptions opts) {
  return std::make_shared<HadamardPcpp>(QuadraticSystem::from_decision(circuit), opts, circuit.fingerprint());
}

namespace {

class BoundPcpp : public Verifier {
 public:
  BoundPcpp(PcppPtr pcpp, BitVector input)
      : Verifier([&pcpp] {
          VerifierInfo info;
          info.name = "pcpp_with_input(" + pcpp->info().name + ")";
          info.r = pcpp->info().r;
          info.q = pcpp->info().q;
          info.m = pcpp->info().proof_length;
          info.partition = {info.r, 0, 0, 0};
          info.soundness = pcpp->info().soundness;
          info.decision_size = pcpp->info().decision_size;
          return info;
        }()),
        pcpp_(std::move(pcpp)),
        input_(std::move(input)) {
    if (input_.size() != pcpp_->info().input_length) throw std::invalid_argument("pcpp_with_input: input length mismatch");
  }

  using Verifier::queries;
  void queries(std::uint64_t coins, std::uint64_t* out) const override {
    const auto qs = pcpp_->queries(coins);
    for (std::size_t k = 0; k < qs.size(); ++k) out[k] = qs[k].proof ? qs[k].index : 0;
  }
  std::shared_ptr<const Predicate> predicate(std::uint64_t coins) const override {
    const auto qs = pcpp_->queries(coins);
    std::vector<int> fixed(qs.size(), -1);
    for (std::size_t k = 0; k < qs.size(); ++k)
      if (!qs[k].proof) fixed[k] = input_.get(qs[k].index) ? 1 : 0;
    auto dec = std::make_shared<BoundDecision>(pcpp_->decision(coins), std::move(fixed));
    std::lock_guard<std::mutex> lock(mu_);
    auto& p = cache_[dec->fingerprint()];
    if (!p) p = std::make_shared<Predicate>(dec, info_.q, std::vector<ParityCheck>{}, info_.decision_size);
    return p;
  }

 private:
  PcppPtr pcpp_;
  BitVector input_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::shared_ptr<const Predicate>> cache_;
};

}  // namespace

VerifierPtr pcpp_with_input(PcppPtr pcpp, const BitVector& input) {
  if (!pcpp) throw std::invalid_argument("pcpp_with_input: null verifier");
  return std::make_shared<BoundPcpp>(std::move(pcpp), input);
}

// ------------------------------------------------------------------ compose

namespace {

VerifierInfo composite_info(const VerifierPtr& outer, const PcppPtr& inner) {
  if (!outer || !inner) throw std::invalid_argument("compose: needs an outer and an inner verifier");
  const VerifierInfo& o = outer->info();
  const auto& in = inner->info();
  if (o.sigma != 1) throw std::invalid_argument("compose: the outer verifier must be Boolean");
  if (!outer->full_coin_space()) throw std::invalid_argument("compose: the outer verifier must use its full coin space");
  if (in.input_length != o.q + o.p) {
    throw std::invalid_argument("compose: inner input length " + std::to_string(in.input_length) + " differs from q_out + p_out = " +
                                std::to_string(o.q + o.p));
  }
  enum_guard(in.r, "compose (inner)");
  if (o.r + in.r > 62) throw std::length_error("compose: composite randomness exceeds 62 bits");
  if (o.r > 40 || in.proof_length > (std::uint64_t{1} << 20)) throw std::length_error("compose: composite proof too long");
  const std::size_t h = in.r / 2;
  VerifierInfo info;
  info.name = "compose(" + o.name + "," + in.name + ")";
  info.r = o.r + in.r;
  info.q = in.q;
  info.p = o.p;
  info.m = o.m + (std::uint64_t{1} << o.r) * in.proof_length;
  info.sigma = 1;
  info.partition = {o.partition.r_row, o.partition.r_col, o.partition.r_shared_row + h, o.partition.r_shared_col + in.r - h};
  info.soundness = o.soundness + in.soundness;
  info.decision_size = in.decision_size;
  return info;
}

}  // namespace

CompositeVerifier::CompositeVerifier(VerifierPtr outer, PcppPtr inner)
    : Verifier(composite_info(outer, inner)), outer_(std::move(outer)), inner_(std::move(inner)) {
  r_in_ = inner_->info().r;
  h_ = r_in_ / 2;
  const std::size_t q_out = outer_->q(), q_in = info_.q;
  by_outer_.resize(q_out);
  table_.reserve((std::size_t{1} << r_in_) * q_in);
  decisions_.resize(std::size_t{1} << r_in_);
  std::map<std::string, std::shared_ptr<const Decision>> seen;
  for (std::uint64_t ri = 0; ri < (std::uint64_t{1} << r_in_); ++ri) {
    const auto qs = inner_->queries(ri);
    std::vector<int> slots(q_in, -1);
    for (std::size_t k = 0; k < q_in; ++k) {
      if (qs[k].proof) {
        table_.push_back({Slot::kInner, qs[k].index});
        by_inner_[qs[k].index].push_back({ri, k});
      } else if (qs[k].index < q_out) {
        table_.push_back({Slot::kOuter, qs[k].index});
        by_outer_[qs[k].index].push_back({ri, k});
      } else {
        table_.push_back({Slot::kParity, qs[k].index - q_out});
        by_inner_[0].push_back({ri, k});
        slots[k] = static_cast<int>(qs[k].index - q_out);
      }
    }
    auto dec = std::make_shared<CompositeDecision>(inner_->decision(ri), std::move(slots), info_.p);
    auto& d = seen[dec->fingerprint()];
    if (!d) d = dec;
    decisions_[ri] = d;
  }
  for (auto& [loc, v] : by_inner_) std::sort(v.begin(), v.end());
}

const std::vector<std::pair<std::uint64_t, std::size_t>>& CompositeVerifier::readers_of_inner(std::uint64_t loc) const {
  auto it = by_inner_.find(loc);
  if (it == by_inner_.end()) throw std::out_of_range("compose: no inner query reads location " + std::to_string(loc));
  return it->second;
}

std::uint64_t CompositeVerifier::outer_coins(std::uint64_t coins) const {
  const auto& part = info_.partition;
  const auto& op = outer_->partition();
  return op.join(part.row(coins), part.col(coins), part.shared_row(coins) & mask(op.r_shared_row),
                 part.shared_col(coins) & mask(op.r_shared_col));
}

std::uint64_t CompositeVerifier::inner_coins(std::uint64_t coins) const {
  const auto& part = info_.partition;
  const auto& op = outer_->partition();
  return (part.shared_row(coins) >> op.r_shared_row) | ((part.shared_col(coins) >> op.r_shared_col) << h_);
}

std::uint64_t CompositeVerifier::join(std::uint64_t oc, std::uint64_t ic) const {
  const auto& op = outer_->partition();
  return info_.partition.join(op.row(oc), op.col(oc), op.shared_row(oc) | ((ic & mask(h_)) << op.r_shared_row),
                              op.shared_col(oc) | ((ic >> h_) << op.r_shared_col));
}

void CompositeVerifier::queries(std::uint64_t coins, std::uint64_t* out) const {
  const std::uint64_t oc = outer_coins(coins), ic = inner_coins(coins);
  const auto loc = outer_->queries(oc);
  const std::uint64_t base = inner_offset(oc);
  for (std::size_t k = 0; k < info_.q; ++k) {
    const InnerQuery& iq = inner_query(ic, k);
    switch (iq.slot) {
      case Slot::kOuter: out[k] = loc[iq.index]; break;
      case Slot::kParity: out[k] = base; break;
      case Slot::kInner: out[k] = base + iq.index; break;
    }
  }
}

std::shared_ptr<const Predicate> CompositeVerifier::predicate(std::uint64_t coins) const {
  const std::uint64_t ic = inner_coins(coins);
  auto op = outer_->predicate(outer_coins(coins));
  std::lock_guard<std::mutex> lock(mu_cache_);
  auto& p = cache_[{ic, op}];
  if (!p) p = std::make_shared<Predicate>(decisions_[ic], info_.q, op->parities(), info_.decision_size);
  return p;
}

namespace {

class CompositeAgents : public RnlAgents {
 public:
  CompositeAgents(std::shared_ptr<const CompositeVerifier> v, AgentsPtr outer) : v_(std::move(v)), outer_(std::move(outer)) {}

  AgentList<RowConfig> row(std::uint64_t r_row, std::uint64_t shared, std::size_t k) const override {
    const auto s = unpack(shared);
    const auto& op = v_->outer().partition();
    const std::size_t h = v_->r_in_low();
    const auto& iq = v_->inner_query(s.inner, k);
    AgentList<RowConfig> out;
    if (iq.slot != CompositeVerifier::Slot::kOuter) {
      const auto& rd = v_->readers_of_inner(iq.slot == CompositeVerifier::Slot::kInner ? iq.index : 0);
      for (const auto& [ri, k2] : rd) out.list.push_back({r_row, s.row | ((ri & mask(h)) << op.r_shared_row), k2});
      out.self = position(rd, s.inner, k);
      return out;
    }
    const auto lo = outer_->row(r_row, s.outer, iq.index);
    for (std::size_t i = 0; i < lo.list.size(); ++i) {
      const auto& e = lo.list[i];
      const auto& rd = v_->readers_of_outer(e.k);
      if (i == lo.self) out.self = out.list.size() + position(rd, s.inner, k);
      for (const auto& [ri, k2] : rd) out.list.push_back({e.r_row, e.r_shared_row | ((ri & mask(h)) << op.r_shared_row), k2});
    }
    return out;
  }

  AgentList<ColConfig> col(std::uint64_t r_col, std::uint64_t shared, std::size_t k) const override {
    const auto s = unpack(shared);
    const auto& op = v_->outer().partition();
    const std::size_t h = v_->r_in_low();
    const auto& iq = v_->inner_query(s.inner, k);
    AgentList<ColConfig> out;
    if (iq.slot != CompositeVerifier::Slot::kOuter) {
      const auto& rd = v_->readers_of_inner(iq.slot == CompositeVerifier::Slot::kInner ? iq.index : 0);
      for (const auto& [ri, k2] : rd) out.list.push_back({r_col, s.col | ((ri >> h) << op.r_shared_col), k2});
      out.self = position(rd, s.inner, k);
      return out;
    }
    const auto lo = outer_->col(r_col, s.outer, iq.index);
    for (std::size_t i = 0; i < lo.list.size(); ++i) {
      const auto& e = lo.list[i];
      const auto& rd = v_->readers_of_outer(e.k);
      if (i == lo.self) out.self = out.list.size() + position(rd, s.inner, k);
      for (const auto& [ri, k2] : rd) out.list.push_back({e.r_col, e.r_shared_col | ((ri >> h) << op.r_shared_col), k2});
    }
    return out;
  }

 private:
  struct Shared {
    std::uint64_t row, col, outer, inner;
  };

  Shared unpack(std::uint64_t shared) const {
    const auto& part = v_->partition();
    const auto& op = v_->outer().partition();
    const std::uint64_t sr = shared & mask(part.r_shared_row), sc = shared >> part.r_shared_row;
    Shared s;
    s.row = sr & mask(op.r_shared_row);
    s.col = sc & mask(op.r_shared_col);
    s.outer = s.row | (s.col << op.r_shared_row);
    s.inner = (sr >> op.r_shared_row) | ((sc >> op.r_shared_col) << v_->r_in_low());
    return s;
  }

  static std::size_t position(const std::vector<std::pair<std::uint64_t, std::size_t>>& rd, std::uint64_t ri, std::size_t k) {
    const auto it = std::lower_bound(rd.begin(), rd.end(), std::make_pair(ri, k));
    if (it == rd.end() || *it != std::make_pair(ri, k)) throw std::logic_error("compose agents: configuration missing from its reader list");
    return static_cast<std::size_t>(it - rd.begin());
  }

  std::shared_ptr<const CompositeVerifier> v_;
  AgentsPtr outer_;
};

}  // namespace

Transformed compose(VerifierPtr outer, AgentsPtr outer_agents, PcppPtr inner, ComposeOptions opts) {
  if (!outer || !outer_agents || !inner) throw std::invalid_argument("compose: needs outer verifier, outer agents and inner verifier");
  const std::size_t q_out = outer->q();
  const std::size_t threshold = opts.threshold.value_or(q_out);
  if (threshold != q_out) {
    throw std::invalid_argument("compose: input threshold " + std::to_string(threshold) + " must equal q_out = " +
                                std::to_string(q_out) + ", since parity inputs are read at index j - q_out");
  }
  if (inner->info().delta > outer->info().robustness) {
    CheckResult c;
    c.property = "robustness";
    c.ok = false;
    c.detail = "delta_in = " + to_string(inner->info().delta) + " exceeds rho_out = " + to_string(outer->info().robustness);
    throw PreconditionError("compose: proximity parameter exceeds the outer robustness", c);
  }
  if (opts.verify) {
    CheckResult z = check_zero_rop(*outer);
    if (!z.ok) throw PreconditionError("compose: the outer verifier is not 0-ROP", z);
    CheckResult rnl = check_rnl(*outer, *outer_agents);
    if (!rnl.ok) throw PreconditionError("compose: the outer verifier fails RNL", rnl);
  }
  std::uint64_t first = 0;
  while (!outer->coin_valid(first)) ++first;
  if (outer->predicate(first)->decision().fingerprint() != inner->info().circuit)
    throw std::invalid_argument("compose: the inner verifier was built for a different circuit");

  auto cv = std::make_shared<CompositeVerifier>(outer, inner);
  Transformed out;
  out.verifier = cv;
  out.agents = std::make_shared<CompositeAgents>(cv, std::move(outer_agents));
  out.transform.name = "compose";
  out.transform.forward = [cv](const Proof& outer_proof) {
    const Verifier& o = cv->outer();
    if (outer_proof.size() != o.m()) throw std::invalid_argument("compose transform: proof length mismatch");
    enum_guard(o.r(), "compose transform");
    Proof p(cv->m(), 0);
    std::copy(outer_proof.begin(), outer_proof.end(), p.begin());
    std::vector<std::uint64_t> loc(o.q());
    for (std::uint64_t oc = 0; oc < (std::uint64_t{1} << o.r()); ++oc) {
      o.queries(oc, loc.data());
      const auto pred = o.predicate(oc);
      BitVector y(o.q() + pred->p());
      for (std::size_t k = 0; k < o.q(); ++k) y.set(k, (outer_proof[loc[k]] & 1) != 0);
      for (std::size_t i = 0; i < pred->p(); ++i) y.set(o.q() + i, pred->parities()[i].eval(o.partition().obliv(oc)));
      const Proof pi = cv->inner().prove(y);
      std::copy(pi.begin(), pi.end(), p.begin() + static_cast<std::ptrdiff_t>(cv->inner_offset(oc)));
    }
    return p;
  };
  if (!opts.threshold) out.notes.push_back("input threshold defaulted to q_out = " + std::to_string(q_out));
  out.notes.push_back("inner queries to parity inputs read inner location 0; their answers are ignored");
  return out;
}

}  // namespace rectpcp
