#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rectpcp/pcp_core.hpp"
#include "rectpcp/samplers.hpp"

namespace rectpcp {

// Maps correct proofs of the old verifier to correct proofs of the new one.
struct ProofTransform {
  std::string name;
  std::function<Proof(const Proof&)> forward;
  Proof operator()(const Proof& p) const { return forward(p); }
};

struct Transformed {
  VerifierPtr verifier;
  AgentsPtr agents;  // null when the result comes without listing agents
  ProofTransform transform;
  std::vector<std::string> notes;
};

// A transform hypothesis did not hold; `evidence` is the failing check.
class PreconditionError : public std::invalid_argument {
 public:
  PreconditionError(const std::string& what, CheckResult evidence)
      : std::invalid_argument(what), evidence_(std::move(evidence)) {}
  const CheckResult& evidence() const { return evidence_; }

 private:
  CheckResult evidence_;
};

// Same decision function on every coin sequence and parity checks whose
// coefficient vectors never vary (constants may follow the shared coins).
CheckResult check_zero_rop(const Verifier& v);

struct SmoothifyOptions {
  bool verify = true;  // run check_rnl and check_rop on the input first
};

// Proof indexed by (R, k). Rows are (R_row, R_shared.row, dummy_row, k_row),
// columns (R_col, R_shared.col, dummy_col, k_col); k_row holds the high bits of k.
// Dummy coins sit above the old shared coins and are ignored by the predicate.
class SmoothVerifier : public Verifier {
 public:
  SmoothVerifier(VerifierPtr base, AgentsPtr agents, const Rational& mu);

  using Verifier::queries;
  void queries(std::uint64_t coins, std::uint64_t* out) const override;
  std::shared_ptr<const Predicate> predicate(std::uint64_t coins) const override;

  const Verifier& base() const { return *base_; }
  const Rational& mu() const { return mu_; }
  std::size_t list_size() const { return list_size_; }
  std::size_t delta() const { return delta_; }
  const std::optional<SamplerGraph>& sampler() const { return sampler_; }
  std::size_t pad_row() const { return pad_row_; }
  std::size_t pad_col() const { return pad_col_; }
  std::size_t k_row_bits() const { return kr_; }
  std::size_t k_col_bits() const { return kc_; }

  // Old coins of a new coin sequence, and the reverse with dummy coins.
  std::uint64_t base_coins(std::uint64_t coins) const;
  std::uint64_t lift(std::uint64_t base_coins, std::uint64_t dummy_row, std::uint64_t dummy_col) const;
  // New-proof location of configuration (R, k) in copy (dummy_row, dummy_col).
  std::uint64_t location(std::uint64_t base_coins, std::uint64_t dummy_row, std::uint64_t dummy_col, std::size_t k) const;
  // Closed sampler neighborhood of list index `self`, self first.
  const std::size_t* block(std::size_t self) const { return blocks_.data() + self * delta_; }

 private:
  std::uint64_t row_index(const RowConfig& c, std::uint64_t dummy_row) const;
  std::uint64_t col_index(const ColConfig& c, std::uint64_t dummy_col) const;

  VerifierPtr base_;
  AgentsPtr agents_;
  Rational mu_;
  std::size_t list_size_ = 0, delta_ = 1;
  std::optional<SamplerGraph> sampler_;
  std::size_t pad_row_ = 0, pad_col_ = 0, kr_ = 0, kc_ = 0, row_bits_ = 0;
  std::vector<std::size_t> blocks_;  // list_size * delta, self first
  mutable std::mutex mu_cache_;
  mutable std::map<std::shared_ptr<const Predicate>, std::shared_ptr<const Predicate>> cache_;
  mutable std::map<std::shared_ptr<const Decision>, std::shared_ptr<const Decision>> decisions_;
};

// Needs Boolean symbols, a full coin space, q a power of two and every
// neighbor list of the same length.
Transformed smoothify(VerifierPtr v, AgentsPtr agents, const Rational& mu, SmoothifyOptions opts = {});

// Each 2^sigma-ary symbol becomes its codeword under a systematic code with
// message length sigma; query k~ = k * block_len + j reads bit j of block k.
Transformed alphabet_reduce(VerifierPtr v, AgentsPtr agents, std::shared_ptr<const LinearCode> code);

// Predicate D'(z, y) = D_R(z) with R = Dec(y), and y a codeword; the parity
// checks are the coordinates of Enc(R). Code: r -> q.
Transformed add_rop(VerifierPtr v, AgentsPtr agents, std::shared_ptr<const LinearCode> code);

class PcppVerifier {
 public:
  struct Query {
    bool proof = false;  // false: input oracle
    std::uint64_t index = 0;
    bool operator==(const Query&) const = default;
  };
  struct Info {
    std::string name;
    std::string circuit;  // fingerprint of the circuit being verified
    std::size_t input_length = 0;
    std::uint64_t proof_length = 0;
    std::size_t r = 0;
    std::size_t q = 0;
    Rational delta = 0;
    Rational soundness = 1;
    std::size_t decision_size = 0;
  };

  explicit PcppVerifier(Info info) : info_(std::move(info)) {}
  virtual ~PcppVerifier() = default;
  const Info& info() const { return info_; }

  virtual void queries(std::uint64_t coins, Query* out) const = 0;
  // Decision over the q answers in query order.
  virtual std::shared_ptr<const Decision> decision(std::uint64_t coins) const = 0;
  // Honest proof for `input`; accepted with probability 1 when the circuit accepts it.
  virtual Proof prove(const BitVector& input) const = 0;

  // Queries with the oracle ranges validated.
  std::vector<Query> queries(std::uint64_t coins) const;
  bool accepts(const BitVector& input, const Proof& proof, std::uint64_t coins) const;
  Rational acceptance(const BitVector& input, const Proof& proof) const;

 protected:
  Info info_;
};

using PcppPtr = std::shared_ptr<const PcppVerifier>;

// Constraints sum_{a,b} A[a*|W|+b] z_{W_a} z_{W_b} + <l, z> + c = 0 over wires
// z; the first `inputs` wires are the circuit inputs, later wires are products.
struct QuadraticSystem {
  struct Constraint {
    std::uint64_t quad = 0;
    std::uint64_t linear = 0;
    bool constant = false;
  };
  std::size_t inputs = 0;
  std::size_t wires = 0;
  std::vector<std::size_t> tensor;                          // W, ascending
  std::vector<std::pair<std::size_t, std::size_t>> products;  // factors of wire inputs + i
  std::vector<Constraint> constraints;

  // Affine accepting sets give linear constraints; anything else goes through
  // the algebraic normal form with product wires.
  static QuadraticSystem from_decision(const Decision& d);
  std::uint64_t assign(std::uint64_t input) const;
  std::uint64_t tensor_word(std::uint64_t wires_value) const;
  bool satisfied(std::uint64_t wires_value) const;
};

inline constexpr std::size_t kHadamardMaxWires = 20;
inline constexpr std::size_t kHadamardMaxTensor = 4;

struct HadamardOptions {
  Rational delta{1, 4};
  Rational soundness{31, 32};
};

// Proof: f = Had(z) then g = Had(z_W (x) z_W). One run performs the linearity
// tests on f and g, the tensor consistency test, a random combination of the
// constraints and a proximity test against one input bit, in 13 queries.
class HadamardPcpp : public PcppVerifier {
 public:
  static constexpr std::size_t kQueries = 13;
  HadamardPcpp(QuadraticSystem system, HadamardOptions opts, std::string circuit);

  void queries(std::uint64_t coins, Query* out) const override;
  std::shared_ptr<const Decision> decision(std::uint64_t coins) const override;
  Proof prove(const BitVector& input) const override;
  using PcppVerifier::queries;

  const QuadraticSystem& system() const { return sys_; }

 private:
  struct Coins {
    std::uint64_t x, x2, big, big2, u, u2, rho, j;
  };
  Coins split(std::uint64_t coins) const;

  QuadraticSystem sys_;
  std::size_t omega_ = 0, jbits_ = 0;
  std::shared_ptr<const Decision> dec_[2];
};

std::shared_ptr<HadamardPcpp> hadamard_pcpp(const Decision& circuit, HadamardOptions opts = {});

// The PCPP with its input oracle fixed, as a verifier over the proof alone.
VerifierPtr pcpp_with_input(PcppPtr pcpp, const BitVector& input);

struct ComposeOptions {
  // Input-oracle indices below the threshold read the outer proof, the rest
  // read parity checks; only q_out is consistent with the parity offset.
  std::optional<std::size_t> threshold;
  bool verify = true;  // run check_zero_rop and check_rnl on the outer verifier
};

// Outer proof, then one inner proof per outer coin sequence. Coins: outer
// row and col unchanged, shared.row = (outer shared.row, low half of R_in),
// shared.col = (outer shared.col, high half of R_in). Inner queries to
// parity inputs read inner location 0 and their answer is ignored.
class CompositeVerifier : public Verifier {
 public:
  enum class Slot { kOuter, kParity, kInner };
  struct InnerQuery {
    Slot slot;
    std::uint64_t index;  // outer query, parity index or inner-proof location
  };

  CompositeVerifier(VerifierPtr outer, PcppPtr inner);

  using Verifier::queries;
  void queries(std::uint64_t coins, std::uint64_t* out) const override;
  std::shared_ptr<const Predicate> predicate(std::uint64_t coins) const override;

  const Verifier& outer() const { return *outer_; }
  const PcppVerifier& inner() const { return *inner_; }
  std::size_t r_in() const { return r_in_; }
  std::size_t r_in_low() const { return h_; }

  std::uint64_t outer_coins(std::uint64_t coins) const;
  std::uint64_t inner_coins(std::uint64_t coins) const;
  std::uint64_t join(std::uint64_t outer_coins, std::uint64_t inner_coins) const;
  const InnerQuery& inner_query(std::uint64_t r_in, std::size_t k) const { return table_[r_in * info_.q + k]; }
  std::uint64_t inner_offset(std::uint64_t outer_coins) const { return outer_->m() + outer_coins * inner_->info().proof_length; }

  // (R_in, k) pairs reading a given inner-proof location, or a given outer query index.
  const std::vector<std::pair<std::uint64_t, std::size_t>>& readers_of_inner(std::uint64_t loc) const;
  const std::vector<std::pair<std::uint64_t, std::size_t>>& readers_of_outer(std::size_t j) const { return by_outer_.at(j); }

 private:
  VerifierPtr outer_;
  PcppPtr inner_;
  std::size_t r_in_, h_;
  std::vector<InnerQuery> table_;
  std::vector<std::shared_ptr<const Decision>> decisions_;
  std::map<std::uint64_t, std::vector<std::pair<std::uint64_t, std::size_t>>> by_inner_;
  std::vector<std::vector<std::pair<std::uint64_t, std::size_t>>> by_outer_;
  mutable std::mutex mu_cache_;
  mutable std::map<std::pair<std::uint64_t, std::shared_ptr<const Predicate>>, std::shared_ptr<const Predicate>> cache_;
};

Transformed compose(VerifierPtr outer, AgentsPtr outer_agents, PcppPtr inner, ComposeOptions opts = {});

}  // namespace rectpcp
