#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rectpcp/f2_linalg.hpp"
#include "rectpcp/rational.hpp"

namespace rectpcp {

inline constexpr std::size_t kEnumMaxCoins = 24;
inline constexpr std::size_t kRobustMaxArity = 20;
inline constexpr std::size_t kTruthTableMaxArity = 20;

// Coins are packed into an integer as row | col | shared.row | shared.col,
// starting at bit 0.
struct RandomnessPartition {
  std::size_t r_row = 0;
  std::size_t r_col = 0;
  std::size_t r_shared_row = 0;
  std::size_t r_shared_col = 0;

  std::size_t r() const { return r_row + r_col + r_shared_row + r_shared_col; }
  std::size_t r_obliv() const { return r_row + r_col; }
  std::size_t r_shared() const { return r_shared_row + r_shared_col; }
  Rational tau() const;
  void validate() const;

  std::uint64_t row(std::uint64_t coins) const { return coins & mask(r_row); }
  std::uint64_t col(std::uint64_t coins) const { return (coins >> r_row) & mask(r_col); }
  std::uint64_t shared_row(std::uint64_t coins) const { return (coins >> r_obliv()) & mask(r_shared_row); }
  std::uint64_t shared_col(std::uint64_t coins) const {
    return (coins >> (r_obliv() + r_shared_row)) & mask(r_shared_col);
  }
  // shared.row in the low bits, shared.col above it.
  std::uint64_t shared(std::uint64_t coins) const { return coins >> r_obliv(); }
  // row in the low bits, col above it.
  std::uint64_t obliv(std::uint64_t coins) const { return coins & mask(r_obliv()); }

  std::uint64_t join(std::uint64_t row, std::uint64_t col, std::uint64_t shared_row, std::uint64_t shared_col) const {
    return row | (col << r_row) | (shared_row << r_obliv()) | (shared_col << (r_obliv() + r_shared_row));
  }
  std::uint64_t join_shared(std::uint64_t row, std::uint64_t col, std::uint64_t shared) const {
    return row | (col << r_row) | (shared << r_obliv());
  }

  static std::uint64_t mask(std::size_t bits) { return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1; }
  bool operator==(const RandomnessPartition&) const = default;
};

// Affine function <coeff, R_obliv> + constant over the oblivious coins.
struct ParityCheck {
  std::uint64_t coeff = 0;
  bool constant = false;
  bool eval(std::uint64_t obliv) const { return ((std::popcount(coeff & obliv) & 1) != 0) != constant; }
  bool operator==(const ParityCheck&) const = default;
};

class Decision {
 public:
  virtual ~Decision() = default;
  virtual std::size_t arity() const = 0;
  virtual bool eval(const BitVector& input) const = 0;
  // Describes the function; equal fingerprints are expected to mean equal functions.
  virtual std::string fingerprint() const = 0;
};

class TableDecision : public Decision {
 public:
  explicit TableDecision(std::vector<std::uint8_t> truth_table);
  std::size_t arity() const override { return arity_; }
  bool eval(const BitVector& input) const override { return table_[input.to_uint()] != 0; }
  std::string fingerprint() const override { return fingerprint_; }
  const std::vector<std::uint8_t>& table() const { return table_; }

 private:
  std::size_t arity_;
  std::vector<std::uint8_t> table_;
  std::string fingerprint_;
};

// Decision predicate over answer bits (q symbols of sigma bits, query-major)
// followed by p parity bits.
class Predicate {
 public:
  Predicate(std::shared_ptr<const Decision> decision, std::size_t answer_bits, std::vector<ParityCheck> parities,
            std::size_t size = 0);

  std::size_t answer_bits() const { return answer_bits_; }
  std::size_t p() const { return parities_.size(); }
  std::size_t arity() const { return answer_bits_ + parities_.size(); }
  std::size_t size() const { return size_; }
  const std::vector<ParityCheck>& parities() const { return parities_; }
  const Decision& decision() const { return *decision_; }
  std::shared_ptr<const Decision> decision_ptr() const { return decision_; }

  // Full input (answers then parity values).
  BitVector input(const BitVector& answers, std::uint64_t obliv) const;
  bool accepts(const BitVector& answers, std::uint64_t obliv) const { return decision_->eval(input(answers, obliv)); }
  bool eval(const BitVector& full_input) const { return decision_->eval(full_input); }
  std::vector<std::uint8_t> truth_table() const;

 private:
  std::shared_ptr<const Decision> decision_;
  std::size_t answer_bits_;
  std::vector<ParityCheck> parities_;
  std::size_t size_;
};

// Same answer width, same parity checks and the same decision function
// (full truth-table comparison up to 16 inputs, fingerprint plus seeded spot
// checks above).
bool same_predicate(const Predicate& a, const Predicate& b);

std::shared_ptr<const Predicate> constant_predicate(bool value, std::size_t answer_bits,
                                                    std::vector<ParityCheck> parities = {});

struct VerifierInfo {
  std::string name;
  std::size_t r = 0;
  std::size_t q = 0;
  std::size_t p = 0;
  std::uint64_t m = 0;
  std::uint64_t ell = 0;  // side length when the proof is read as an ell x ell matrix, else 0
  std::size_t sigma = 1;
  RandomnessPartition partition;
  Rational soundness = 1;
  Rational robustness = 0;
  bool smooth = false;
  std::size_t decision_size = 0;
};

using Proof = std::vector<std::uint32_t>;

class Verifier {
 public:
  explicit Verifier(VerifierInfo info);
  virtual ~Verifier() = default;

  const VerifierInfo& info() const { return info_; }
  std::size_t r() const { return info_.r; }
  std::size_t q() const { return info_.q; }
  std::uint64_t m() const { return info_.m; }
  const RandomnessPartition& partition() const { return info_.partition; }

  virtual void queries(std::uint64_t coins, std::uint64_t* out) const = 0;
  virtual std::shared_ptr<const Predicate> predicate(std::uint64_t coins) const = 0;
  // Coin sequences outside the sample space are skipped by every enumerator.
  virtual bool coin_valid(std::uint64_t) const { return true; }
  virtual bool full_coin_space() const { return true; }
  std::uint64_t valid_coin_count() const;

  std::vector<std::uint64_t> queries(std::uint64_t coins) const;
  BitVector answers(const Proof& proof, const std::uint64_t* locations) const;
  bool accepts(const Proof& proof, std::uint64_t coins) const;

 protected:
  VerifierInfo info_;
};

using VerifierPtr = std::shared_ptr<const Verifier>;

// Every coin sequence mapped explicitly to its locations and predicate.
class TableVerifier : public Verifier {
 public:
  TableVerifier(VerifierInfo info, std::vector<std::uint64_t> locations, std::vector<std::shared_ptr<const Predicate>> predicates,
                std::vector<std::uint32_t> predicate_of);
  // Tabulates any verifier (r within the enumeration guard).
  static std::shared_ptr<TableVerifier> from(const Verifier& v);

  using Verifier::queries;
  void queries(std::uint64_t coins, std::uint64_t* out) const override;
  std::shared_ptr<const Predicate> predicate(std::uint64_t coins) const override;

  const std::vector<std::uint64_t>& locations() const { return locations_; }
  const std::vector<std::shared_ptr<const Predicate>>& predicates() const { return predicates_; }
  const std::vector<std::uint32_t>& predicate_of() const { return predicate_of_; }

  std::string to_json() const;
  static std::shared_ptr<TableVerifier> from_json(const std::string& text);

 private:
  std::vector<std::uint64_t> locations_;  // 2^r * q
  std::vector<std::shared_ptr<const Predicate>> predicates_;
  std::vector<std::uint32_t> predicate_of_;  // 2^r
};

struct Configuration {
  std::uint64_t coins = 0;
  std::size_t k = 0;
  auto operator<=>(const Configuration&) const = default;
};

struct RowConfig {
  std::uint64_t r_row = 0;
  std::uint64_t r_shared_row = 0;
  std::size_t k = 0;
  auto operator<=>(const RowConfig&) const = default;
};

struct ColConfig {
  std::uint64_t r_col = 0;
  std::uint64_t r_shared_col = 0;
  std::size_t k = 0;
  auto operator<=>(const ColConfig&) const = default;
};

template <class T>
struct AgentList {
  std::vector<T> list;
  std::size_t self = 0;
};

class RnlAgents {
 public:
  virtual ~RnlAgents() = default;
  // `shared` packs shared.row in the low bits and shared.col above it.
  virtual AgentList<RowConfig> row(std::uint64_t r_row, std::uint64_t shared, std::size_t k) const = 0;
  virtual AgentList<ColConfig> col(std::uint64_t r_col, std::uint64_t shared, std::size_t k) const = 0;
};

using AgentsPtr = std::shared_ptr<const RnlAgents>;

// Agents that list only the configuration itself; valid exactly when no two
// configurations share a location.
class IdentityAgents : public RnlAgents {
 public:
  explicit IdentityAgents(RandomnessPartition part) : part_(part) {}
  AgentList<RowConfig> row(std::uint64_t r_row, std::uint64_t shared, std::size_t k) const override;
  AgentList<ColConfig> col(std::uint64_t r_col, std::uint64_t shared, std::size_t k) const override;

 private:
  RandomnessPartition part_;
};

struct CheckResult {
  std::string property;
  bool ok = true;
  std::optional<Configuration> witness;
  std::string detail;
  std::string to_json() const;
};

Rational emulate(const Verifier& v, const Proof& proof);

struct ConfigGraph {
  std::uint64_t coins = 0;  // 2^r left vertices
  std::size_t q = 0;
  std::uint64_t m = 0;
  std::vector<std::uint64_t> location;       // coins * q entries
  std::vector<std::uint64_t> right_degree;   // m entries
};

ConfigGraph config_graph(const Verifier& v);

struct SmoothnessReport {
  std::vector<std::uint64_t> hits;  // per location
  std::uint64_t total = 0;          // 2^r * q
  bool smooth = false;
  Rational probability(std::uint64_t i) const { return Rational(BigInt(hits[i]), BigInt(total)); }
};

SmoothnessReport measure_smoothness(const Verifier& v);

CheckResult check_rectangular(const Verifier& v);
CheckResult check_rop(const Verifier& v);
CheckResult check_rnl(const Verifier& v, const RnlAgents& agents);

struct RobustDistance {
  Rational distance = 0;
  bool unsatisfiable = false;
};

// Minimum relative distance from (answers, parities) to an accepting input.
RobustDistance robust_distance(const Verifier& v, const Proof& proof, std::uint64_t coins);
// Fraction of coin sequences whose input is within distance rho of acceptance.
Rational robust_soundness_error(const Verifier& v, const Proof& proof, const Rational& rho);

struct ProofSearch {
  Rational best = 0;
  Proof proof;
};

// Maximum acceptance probability over all proofs (m * sigma <= max_bits).
ProofSearch exhaustive_max_acceptance(const Verifier& v, std::size_t max_bits = 20);

std::string encode_base64(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> decode_base64(const std::string& text);

}  // namespace rectpcp
