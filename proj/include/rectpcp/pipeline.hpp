#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rectpcp/pcp_core.hpp"

namespace rectpcp {

inline constexpr std::size_t kDecideMaxEnumBits = 24;
inline constexpr std::size_t kExtractMaxProofBits = 16;

// Proof of an ell x ell verifier as a matrix, and back.
BitMatrix proof_matrix(const Verifier& v, const Proof& proof);
Proof matrix_proof(const BitMatrix& m);

// Accepts iff the verifier accepts on every coin sequence.
bool fnp_machine(const Verifier& v, const Proof& proof);

struct PipelineReport {
  std::string input;  // verifier name
  std::size_t rho = 0;
  std::vector<Rational> per_shared;  // acceptance given each shared coin value
  Rational total = 0;
  Rational threshold = 0;
  bool accept = false;  // total >= threshold
  // Nanoseconds spent in each step; left out of JSON unless asked for.
  std::uint64_t ns_predicates = 0, ns_queries = 0, ns_parities = 0, ns_counting = 0;
  std::string to_json(bool timings = false) const;
};

struct RefuterOptions {
  bool verify = true;  // run check_rectangular and check_rop first
  unsigned threads = 1;
};

// Acceptance probability of the proof P * Q through per-query low-rank
// factors, rank-3 parity factors and Fourier counting, one shared value at a time.
PipelineReport refuter_report(const Verifier& v, const BitMatrix& p, const BitMatrix& q, const Rational& threshold = 1,
                              RefuterOptions opts = {});
Rational refuter_acceptance(const Verifier& v, const BitMatrix& p, const BitMatrix& q, RefuterOptions opts = {});

enum class SearchMode { kExhaustive, kSeeded };

struct DecideOptions {
  SearchMode mode = SearchMode::kExhaustive;
  std::size_t budget = 1000;  // seeded: random (P, Q) pairs
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

struct DecideResult {
  bool accept = false;
  Rational best = 0;
  BitMatrix p, q;  // witness reaching `best`
  std::uint64_t evaluated = 0;
  bool exhaustive = false;
  std::string to_json() const;
};

// Exhaustive mode enumerates (P, Q) pairs or, when fewer, the ell x ell
// matrices of rank <= rho factored exactly.
DecideResult decide(const Verifier& v, std::size_t rho, const Rational& s, DecideOptions opts = {});

struct ExtractedProof {
  BitMatrix matrix;
  std::size_t distance = 0;  // exact distance to rank <= rho
  bool rigid = false;        // distance > threshold
};

struct RigidExtractReport {
  std::size_t rho = 0;
  Rational s = 0;
  Rational threshold = 0;  // (1 - s) / q * N^2
  std::vector<ExtractedProof> accepted;
  bool any_close = false;
  DecideResult decision;
  // A close accepted proof forces decide to accept.
  bool consistent = false;
  std::string outcome() const;
  std::string to_json() const;
};

RigidExtractReport rigid_extract(const Verifier& v, std::size_t rho, const Rational& s, DecideOptions opts = {});

struct ParameterInputs {
  double n = 0;
  double r = 0;
  double tau = 0;
  double q = 0;
  double p = 0;
  double t = 0;    // decision size
  double rho = 0;  // target rank
  double omega = 1;  // constant inside the counting saving
};

struct ParameterReport {
  double budget = 0;  // n - log n
  double lhs1 = 0, lhs2 = 0;
  bool cond1 = false, cond2 = false;
  bool ok() const { return cond1 && cond2; }
  std::string to_json() const;
};

// (1 + tau)/2 * r + log(t + rho) <= n - log n and
// q + p + r - omega * (1 - tau) r / log((q + p) rho) <= n - log n; logs base 2.
ParameterReport parameter_check(const ParameterInputs& in);

// Unique accepted proof is the 2^a x 2^a identity: one query at (u, v) compared
// against the product of the parities 1 + u_i + v_i.
VerifierPtr identity_toy(std::size_t a, const Rational& soundness);

}  // namespace rectpcp
