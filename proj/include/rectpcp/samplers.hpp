#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rectpcp/rational.hpp"

namespace rectpcp {

inline constexpr std::size_t kSamplerExhaustiveMax = 20;
inline constexpr std::size_t kSamplerMonteCarloSamples = 100000;
inline constexpr int kSamplerRetryBudget = 64;

// A (Delta-1)-regular simple graph; every vertex also carries an implicit
// self-loop, so closed neighborhoods have size Delta = degree + 1.
class SamplerGraph {
 public:
  SamplerGraph(std::size_t n, std::vector<std::vector<std::size_t>> adjacency, Rational alpha, std::uint64_t seed);
  static SamplerGraph complete(std::size_t n, Rational alpha);

  std::size_t n() const { return n_; }
  std::size_t degree() const { return degree_; }
  std::size_t delta() const { return degree_ + 1; }
  const Rational& alpha() const { return alpha_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<std::size_t>& neighbors(std::size_t v) const { return adj_.at(v); }
  bool is_complete() const { return degree_ + 1 == n_; }

 private:
  std::size_t n_;
  std::size_t degree_;
  std::vector<std::vector<std::size_t>> adj_;
  Rational alpha_;
  std::uint64_t seed_;
};

struct ClosedNeighborhood {
  std::vector<std::size_t> vertices;  // sorted
  std::size_t position = 0;           // index of v in `vertices`
};

ClosedNeighborhood closed_neighborhood(const SamplerGraph& g, std::size_t v);

// | |S|/n - |closed(v) & S| / Delta | for every vertex v.
std::vector<Rational> deviation_profile(const SamplerGraph& g, const std::vector<std::size_t>& s);

struct SamplerVerdict {
  bool ok = true;
  bool exhaustive = true;
  std::size_t subsets_checked = 0;
  // Subset with the most deviating vertices (first in scan order on ties).
  std::vector<std::size_t> worst_set;
  std::size_t worst_deviating = 0;
  std::string to_json() const;
};

// Sampler property test with strict inequalities, on arbitrary closed neighborhoods.
SamplerVerdict verify_neighborhoods(std::size_t n, const std::vector<std::vector<std::size_t>>& closed,
                                    const Rational& alpha, std::uint64_t seed = 0);
SamplerVerdict verify_sampler(const SamplerGraph& g, const Rational& alpha, std::uint64_t seed = 0);

SamplerGraph build_sampler(std::size_t n, const Rational& alpha, std::uint64_t seed);

// Degree suggested by the explicit construction: ceil(4 / alpha^4).
BigInt sampler_target_degree(const Rational& alpha);

// Deterministic sampler used by smoothification, seeded from (n, alpha).
SamplerGraph canonical_sampler(std::size_t n, const Rational& alpha);

}  // namespace rectpcp
