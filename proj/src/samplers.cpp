#include "rectpcp/samplers.hpp"

#include <algorithm>
#include <bit>
#include <optional>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "rectpcp/rng.hpp"

namespace rectpcp {

namespace {

constexpr std::uint64_t kCanonicalSalt = 0x5a3c9e17d2b4f681ULL;

struct SmallRational {
  __int128 num;
  __int128 den;
};

SmallRational narrow(const Rational& a) {
  const BigInt n = boost::multiprecision::numerator(a);
  const BigInt d = boost::multiprecision::denominator(a);
  const BigInt lim = BigInt(1) << 40;
  if (n > lim || d > lim) throw std::invalid_argument("sampler alpha has too large a numerator or denominator");
  return {static_cast<__int128>(n.convert_to<std::int64_t>()), static_cast<__int128>(d.convert_to<std::int64_t>())};
}

void check_alpha(const Rational& alpha) {
  if (alpha <= 0 || alpha >= 1) throw std::invalid_argument("sampler alpha must lie strictly between 0 and 1");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Random d-regular simple graph: stubs are matched one pair at a time,
// skipping pairs that would create loops or repeated edges, with a restart
// whenever no admissible pair remains.
std::vector<std::vector<std::size_t>> random_regular(std::size_t n, std::size_t d, Rng& rng) {
  if (2 * d > n) {
    // Build the complement, which is sparser.
    auto comp = random_regular(n, n - 1 - d, rng);
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t v = 0; v < n; ++v) {
      std::vector<std::uint8_t> mark(n, 0);
      mark[v] = 1;
      for (std::size_t u : comp[v]) mark[u] = 1;
      for (std::size_t u = 0; u < n; ++u)
        if (!mark[u]) adj[v].push_back(u);
    }
    return adj;
  }
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<std::size_t> stubs;
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t k = 0; k < d; ++k) stubs.push_back(v);
    std::vector<std::set<std::size_t>> nb(n);
    bool stuck = false;
    while (!stubs.empty() && !stuck) {
      auto admissible = [&](std::size_t i, std::size_t j) {
        return stubs[i] != stubs[j] && !nb[stubs[i]].count(stubs[j]);
      };
      auto pick = [&]() -> std::optional<std::pair<std::size_t, std::size_t>> {
        for (int t = 0; t < 64; ++t) {
          const std::size_t i = rng.below(stubs.size());
          const std::size_t j = rng.below(stubs.size());
          if (admissible(i, j)) return std::pair{std::min(i, j), std::max(i, j)};
        }
        for (std::size_t i = 0; i < stubs.size(); ++i)
          for (std::size_t j = i + 1; j < stubs.size(); ++j)
            if (admissible(i, j)) return std::pair{i, j};
        return std::nullopt;
      };
      const auto match = pick();
      if (!match) {
        stuck = true;
        break;
      }
      const auto [i, j] = *match;
      const std::size_t a = stubs[i], b = stubs[j];
      nb[a].insert(b);
      nb[b].insert(a);
      stubs.erase(stubs.begin() + static_cast<std::ptrdiff_t>(j));
      stubs.erase(stubs.begin() + static_cast<std::ptrdiff_t>(i));
    }
    if (stuck) continue;
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t v = 0; v < n; ++v) adj[v].assign(nb[v].begin(), nb[v].end());
    return adj;
  }
  throw std::runtime_error("random_regular: could not complete a simple regular graph");
}

}  // namespace

SamplerGraph::SamplerGraph(std::size_t n, std::vector<std::vector<std::size_t>> adjacency, Rational alpha,
                           std::uint64_t seed)
    : n_(n), degree_(0), adj_(std::move(adjacency)), alpha_(std::move(alpha)), seed_(seed) {
  if (adj_.size() != n_) throw std::invalid_argument("SamplerGraph: adjacency size mismatch");
  if (n_ == 0) throw std::invalid_argument("SamplerGraph: empty vertex set");
  degree_ = adj_[0].size();
  if (degree_ == 0) throw std::invalid_argument("SamplerGraph: degree 0 is not allowed");
  for (std::size_t v = 0; v < n_; ++v) {
    const auto& a = adj_[v];
    if (a.size() != degree_) throw std::invalid_argument("SamplerGraph: graph is not regular");
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] >= n_ || a[i] == v) throw std::invalid_argument("SamplerGraph: bad neighbor");
      if (i > 0 && a[i] <= a[i - 1]) throw std::invalid_argument("SamplerGraph: neighbor lists must be strictly increasing");
      if (!std::binary_search(adj_[a[i]].begin(), adj_[a[i]].end(), v)) {
        throw std::invalid_argument("SamplerGraph: adjacency is not symmetric");
      }
    }
  }
}

SamplerGraph SamplerGraph::complete(std::size_t n, Rational alpha) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t u = 0; u < n; ++u)
      if (u != v) adj[v].push_back(u);
  return SamplerGraph(n, std::move(adj), std::move(alpha), 0);
}

ClosedNeighborhood closed_neighborhood(const SamplerGraph& g, std::size_t v) {
  if (v >= g.n()) throw std::out_of_range("closed_neighborhood: vertex out of range");
  ClosedNeighborhood out;
  const auto& nb = g.neighbors(v);
  out.vertices.reserve(nb.size() + 1);
  auto it = std::lower_bound(nb.begin(), nb.end(), v);
  out.vertices.assign(nb.begin(), it);
  out.position = out.vertices.size();
  out.vertices.push_back(v);
  out.vertices.insert(out.vertices.end(), it, nb.end());
  return out;
}

std::vector<Rational> deviation_profile(const SamplerGraph& g, const std::vector<std::size_t>& s) {
  std::vector<std::uint8_t> in(g.n(), 0);
  for (std::size_t u : s) in.at(u) = 1;
  const Rational frac(static_cast<long long>(std::count(in.begin(), in.end(), 1)), static_cast<long long>(g.n()));
  std::vector<Rational> out;
  for (std::size_t v = 0; v < g.n(); ++v) {
    std::size_t hit = in[v];
    for (std::size_t u : g.neighbors(v)) hit += in[u];
    const Rational d = frac - Rational(static_cast<long long>(hit), static_cast<long long>(g.delta()));
    out.push_back(d < 0 ? Rational(-d) : d);
  }
  return out;
}

SamplerVerdict verify_neighborhoods(std::size_t n, const std::vector<std::vector<std::size_t>>& closed,
                                    const Rational& alpha, std::uint64_t seed) {
  check_alpha(alpha);
  if (closed.size() != n) throw std::invalid_argument("verify_neighborhoods: one neighborhood per vertex");
  const SmallRational a = narrow(alpha);
  SamplerVerdict verdict;
  verdict.exhaustive = n <= kSamplerExhaustiveMax;

  const std::size_t words = (n + 63) / 64;
  std::vector<std::vector<std::uint64_t>> nb(n, std::vector<std::uint64_t>(words, 0));
  std::vector<std::size_t> size(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t u : closed[v]) nb[v][u / 64] |= std::uint64_t{1} << (u % 64);
    size[v] = closed[v].size();
    if (size[v] == 0) throw std::invalid_argument("verify_neighborhoods: empty neighborhood");
  }

  auto scan = [&](const std::vector<std::uint64_t>& s) {
    std::size_t s_size = 0;
    for (auto w : s) s_size += std::popcount(w);
    std::size_t bad = 0;
    for (std::size_t v = 0; v < n; ++v) {
      std::size_t hit = 0;
      for (std::size_t w = 0; w < words; ++w) hit += std::popcount(s[w] & nb[v][w]);
      __int128 dev = static_cast<__int128>(s_size) * size[v] - static_cast<__int128>(hit) * n;
      if (dev < 0) dev = -dev;
      // |S|/n - hit/size > alpha, cleared of denominators.
      if (dev * a.den > a.num * static_cast<__int128>(n) * size[v]) ++bad;
    }
    ++verdict.subsets_checked;
    if (verdict.subsets_checked == 1 || bad > verdict.worst_deviating) {
      verdict.worst_deviating = bad;
      verdict.worst_set.clear();
      for (std::size_t u = 0; u < n; ++u)
        if ((s[u / 64] >> (u % 64)) & 1) verdict.worst_set.push_back(u);
    }
    // Fewer than alpha*n deviating vertices is required.
    if (static_cast<__int128>(bad) * a.den >= a.num * static_cast<__int128>(n)) verdict.ok = false;
  };

  std::vector<std::uint64_t> s(words, 0);
  if (verdict.exhaustive) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      if (words > 0) s[0] = mask;
      scan(s);
    }
  } else {
    Rng rng(seed);
    for (std::size_t t = 0; t < kSamplerMonteCarloSamples; ++t) {
      for (std::size_t w = 0; w < words; ++w) s[w] = rng.next();
      if (n % 64) s[words - 1] &= (std::uint64_t{1} << (n % 64)) - 1;
      scan(s);
    }
  }
  return verdict;
}

SamplerVerdict verify_sampler(const SamplerGraph& g, const Rational& alpha, std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> closed(g.n());
  for (std::size_t v = 0; v < g.n(); ++v) closed[v] = closed_neighborhood(g, v).vertices;
  return verify_neighborhoods(g.n(), closed, alpha, seed);
}

BigInt sampler_target_degree(const Rational& alpha) {
  const Rational x = Rational(4) / (alpha * alpha * alpha * alpha);
  const BigInt num = boost::multiprecision::numerator(x);
  const BigInt den = boost::multiprecision::denominator(x);
  return (num + den - 1) / den;
}

SamplerGraph build_sampler(std::size_t n, const Rational& alpha, std::uint64_t seed) {
  check_alpha(alpha);
  if (n < 2) throw std::invalid_argument("build_sampler: need at least two vertices");
  const BigInt target = sampler_target_degree(alpha);
  if (target >= n - 1) return SamplerGraph::complete(n, alpha);
  std::size_t d = target.convert_to<std::size_t>();
  if ((n * d) % 2 == 1) ++d;
  Rng rng(seed);
  SamplerVerdict last;
  for (int attempt = 0; attempt < kSamplerRetryBudget; ++attempt) {
    SamplerGraph g(n, random_regular(n, d, rng), alpha, seed);
    last = verify_sampler(g, alpha, mix64(seed + static_cast<std::uint64_t>(attempt)));
    if (last.ok) return g;
  }
  throw std::runtime_error("build_sampler: no verified sampler within the retry budget; last evidence " + last.to_json());
}

SamplerGraph canonical_sampler(std::size_t n, const Rational& alpha) {
  const std::string key = std::to_string(n) + ":" + to_string(alpha);
  return build_sampler(n, alpha, mix64(fnv1a(key) ^ kCanonicalSalt));
}

std::string SamplerVerdict::to_json() const {
  nlohmann::ordered_json j;
  j["ok"] = ok;
  j["exhaustive"] = exhaustive;
  j["subsets_checked"] = subsets_checked;
  j["worst_deviating"] = worst_deviating;
  j["worst_set"] = worst_set;
  return j.dump();
}

}  // namespace rectpcp
