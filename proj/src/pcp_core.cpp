#include "rectpcp/pcp_core.hpp"

#include <algorithm>
#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "json.hpp"
#include "rectpcp/rng.hpp"

namespace rectpcp {

namespace {

std::uint64_t fnv1a_bytes(const std::uint8_t* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

class ConstDecision : public Decision {
 public:
  ConstDecision(bool value, std::size_t arity) : value_(value), arity_(arity) {}
  std::size_t arity() const override { return arity_; }
  bool eval(const BitVector&) const override { return value_; }
  std::string fingerprint() const override { return std::string("const:") + (value_ ? "1:" : "0:") + std::to_string(arity_); }

 private:
  bool value_;
  std::size_t arity_;
};

void check_enum_guard(const Verifier& v) {
  if (v.r() > kEnumMaxCoins) {
    throw std::length_error("randomness " + std::to_string(v.r()) + " exceeds the enumeration guard of " +
                            std::to_string(kEnumMaxCoins) + " coins");
  }
}

std::vector<std::uint64_t> location_table(const Verifier& v) {
  check_enum_guard(v);
  const std::uint64_t n = std::uint64_t{1} << v.r();
  std::vector<std::uint64_t> loc(n * v.q(), 0);
  for (std::uint64_t c = 0; c < n; ++c)
    if (v.coin_valid(c)) v.queries(c, loc.data() + c * v.q());
  return loc;
}

CheckResult fail(std::string property, std::uint64_t coins, std::size_t k, std::string detail) {
  return CheckResult{std::move(property), false, Configuration{coins, k}, std::move(detail)};
}

}  // namespace

Rational RandomnessPartition::tau() const {
  return r() == 0 ? Rational(0) : Rational(static_cast<long long>(r_shared()), static_cast<long long>(r()));
}

void RandomnessPartition::validate() const {
  if (r_row != r_col) throw std::invalid_argument("randomness partition needs r_row == r_col");
  if (r() > 63) throw std::length_error("randomness partition exceeds 63 coins");
}

TableDecision::TableDecision(std::vector<std::uint8_t> truth_table) : table_(std::move(truth_table)) {
  if (table_.empty() || !std::has_single_bit(table_.size())) {
    throw std::invalid_argument("truth table length must be a power of two");
  }
  arity_ = static_cast<std::size_t>(std::countr_zero(table_.size()));
  if (arity_ > kTruthTableMaxArity) throw std::length_error("truth table arity exceeds guard");
  for (auto& b : table_) b = b ? 1 : 0;
  fingerprint_ = "table:" + std::to_string(arity_) + ":" + hex64(fnv1a_bytes(table_.data(), table_.size()));
}

Predicate::Predicate(std::shared_ptr<const Decision> decision, std::size_t answer_bits, std::vector<ParityCheck> parities,
                     std::size_t size)
    : decision_(std::move(decision)), answer_bits_(answer_bits), parities_(std::move(parities)), size_(size) {
  if (!decision_) throw std::invalid_argument("predicate needs a decision");
  if (decision_->arity() != arity()) {
    throw std::invalid_argument("decision arity " + std::to_string(decision_->arity()) + " does not match " +
                                std::to_string(answer_bits_) + " answer bits + " + std::to_string(parities_.size()) +
                                " parities");
  }
}

BitVector Predicate::input(const BitVector& answers, std::uint64_t obliv) const {
  if (answers.size() != answer_bits_) throw std::invalid_argument("predicate: answer width mismatch");
  BitVector in(arity());
  std::copy(answers.words().begin(), answers.words().end(), in.words().begin());
  for (std::size_t j = 0; j < parities_.size(); ++j) {
    if (parities_[j].eval(obliv)) in.set(answer_bits_ + j, true);
  }
  return in;
}

std::vector<std::uint8_t> Predicate::truth_table() const {
  if (arity() > kTruthTableMaxArity) throw std::length_error("predicate arity exceeds truth-table guard");
  if (auto t = dynamic_cast<const TableDecision*>(decision_.get())) return t->table();
  std::vector<std::uint8_t> tt(std::size_t{1} << arity());
  for (std::uint64_t x = 0; x < tt.size(); ++x) tt[x] = decision_->eval(BitVector::from_uint(x, arity())) ? 1 : 0;
  return tt;
}

bool same_predicate(const Predicate& a, const Predicate& b) {
  if (&a == &b) return true;
  if (a.answer_bits() != b.answer_bits() || a.parities() != b.parities()) return false;
  if (a.decision_ptr() == b.decision_ptr()) return true;
  const std::size_t n = a.arity();
  if (n <= 16) return a.truth_table() == b.truth_table();
  if (a.decision().fingerprint() != b.decision().fingerprint()) return false;
  Rng rng(0x70726564ULL);
  for (int t = 0; t < 256; ++t) {
    BitVector x(n);
    for (std::size_t i = 0; i < n; ++i) x.set(i, rng.bit());
    if (a.eval(x) != b.eval(x)) return false;
  }
  return true;
}

std::shared_ptr<const Predicate> constant_predicate(bool value, std::size_t answer_bits, std::vector<ParityCheck> parities) {
  const std::size_t arity = answer_bits + parities.size();
  return std::make_shared<Predicate>(std::make_shared<ConstDecision>(value, arity), answer_bits, std::move(parities), 1);
}

Verifier::Verifier(VerifierInfo info) : info_(std::move(info)) {
  if (info_.r != info_.partition.r()) throw std::invalid_argument("verifier: r does not match the partition");
  if (info_.r > 63) throw std::length_error("verifier: more than 63 coins");
  if (info_.q == 0) throw std::invalid_argument("verifier: q must be positive");
  if (info_.sigma == 0 || info_.sigma > 32) throw std::invalid_argument("verifier: sigma must be in 1..32");
}

std::uint64_t Verifier::valid_coin_count() const {
  if (full_coin_space()) return std::uint64_t{1} << info_.r;
  check_enum_guard(*this);
  std::uint64_t n = 0;
  for (std::uint64_t c = 0; c < (std::uint64_t{1} << info_.r); ++c) n += coin_valid(c) ? 1 : 0;
  return n;
}

std::vector<std::uint64_t> Verifier::queries(std::uint64_t coins) const {
  std::vector<std::uint64_t> out(info_.q);
  queries(coins, out.data());
  return out;
}

BitVector Verifier::answers(const Proof& proof, const std::uint64_t* locations) const {
  const std::size_t s = info_.sigma;
  BitVector a(info_.q * s);
  for (std::size_t k = 0; k < info_.q; ++k) {
    const std::uint32_t sym = proof[locations[k]];
    for (std::size_t b = 0; b < s; ++b) {
      if ((sym >> b) & 1) a.set(k * s + b, true);
    }
  }
  return a;
}

bool Verifier::accepts(const Proof& proof, std::uint64_t coins) const {
  std::vector<std::uint64_t> loc(info_.q);
  queries(coins, loc.data());
  const auto pred = predicate(coins);
  return pred->accepts(answers(proof, loc.data()), info_.partition.obliv(coins));
}

TableVerifier::TableVerifier(VerifierInfo info, std::vector<std::uint64_t> locations,
                             std::vector<std::shared_ptr<const Predicate>> predicates, std::vector<std::uint32_t> predicate_of)
    : Verifier(std::move(info)),
      locations_(std::move(locations)),
      predicates_(std::move(predicates)),
      predicate_of_(std::move(predicate_of)) {
  if (info_.r > kEnumMaxCoins) throw std::length_error("table verifier exceeds the enumeration guard");
  const std::uint64_t n = std::uint64_t{1} << info_.r;
  if (locations_.size() != n * info_.q) throw std::invalid_argument("table verifier: location table has wrong size");
  if (predicate_of_.size() != n) throw std::invalid_argument("table verifier: predicate index table has wrong size");
  for (std::uint64_t l : locations_) {
    if (l >= info_.m) throw std::invalid_argument("table verifier: location out of range");
  }
  for (std::uint32_t i : predicate_of_) {
    if (i >= predicates_.size()) throw std::invalid_argument("table verifier: predicate index out of range");
  }
  for (const auto& p : predicates_) {
    if (p->answer_bits() != info_.q * info_.sigma) throw std::invalid_argument("table verifier: predicate answer width mismatch");
    if (p->p() != info_.p) throw std::invalid_argument("table verifier: predicate parity count mismatch");
  }
}

std::shared_ptr<TableVerifier> TableVerifier::from(const Verifier& v) {
  if (!v.full_coin_space()) throw std::invalid_argument("TableVerifier::from needs the full coin space");
  std::vector<std::uint64_t> loc = location_table(v);
  const std::uint64_t n = std::uint64_t{1} << v.r();
  std::vector<std::shared_ptr<const Predicate>> preds;
  std::map<const Predicate*, std::uint32_t> index;
  std::vector<std::uint32_t> of(n);
  for (std::uint64_t c = 0; c < n; ++c) {
    auto p = v.predicate(c);
    auto [it, fresh] = index.emplace(p.get(), static_cast<std::uint32_t>(preds.size()));
    if (fresh) preds.push_back(p);
    of[c] = it->second;
  }
  return std::make_shared<TableVerifier>(v.info(), std::move(loc), std::move(preds), std::move(of));
}

void TableVerifier::queries(std::uint64_t coins, std::uint64_t* out) const {
  std::copy_n(locations_.begin() + static_cast<std::ptrdiff_t>(coins * info_.q), info_.q, out);
}

std::shared_ptr<const Predicate> TableVerifier::predicate(std::uint64_t coins) const {
  return predicates_[predicate_of_[coins]];
}

std::string encode_base64(const std::vector<std::uint8_t>& bytes) {
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<std::vector<std::uint8_t>::const_iterator, 6, 8>>;
  std::string out(It(bytes.begin()), It(bytes.end()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

std::vector<std::uint8_t> decode_base64(const std::string& text) {
  using namespace boost::archive::iterators;
  using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
  std::string body = text;
  std::size_t pad = 0;
  while (!body.empty() && body.back() == '=') {
    body.pop_back();
    ++pad;
  }
  if (pad > 2 || (body.size() + pad) % 4 != 0) throw std::invalid_argument("base64: bad length");
  for (char c : body) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '/') throw std::invalid_argument("base64: bad character");
  }
  std::vector<std::uint8_t> out;
  try {
    for (It it(body.begin()), end(body.end()); it != end; ++it) out.push_back(static_cast<std::uint8_t>(*it));
  } catch (const std::exception&) {
    throw std::invalid_argument("base64: malformed payload");
  }
  out.resize(body.size() * 6 / 8);
  return out;
}

namespace {

std::vector<std::uint8_t> pack_u64(const std::vector<std::uint64_t>& xs) {
  std::vector<std::uint8_t> b(xs.size() * 8);
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (int j = 0; j < 8; ++j) b[i * 8 + j] = static_cast<std::uint8_t>(xs[i] >> (8 * j));
  return b;
}

std::vector<std::uint64_t> unpack_u64(const std::vector<std::uint8_t>& b) {
  if (b.size() % 8) throw std::invalid_argument("payload length is not a multiple of 8");
  std::vector<std::uint64_t> xs(b.size() / 8, 0);
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (int j = 0; j < 8; ++j) xs[i] |= std::uint64_t{b[i * 8 + j]} << (8 * j);
  return xs;
}

std::vector<std::uint8_t> pack_bits(const std::vector<std::uint8_t>& bits) {
  std::vector<std::uint8_t> b((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) b[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  return b;
}

std::vector<std::uint8_t> unpack_bits(const std::vector<std::uint8_t>& b, std::size_t n) {
  if (b.size() != (n + 7) / 8) throw std::invalid_argument("bit payload has the wrong length");
  std::vector<std::uint8_t> bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = (b[i / 8] >> (i % 8)) & 1;
  return bits;
}

}  // namespace

std::string TableVerifier::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "rectpcp.table_verifier";
  j["version"] = 1;
  const auto& in = info_;
  j["info"] = {{"name", in.name},
               {"r", in.r},
               {"q", in.q},
               {"p", in.p},
               {"m", in.m},
               {"ell", in.ell},
               {"sigma", in.sigma},
               {"partition",
                {{"r_row", in.partition.r_row},
                 {"r_col", in.partition.r_col},
                 {"r_shared_row", in.partition.r_shared_row},
                 {"r_shared_col", in.partition.r_shared_col}}},
               {"soundness", to_string(in.soundness)},
               {"robustness", to_string(in.robustness)},
               {"smooth", in.smooth},
               {"decision_size", in.decision_size}};
  j["locations"] = encode_base64(pack_u64(locations_));
  nlohmann::ordered_json preds = nlohmann::ordered_json::array();
  for (const auto& p : predicates_) {
    nlohmann::ordered_json pj;
    pj["answer_bits"] = p->answer_bits();
    pj["size"] = p->size();
    nlohmann::ordered_json par = nlohmann::ordered_json::array();
    for (const auto& c : p->parities()) par.push_back({{"coeff", c.coeff}, {"constant", c.constant}});
    pj["parities"] = par;
    pj["truth_table"] = encode_base64(pack_bits(p->truth_table()));
    preds.push_back(pj);
  }
  j["predicates"] = preds;
  std::vector<std::uint64_t> of(predicate_of_.begin(), predicate_of_.end());
  j["predicate_of"] = encode_base64(pack_u64(of));
  return j.dump();
}

std::shared_ptr<TableVerifier> TableVerifier::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.at("format") != "rectpcp.table_verifier") throw std::invalid_argument("not a table verifier document");
  if (j.at("version") != 1) throw std::invalid_argument("unsupported table verifier version");
  const auto& ij = j.at("info");
  VerifierInfo info;
  info.name = ij.at("name").get<std::string>();
  info.r = ij.at("r").get<std::size_t>();
  info.q = ij.at("q").get<std::size_t>();
  info.p = ij.at("p").get<std::size_t>();
  info.m = ij.at("m").get<std::uint64_t>();
  info.ell = ij.at("ell").get<std::uint64_t>();
  info.sigma = ij.at("sigma").get<std::size_t>();
  const auto& pj = ij.at("partition");
  info.partition = {pj.at("r_row").get<std::size_t>(), pj.at("r_col").get<std::size_t>(),
                    pj.at("r_shared_row").get<std::size_t>(), pj.at("r_shared_col").get<std::size_t>()};
  info.soundness = parse_rational(ij.at("soundness").get<std::string>());
  info.robustness = parse_rational(ij.at("robustness").get<std::string>());
  info.smooth = ij.at("smooth").get<bool>();
  info.decision_size = ij.at("decision_size").get<std::size_t>();
  if (info.r > kEnumMaxCoins) throw std::length_error("table verifier exceeds the enumeration guard");

  std::vector<std::shared_ptr<const Predicate>> preds;
  for (const auto& p : j.at("predicates")) {
    std::vector<ParityCheck> par;
    for (const auto& c : p.at("parities")) par.push_back({c.at("coeff").get<std::uint64_t>(), c.at("constant").get<bool>()});
    const std::size_t answer_bits = p.at("answer_bits").get<std::size_t>();
    const std::size_t arity = answer_bits + par.size();
    if (arity > kTruthTableMaxArity) throw std::length_error("predicate arity exceeds truth-table guard");
    auto tt = unpack_bits(decode_base64(p.at("truth_table").get<std::string>()), std::size_t{1} << arity);
    preds.push_back(std::make_shared<Predicate>(std::make_shared<TableDecision>(std::move(tt)), answer_bits, std::move(par),
                                                p.at("size").get<std::size_t>()));
  }
  auto locs = unpack_u64(decode_base64(j.at("locations").get<std::string>()));
  auto of64 = unpack_u64(decode_base64(j.at("predicate_of").get<std::string>()));
  std::vector<std::uint32_t> of(of64.begin(), of64.end());
  return std::make_shared<TableVerifier>(std::move(info), std::move(locs), std::move(preds), std::move(of));
}

AgentList<RowConfig> IdentityAgents::row(std::uint64_t r_row, std::uint64_t shared, std::size_t k) const {
  return {{RowConfig{r_row, shared & RandomnessPartition::mask(part_.r_shared_row), k}}, 0};
}

AgentList<ColConfig> IdentityAgents::col(std::uint64_t r_col, std::uint64_t shared, std::size_t k) const {
  return {{ColConfig{r_col, shared >> part_.r_shared_row, k}}, 0};
}

std::string CheckResult::to_json() const {
  nlohmann::ordered_json j;
  j["property"] = property;
  j["ok"] = ok;
  if (witness) {
    j["witness"] = {{"coins", witness->coins}, {"k", witness->k}};
  } else {
    j["witness"] = nullptr;
  }
  j["detail"] = detail;
  return j.dump();
}

Rational emulate(const Verifier& v, const Proof& proof) {
  check_enum_guard(v);
  if (proof.size() != v.m()) throw std::invalid_argument("emulate: proof length does not match m");
  const std::uint64_t n = std::uint64_t{1} << v.r();
  std::vector<std::uint64_t> loc(v.q());
  std::uint64_t accepted = 0;
  for (std::uint64_t c = 0; c < n; ++c) {
    if (!v.coin_valid(c)) continue;
    v.queries(c, loc.data());
    const auto pred = v.predicate(c);
    accepted += pred->accepts(v.answers(proof, loc.data()), v.partition().obliv(c)) ? 1 : 0;
  }
  return Rational{BigInt(accepted), BigInt(v.valid_coin_count())};
}

ConfigGraph config_graph(const Verifier& v) {
  if (v.m() == 0) throw std::invalid_argument("config_graph: empty proof");
  ConfigGraph g;
  g.coins = std::uint64_t{1} << v.r();
  g.q = v.q();
  g.m = v.m();
  g.location = location_table(v);
  g.right_degree.assign(v.m(), 0);
  for (std::uint64_t c = 0; c < g.coins; ++c) {
    if (!v.coin_valid(c)) continue;
    for (std::size_t k = 0; k < g.q; ++k) {
      const std::uint64_t l = g.location[c * g.q + k];
      if (l >= v.m()) throw std::logic_error("config_graph: query out of range");
      ++g.right_degree[l];
    }
  }
  return g;
}

SmoothnessReport measure_smoothness(const Verifier& v) {
  ConfigGraph g = config_graph(v);
  SmoothnessReport rep;
  rep.hits = std::move(g.right_degree);
  rep.total = v.valid_coin_count() * g.q;
  rep.smooth = std::all_of(rep.hits.begin(), rep.hits.end(), [&](std::uint64_t h) { return h == rep.hits[0]; });
  return rep;
}

CheckResult check_rectangular(const Verifier& v) {
  const std::string prop = "rectangular";
  const auto& part = v.partition();
  const std::uint64_t ell = v.info().ell;
  if (ell == 0 || ell * ell != v.m()) {
    return CheckResult{prop, false, std::nullopt, "proof length is not declared as an ell x ell matrix"};
  }
  const auto loc = location_table(v);
  const std::size_t q = v.q();
  const std::uint64_t n = std::uint64_t{1} << v.r();
  for (std::uint64_t c = 0; c < n; ++c) {
    if (!v.coin_valid(c)) continue;
    const std::uint64_t no_col = part.join(part.row(c), 0, part.shared_row(c), part.shared_col(c));
    const std::uint64_t no_row = part.join(0, part.col(c), part.shared_row(c), part.shared_col(c));
    if (!v.coin_valid(no_col) || !v.coin_valid(no_row)) {
      throw std::invalid_argument("check_rectangular: zeroing a coin part leaves the sample space");
    }
    for (std::size_t k = 0; k < q; ++k) {
      const std::uint64_t l = loc[c * q + k];
      if (l / ell != loc[no_col * q + k] / ell) {
        return fail(prop, c, k, "row index depends on the column coins");
      }
      if (l % ell != loc[no_row * q + k] % ell) {
        return fail(prop, c, k, "column index depends on the row coins");
      }
    }
  }
  return CheckResult{prop, true, std::nullopt, ""};
}

CheckResult check_rop(const Verifier& v) {
  const std::string prop = "rop";
  check_enum_guard(v);
  const auto& part = v.partition();
  const std::uint64_t n = std::uint64_t{1} << v.r();
  std::map<std::pair<const Predicate*, const Predicate*>, bool> memo;
  for (std::uint64_t c = 0; c < n; ++c) {
    if (!v.coin_valid(c)) continue;
    const std::uint64_t base = c & ~RandomnessPartition::mask(part.r_obliv());
    if (!v.coin_valid(base)) throw std::invalid_argument("check_rop: zeroing the oblivious coins leaves the sample space");
    const auto a = v.predicate(c);
    const auto b = v.predicate(base);
    if (a.get() == b.get()) continue;
    auto key = std::make_pair(a.get(), b.get());
    auto it = memo.find(key);
    if (it == memo.end()) it = memo.emplace(key, same_predicate(*a, *b)).first;
    if (!it->second) return fail(prop, c, 0, "predicate or parity checks depend on the oblivious coins");
  }
  return CheckResult{prop, true, std::nullopt, ""};
}

CheckResult check_rnl(const Verifier& v, const RnlAgents& agents) {
  const std::string prop = "rnl";
  const auto& part = v.partition();
  const auto loc = location_table(v);
  const std::size_t q = v.q();
  const std::uint64_t n = std::uint64_t{1} << v.r();

  std::vector<std::vector<Configuration>> neighbors(v.m());
  for (std::uint64_t c = 0; c < n; ++c) {
    if (!v.coin_valid(c)) continue;
    for (std::size_t k = 0; k < q; ++k) neighbors[loc[c * q + k]].push_back({c, k});
  }

  std::vector<std::vector<Configuration>> first_list(v.m());
  std::vector<std::uint8_t> seen(v.m(), 0);
  for (std::uint64_t c = 0; c < n; ++c) {
    if (!v.coin_valid(c)) continue;
    for (std::size_t k = 0; k < q; ++k) {
      const auto rl = agents.row(part.row(c), part.shared(c), k);
      const auto cl = agents.col(part.col(c), part.shared(c), k);
      if (rl.list.size() != cl.list.size()) return fail(prop, c, k, "row and column lists differ in length");
      std::vector<Configuration> zipped;
      zipped.reserve(rl.list.size());
      for (std::size_t i = 0; i < rl.list.size(); ++i) {
        const RowConfig& a = rl.list[i];
        const ColConfig& b = cl.list[i];
        if (a.k != b.k) return fail(prop, c, k, "row and column lists disagree on k' at entry " + std::to_string(i));
        if (a.k >= q || a.r_row > RandomnessPartition::mask(part.r_row) || b.r_col > RandomnessPartition::mask(part.r_col) ||
            a.r_shared_row > RandomnessPartition::mask(part.r_shared_row) ||
            b.r_shared_col > RandomnessPartition::mask(part.r_shared_col)) {
          return fail(prop, c, k, "agent entry out of range at entry " + std::to_string(i));
        }
        zipped.push_back({part.join(a.r_row, b.r_col, a.r_shared_row, b.r_shared_col), a.k});
      }
      const std::uint64_t l = loc[c * q + k];
      if (seen[l]) {
        if (zipped != first_list[l]) return fail(prop, c, k, "neighbor lists are not order-synchronized");
      } else {
        std::vector<Configuration> sorted = zipped;
        std::sort(sorted.begin(), sorted.end());
        if (sorted != neighbors[l]) return fail(prop, c, k, "zipped list is not the neighbor set of the queried location");
        seen[l] = 1;
        first_list[l] = zipped;
      }
      if (rl.self != cl.self) return fail(prop, c, k, "row and column agents report different self indices");
      if (rl.self >= zipped.size() || zipped[rl.self] != Configuration{c, k}) {
        return fail(prop, c, k, "reported self index does not point at the configuration");
      }
    }
  }
  return CheckResult{prop, true, std::nullopt, ""};
}

RobustDistance robust_distance(const Verifier& v, const Proof& proof, std::uint64_t coins) {
  const auto loc = v.queries(coins);
  const auto pred = v.predicate(coins);
  const std::size_t n = pred->arity();
  if (n > kRobustMaxArity) throw std::length_error("robust_distance: q + p exceeds the enumeration guard");
  const std::uint64_t word = pred->input(v.answers(proof, loc.data()), v.partition().obliv(coins)).to_uint();
  const auto tt = pred->truth_table();
  std::size_t best = n + 1;
  for (std::uint64_t a = 0; a < tt.size(); ++a) {
    if (tt[a]) best = std::min<std::size_t>(best, std::popcount(a ^ word));
  }
  if (best == n + 1) return {Rational(1), true};
  return {n == 0 ? Rational(0) : Rational(static_cast<long long>(best), static_cast<long long>(n)), false};
}

Rational robust_soundness_error(const Verifier& v, const Proof& proof, const Rational& rho) {
  check_enum_guard(v);
  const std::uint64_t n = std::uint64_t{1} << v.r();
  std::uint64_t close = 0;
  for (std::uint64_t c = 0; c < n; ++c) {
    if (!v.coin_valid(c)) continue;
    const RobustDistance d = robust_distance(v, proof, c);
    if (!d.unsatisfiable && d.distance <= rho) ++close;
  }
  return Rational{BigInt(close), BigInt(v.valid_coin_count())};
}

ProofSearch exhaustive_max_acceptance(const Verifier& v, std::size_t max_bits) {
  const std::size_t bits = v.m() * v.info().sigma;
  if (bits > max_bits) throw std::length_error("exhaustive_max_acceptance: proof has too many bits");
  check_enum_guard(v);
  const std::uint64_t n = std::uint64_t{1} << v.r();
  const auto loc = location_table(v);
  std::vector<std::shared_ptr<const Predicate>> preds(n);
  for (std::uint64_t c = 0; c < n; ++c)
    if (v.coin_valid(c)) preds[c] = v.predicate(c);
  const std::size_t s = v.info().sigma;
  ProofSearch best{Rational(-1), {}};
  Proof proof(v.m());
  for (std::uint64_t x = 0; x < (std::uint64_t{1} << bits); ++x) {
    for (std::uint64_t i = 0; i < v.m(); ++i) proof[i] = static_cast<std::uint32_t>((x >> (i * s)) & ((1u << s) - 1));
    std::uint64_t acc = 0;
    for (std::uint64_t c = 0; c < n; ++c) {
      if (!preds[c]) continue;
      acc += preds[c]->accepts(v.answers(proof, loc.data() + c * v.q()), v.partition().obliv(c)) ? 1 : 0;
    }
    const Rational p{BigInt(acc), BigInt(v.valid_coin_count())};
    if (p > best.best) best = {p, proof};
  }
  return best;
}

}  // namespace rectpcp
