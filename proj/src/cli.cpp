#include "rectpcp/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "rectpcp/lowrank_count.hpp"
#include "rectpcp/pipeline.hpp"
#include "rectpcp/rectcsp.hpp"
#include "rectpcp/rigidity.hpp"
#include "rectpcp/rng.hpp"
#include "rectpcp/transforms.hpp"
#include "rectpcp/verifiers.hpp"

namespace rectpcp::cli {

namespace {

enum class Type { kUint, kRational, kString, kBool };

struct ParamSpec {
  const char* key;
  Type type;
  bool required = false;
  std::vector<std::string> allowed = {};
};

const std::map<std::string, std::vector<ParamSpec>>& verifier_params() {
  static const std::map<std::string, std::vector<ParamSpec>> specs{
      {"blr", {{"m", Type::kUint, true}}},
      {"line", {{"m", Type::kUint, true}, {"field", Type::kUint, true}, {"lambda", Type::kRational}, {"seed", Type::kUint}}},
      {"shift",
       {{"a_row", Type::kUint},
        {"a_col", Type::kUint},
        {"shared_row", Type::kUint},
        {"shared_col", Type::kUint},
        {"q", Type::kUint},
        {"predicate", Type::kString, false, {"true", "false", "random", "equal"}},
        {"seed", Type::kUint},
        {"soundness", Type::kRational}}},
      {"identity", {{"a", Type::kUint, true}, {"soundness", Type::kRational}}},
      {"table", {{"path", Type::kString, true}}},
  };
  return specs;
}

const std::map<std::string, std::vector<ParamSpec>>& transform_params() {
  static const std::map<std::string, std::vector<ParamSpec>> specs{
      {"identity", {}},
      {"smoothify", {{"mu", Type::kRational}, {"verify", Type::kBool}}},
      {"alphabet_reduce", {{"n", Type::kUint, true}, {"seed", Type::kUint}, {"min_distance", Type::kUint}}},
      {"add_rop", {{"n", Type::kUint}, {"seed", Type::kUint}, {"min_distance", Type::kUint}}},
      {"compose",
       {{"threshold", Type::kUint}, {"delta", Type::kRational}, {"soundness", Type::kRational}, {"verify", Type::kBool}}},
  };
  return specs;
}

std::string join(const std::vector<std::string>& names) {
  std::string s;
  for (const auto& n : names) s += (s.empty() ? "" : ", ") + n;
  return s;
}

void require_keys(const Json& obj, const std::string& path, const std::vector<std::string>& known) {
  if (!obj.is_object()) throw SchemaError(path, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw SchemaError(path + "/" + key, "unknown key (expected one of: " + join(known) + ")");
    }
  }
}

void validate_params(const Json& params, const std::string& path, const std::vector<ParamSpec>& specs) {
  std::vector<std::string> known;
  for (const auto& s : specs) known.emplace_back(s.key);
  require_keys(params, path, known);
  for (const auto& s : specs) {
    const std::string at = path + "/" + s.key;
    if (!params.contains(s.key)) {
      if (s.required) throw SchemaError(at, "missing required parameter");
      continue;
    }
    const Json& v = params.at(s.key);
    switch (s.type) {
      case Type::kUint:
        if (!v.is_number_unsigned()) throw SchemaError(at, "expected a non-negative integer");
        break;
      case Type::kBool:
        if (!v.is_boolean()) throw SchemaError(at, "expected true or false");
        break;
      case Type::kString:
        if (!v.is_string()) throw SchemaError(at, "expected a string");
        if (!s.allowed.empty() && std::find(s.allowed.begin(), s.allowed.end(), v.get<std::string>()) == s.allowed.end()) {
          throw SchemaError(at, "expected one of: " + join(s.allowed));
        }
        break;
      case Type::kRational:
        if (!v.is_string() && !v.is_number()) throw SchemaError(at, "expected a rational such as \"1/2\"");
        try {
          parse_rational(v.is_string() ? v.get<std::string>() : v.dump());
        } catch (const std::exception& e) {
          throw SchemaError(at, e.what());
        }
        break;
    }
  }
}

std::uint64_t get_uint(const Json& p, const char* key, std::uint64_t def) {
  return p.contains(key) ? p.at(key).get<std::uint64_t>() : def;
}

Rational get_rational(const Json& p, const char* key, const Rational& def) {
  if (!p.contains(key)) return def;
  const Json& v = p.at(key);
  return parse_rational(v.is_string() ? v.get<std::string>() : v.dump());
}

bool get_bool(const Json& p, const char* key, bool def) { return p.contains(key) ? p.at(key).get<bool>() : def; }

std::string get_string(const Json& p, const char* key, const std::string& def) {
  return p.contains(key) ? p.at(key).get<std::string>() : def;
}

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os || !(os << text)) throw std::runtime_error("cannot write " + path);
}

std::string hex_digest(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

Json info_json(const VerifierInfo& in) {
  Json j;
  j["name"] = in.name;
  j["r"] = in.r;
  j["q"] = in.q;
  j["p"] = in.p;
  j["m"] = in.m;
  j["ell"] = in.ell;
  j["sigma"] = in.sigma;
  j["partition"] = {{"r_row", in.partition.r_row},
                    {"r_col", in.partition.r_col},
                    {"r_shared_row", in.partition.r_shared_row},
                    {"r_shared_col", in.partition.r_shared_col},
                    {"tau", to_string(in.partition.tau())}};
  j["soundness"] = to_string(in.soundness);
  j["robustness"] = to_string(in.robustness);
  j["smooth"] = in.smooth;
  j["decision_size"] = in.decision_size;
  return j;
}

std::shared_ptr<const Predicate> shift_predicate(const std::string& kind, std::size_t q, std::uint64_t seed) {
  if (kind == "true" || kind == "false") return constant_predicate(kind == "true", q);
  std::vector<std::uint8_t> tt(std::size_t{1} << q);
  Rng rng(mix64(seed));
  for (std::size_t x = 0; x < tt.size(); ++x) {
    tt[x] = kind == "random" ? rng.bit() : (x == 0 || x == tt.size() - 1);
  }
  return std::make_shared<Predicate>(std::make_shared<TableDecision>(std::move(tt)), q, std::vector<ParityCheck>{});
}

[[noreturn]] void missing_agents(const std::string& step) {
  throw PreconditionError(step + " needs neighbor-listing agents",
                          CheckResult{"rnl", false, std::nullopt, "an earlier step dropped the listing agents"});
}

Transformed apply(const PlanStep& step, const Built& b, std::uint64_t seed) {
  const Json& p = step.params;
  const VerifierPtr& v = b.verifier;
  if (step.name == "identity") {
    return {v, b.agents, {"identity", [](const Proof& x) { return x; }}, {}};
  }
  if (step.name == "smoothify") {
    if (!b.agents) missing_agents(step.name);
    SmoothifyOptions o;
    o.verify = get_bool(p, "verify", true);
    return smoothify(v, b.agents, get_rational(p, "mu", Rational{1, 2}), o);
  }
  if (step.name == "alphabet_reduce") {
    auto code = std::make_shared<LinearCode>(
        LinearCode::random_systematic(v->info().sigma, get_uint(p, "n", 0), get_uint(p, "seed", seed), get_uint(p, "min_distance", 1)));
    return alphabet_reduce(v, b.agents, code);
  }
  if (step.name == "add_rop") {
    auto code = std::make_shared<LinearCode>(
        LinearCode::random_systematic(v->r(), get_uint(p, "n", v->q()), get_uint(p, "seed", seed), get_uint(p, "min_distance", 1)));
    return add_rop(v, b.agents, code);
  }
  // compose
  if (!b.agents) missing_agents(step.name);
  HadamardOptions h;
  h.delta = get_rational(p, "delta", h.delta);
  h.soundness = get_rational(p, "soundness", h.soundness);
  ComposeOptions o;
  if (p.contains("threshold")) o.threshold = get_uint(p, "threshold", 0);
  o.verify = get_bool(p, "verify", true);
  return compose(v, b.agents, hadamard_pcpp(v->predicate(0)->decision(), h), o);
}

Proof random_proof(const Verifier& v, std::uint64_t seed) {
  Rng rng(mix64(seed));
  Proof proof(v.m());
  const std::uint64_t mask = RandomnessPartition::mask(v.info().sigma);
  for (auto& x : proof) x = static_cast<std::uint32_t>(rng.next() & mask);
  return proof;
}

Json parse_embedded(const std::string& text) { return Json::parse(text); }

struct Globals {
  bool json = false;
  bool quiet = false;
  unsigned threads = 1;
  std::uint64_t seed = 1;
};

struct Source {
  std::string plan;
  std::string kind;
  std::optional<std::uint64_t> m, field;
  std::vector<std::string> params;
  std::vector<std::string> transforms;
};

void add_source(CLI::App* sub, Source& s) {
  sub->add_option("--plan", s.plan, "Plan file (JSON)");
  sub->add_option("--verifier", s.kind, "Verifier kind: " + join(kVerifierKinds));
  sub->add_option("--m", s.m, "Dimension parameter m");
  sub->add_option("--field", s.field, "Field order for the line verifier");
  sub->add_option("--param", s.params, "Extra verifier parameter key=value");
  sub->add_option("--transform", s.transforms, "Transform applied in order with default parameters");
}

Json param_value(const std::string& text) {
  if (!text.empty() && std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); })) {
    return std::stoull(text);
  }
  if (text == "true" || text == "false") return text == "true";
  return text;
}

Plan source_plan(const Source& s, const std::vector<std::string>& checks) {
  if (!s.plan.empty()) {
    if (!s.kind.empty() || s.m || s.field || !s.params.empty() || !s.transforms.empty()) {
      throw CLI::ValidationError("--plan", "cannot be combined with verifier or transform flags");
    }
    Plan plan = parse_plan(Json::parse(read_file(s.plan)));
    if (!checks.empty()) plan.checks = checks;
    return plan;
  }
  if (s.kind.empty()) throw CLI::RequiredError("--plan or --verifier");
  Json doc;
  Json params = Json::object();
  if (s.m) params["m"] = *s.m;
  if (s.field) params["field"] = *s.field;
  for (const auto& kv : s.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--param", "expected key=value, got " + kv);
    params[kv.substr(0, eq)] = param_value(kv.substr(eq + 1));
  }
  doc["verifier"] = {{"kind", s.kind}, {"params", params}};
  Json steps = Json::array();
  for (const auto& t : s.transforms) steps.push_back({{"name", t}});
  doc["transforms"] = steps;
  doc["checks"] = checks;
  return parse_plan(doc);
}

void emit(const Globals& g, const Json& report, const std::string& human, std::ostream& out, const std::string& path = {}) {
  const std::string text = report.dump(2) + "\n";
  if (!path.empty()) write_file(path, text);
  if (g.json) {
    out << text;
  } else if (!g.quiet) {
    out << human;
  }
}

Json header(const std::string& command, const Globals& g) {
  Json j;
  j["schema"] = "rectpcp." + command + "/1";
  j["seed"] = g.seed;
  return j;
}

BitMatrix read_matrix(const std::string& path, const std::string& format) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return format == "binary" ? read_binary(is) : read_text(is);
}

Digraph read_graph(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_digraph(is);
}

BitMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  BitMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m.set(i, j, rng.bit());
  return m;
}

int cmd_check(const Globals& g, const Source& s, const std::vector<std::string>& props, std::ostream& out) {
  Plan plan = source_plan(s, props);
  if (plan.checks.empty()) plan.checks = {"rectangular"};
  const Built b = build(plan, g.seed);
  Json rep = header("check", g);
  rep["verifier"] = info_json(b.verifier->info());
  rep["agents"] = b.agents_kind;
  rep["steps"] = b.steps;
  Json checks = Json::array();
  bool all = true;
  std::string human;
  for (const auto& name : plan.checks) {
    bool ok = false;
    checks.push_back(run_check(b, name, g.seed, ok));
    all = all && ok;
    human += name + ": " + (ok ? "pass" : "FAIL") + "\n";
  }
  rep["checks"] = checks;
  rep["ok"] = all;
  emit(g, rep, human + "check " + b.verifier->info().name + ": " + (all ? "pass" : "FAIL") + "\n", out, plan.report_path);
  return all ? kPass : kCheckFailed;
}

int cmd_transform(const Globals& g, const Source& s, const std::string& out_path, std::ostream& out) {
  Plan plan = source_plan(s, {});
  if (!out_path.empty()) plan.verifier_path = out_path;
  const Built b = build(plan, g.seed);
  const std::string table = TableVerifier::from(*b.verifier)->to_json();
  Json rep = header("transform", g);
  rep["verifier"] = info_json(b.verifier->info());
  rep["agents"] = b.agents_kind;
  rep["steps"] = b.steps;
  if (b.honest) {
    rep["honest_acceptance"] = to_string(emulate(*b.verifier, *b.honest));
  } else {
    rep["honest_acceptance"] = nullptr;
  }
  rep["table_digest"] = hex_digest(table);
  rep["table_bytes"] = table.size();
  if (!plan.verifier_path.empty()) write_file(plan.verifier_path, table);
  emit(g, rep, "transform " + b.verifier->info().name + ": table " + hex_digest(table) + "\n", out, plan.report_path);
  return kPass;
}

int cmd_count(const Globals& g, const std::string& a_path, const std::string& b_path, const std::string& backend,
              const std::string& format, bool timings, std::ostream& out) {
  const BitMatrix a = read_matrix(a_path, format), b = read_matrix(b_path, format);
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("count: A is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " but B is " +
                                std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Json rep = header("count", g);
  rep["a"] = {{"rows", a.rows()}, {"cols", a.cols()}};
  rep["b"] = {{"rows", b.rows()}, {"cols", b.cols()}};
  rep["backend"] = backend;
  Json t;
  std::optional<std::uint64_t> naive, bucketed;
  auto timed = [&](const char* name, auto&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t x = f();
    t[name] = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
    return x;
  };
  if (backend != "bucketed") naive = timed("naive", [&] { return count_ones_naive(a, b); });
  if (backend != "naive") bucketed = timed("bucketed", [&] { return count_ones_bucketed(a, b); });
  if (naive) rep["naive"] = *naive;
  if (bucketed) rep["bucketed"] = *bucketed;
  const bool agree = !naive || !bucketed || *naive == *bucketed;
  if (naive && bucketed) rep["agree"] = agree;
  if (timings) rep["timing_ns"] = t;
  std::string human = "ones:";
  if (naive) human += " naive " + std::to_string(*naive);
  if (bucketed) human += " bucketed " + std::to_string(*bucketed);
  emit(g, rep, human + (agree ? "" : " (DISAGREE)") + "\n", out);
  return agree ? kPass : kCheckFailed;
}

inline constexpr std::uint64_t kBruteMaxEdges = std::uint64_t{1} << 24;

int cmd_maxcut(const Globals& g, const std::string& g1_path, const std::string& g2_path, const std::string& random,
               std::size_t rank_bound, std::ostream& out) {
  Digraph g1, g2;
  if (!random.empty()) {
    if (!g1_path.empty() || !g2_path.empty()) throw CLI::ValidationError("--random", "cannot be combined with --g1/--g2");
    std::vector<std::size_t> dims;
    std::stringstream ss(random);
    for (std::string part; std::getline(ss, part, ',');) {
      if (part.empty() || !std::all_of(part.begin(), part.end(), [](unsigned char c) { return std::isdigit(c); })) {
        throw CLI::ValidationError("--random", "expected n1,m1,n2,m2");
      }
      dims.push_back(std::stoull(part));
    }
    if (dims.size() != 4) throw CLI::ValidationError("--random", "expected n1,m1,n2,m2");
    g1 = random_digraph(dims[0], dims[1], mix64(g.seed));
    g2 = random_digraph(dims[2], dims[3], mix64(g.seed + 1));
  } else {
    if (g1_path.empty() || g2_path.empty()) throw CLI::RequiredError("--g1 and --g2, or --random");
    g1 = read_graph(g1_path);
    g2 = read_graph(g2_path);
  }
  if (g1.m() * g2.m() > kBruteMaxEdges) throw std::length_error("maxcut: product graph exceeds the brute-force edge guard");
  const ProductMaxcutInstance inst(g1, g2);
  Rng rng(mix64(g.seed + 2));
  const BitMatrix p = random_matrix(g1.n, rank_bound, rng), q = random_matrix(rank_bound, g2.n, rng);
  const BitMatrix s = matmul(p, q);
  const std::uint64_t direct = cut_value(inst, s), lowrank = cut_value_lowrank(inst, p, q);
  const std::uint64_t brute = brute_cut_value(product_graph(g1, g2), flatten(s));
  const bool agree = direct == lowrank && direct == brute;
  Json rep = header("maxcut", g);
  rep["g1"] = {{"n", g1.n}, {"m", g1.m()}};
  rep["g2"] = {{"n", g2.n}, {"m", g2.m()}};
  rep["rank_bound"] = rank_bound;
  rep["rank"] = rank(s);
  rep["cut_value"] = direct;
  rep["cut_value_lowrank"] = lowrank;
  rep["brute_cut_value"] = brute;
  rep["agree"] = agree;
  emit(g, rep,
       "cut " + std::to_string(direct) + " lowrank " + std::to_string(lowrank) + " brute " + std::to_string(brute) +
           (agree ? "" : " (DISAGREE)") + "\n",
       out);
  return agree ? kPass : kCheckFailed;
}

struct PipelineArgs {
  std::string mode = "refute";
  std::size_t rho = 1;
  std::string threshold;
  std::string search = "exhaustive";
  std::size_t budget = 1000;
};

int cmd_pipeline(const Globals& g, const Source& s, const PipelineArgs& a, std::ostream& out) {
  const Plan plan = source_plan(s, {});
  const Built b = build(plan, g.seed);
  const Verifier& v = *b.verifier;
  const Rational threshold = a.threshold.empty() ? v.info().soundness : parse_rational(a.threshold);
  Json rep = header("pipeline_run", g);
  rep["mode"] = a.mode;
  rep["verifier"] = info_json(v.info());
  rep["steps"] = b.steps;
  DecideOptions d;
  d.mode = a.search == "seeded" ? SearchMode::kSeeded : SearchMode::kExhaustive;
  d.budget = a.budget;
  d.seed = g.seed;
  d.threads = g.threads;
  int code = kPass;
  std::string human;
  if (a.mode == "refute") {
    if (v.info().ell == 0) throw std::invalid_argument("pipeline: the verifier proof is not a square matrix");
    Rng rng(mix64(g.seed));
    const BitMatrix p = random_matrix(v.info().ell, a.rho, rng), q = random_matrix(a.rho, v.info().ell, rng);
    RefuterOptions o;
    o.threads = g.threads;
    const PipelineReport r = refuter_report(v, p, q, threshold, o);
    const Rational direct = emulate(v, matrix_proof(matmul(p, q)));
    rep["refuter"] = parse_embedded(r.to_json());
    rep["emulate"] = to_string(direct);
    rep["exact_match"] = direct == r.total;
    code = direct == r.total ? kPass : kCheckFailed;
    human = "refuter " + to_string(r.total) + " emulate " + to_string(direct) + (code == kPass ? " (match)" : " (MISMATCH)") + "\n";
  } else if (a.mode == "decide") {
    const DecideResult r = decide(v, a.rho, threshold, d);
    rep["decide"] = parse_embedded(r.to_json());
    human = std::string("decide: ") + (r.accept ? "accept" : "reject") + " best " + to_string(r.best) + "\n";
  } else {
    const RigidExtractReport r = rigid_extract(v, a.rho, threshold, d);
    rep["extract"] = parse_embedded(r.to_json());
    code = r.consistent ? kPass : kCheckFailed;
    human = "extract: " + r.outcome() + (r.consistent ? "" : " (INCONSISTENT)") + "\n";
  }
  emit(g, rep, human, out, plan.report_path);
  return code;
}

int cmd_rigidity(const Globals& g, const std::string& path, const std::string& format, std::optional<std::size_t> identity,
                 std::size_t max_rho, std::size_t budget, std::ostream& out) {
  if (path.empty() == !identity) throw CLI::ValidationError("--matrix", "give exactly one of --matrix and --identity");
  const BitMatrix m = identity ? BitMatrix::identity(*identity) : read_matrix(path, format);
  const RigidityReport r = rigidity_report(m, max_rho, budget, g.seed);
  Json rep = header("rigidity", g);
  const Json body = parse_embedded(r.to_json());
  for (const auto& [k, v] : body.items()) rep[k] = v;
  std::string human;
  for (const auto& row : r.table) {
    human += "rho " + std::to_string(row.rho) + ": distance " + std::to_string(row.distance) + (row.exact ? " (exact)" : " (upper bound)") + "\n";
  }
  emit(g, rep, human, out);
  return kPass;
}

}  // namespace

Plan parse_plan(const Json& doc) {
  require_keys(doc, "", {"verifier", "transforms", "checks", "outputs"});
  if (!doc.contains("verifier")) throw SchemaError("/verifier", "missing required key");
  const Json& vj = doc.at("verifier");
  require_keys(vj, "/verifier", {"kind", "params"});
  if (!vj.contains("kind") || !vj.at("kind").is_string()) throw SchemaError("/verifier/kind", "expected a verifier kind string");
  Plan plan;
  plan.kind = vj.at("kind").get<std::string>();
  const auto vs = verifier_params().find(plan.kind);
  if (vs == verifier_params().end()) throw SchemaError("/verifier/kind", "unknown kind (expected one of: " + join(kVerifierKinds) + ")");
  if (vj.contains("params")) plan.params = vj.at("params");
  validate_params(plan.params, "/verifier/params", vs->second);

  if (doc.contains("transforms")) {
    const Json& ts = doc.at("transforms");
    if (!ts.is_array()) throw SchemaError("/transforms", "expected an array");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const std::string at = "/transforms/" + std::to_string(i);
      require_keys(ts[i], at, {"name", "params"});
      if (!ts[i].contains("name") || !ts[i].at("name").is_string()) throw SchemaError(at + "/name", "expected a transform name");
      PlanStep step;
      step.name = ts[i].at("name").get<std::string>();
      const auto entry = transform_params().find(step.name);
      if (entry == transform_params().end()) {
        throw SchemaError(at + "/name", "unknown transform (expected one of: " + join(kTransformNames) + ")");
      }
      if (ts[i].contains("params")) step.params = ts[i].at("params");
      validate_params(step.params, at + "/params", entry->second);
      plan.transforms.push_back(std::move(step));
    }
  }
  if (doc.contains("checks")) {
    const Json& cs = doc.at("checks");
    if (!cs.is_array()) throw SchemaError("/checks", "expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string at = "/checks/" + std::to_string(i);
      if (!cs[i].is_string()) throw SchemaError(at, "expected a check name");
      const auto name = cs[i].get<std::string>();
      if (std::find(kCheckNames.begin(), kCheckNames.end(), name) == kCheckNames.end()) {
        throw SchemaError(at, "unknown check (expected one of: " + join(kCheckNames) + ")");
      }
      plan.checks.push_back(name);
    }
  }
  if (doc.contains("outputs")) {
    const Json& o = doc.at("outputs");
    require_keys(o, "/outputs", {"report", "verifier"});
    for (const char* key : {"report", "verifier"}) {
      if (o.contains(key) && !o.at(key).is_string()) throw SchemaError(std::string("/outputs/") + key, "expected a path string");
    }
    plan.report_path = get_string(o, "report", "");
    plan.verifier_path = get_string(o, "verifier", "");
  }
  return plan;
}

Built build(const Plan& plan, std::uint64_t seed) {
  Built b;
  const Json& p = plan.params;
  b.agents_kind = "identity";
  if (plan.kind == "blr") {
    auto v = blr_verifier(get_uint(p, "m", 0));
    b.honest = v->linear_proof(1);
    b.agents = std::make_shared<IdentityAgents>(v->partition());
    b.verifier = v;
  } else if (plan.kind == "line") {
    auto field = FiniteField::get(static_cast<unsigned>(get_uint(p, "field", 0)));
    auto v = line_query_pattern(build_biased_set(field, get_uint(p, "m", 0), get_rational(p, "lambda", Rational{1, 2}), get_uint(p, "seed", seed)));
    b.honest = Proof(v->m(), 0);
    b.agents = line_rnl_agents(v);
    b.agents_kind = "line";
    b.verifier = v;
  } else if (plan.kind == "shift") {
    ShiftOptions o;
    o.a_row = get_uint(p, "a_row", o.a_row);
    o.a_col = get_uint(p, "a_col", o.a_col);
    o.r_shared_row = get_uint(p, "shared_row", 0);
    o.r_shared_col = get_uint(p, "shared_col", 0);
    o.q = get_uint(p, "q", o.q);
    o.seed = get_uint(p, "seed", seed);
    o.soundness = get_rational(p, "soundness", o.soundness);
    if (o.q == 0 || o.q > kTruthTableMaxArity) throw std::invalid_argument("shift: q must lie in 1.." + std::to_string(kTruthTableMaxArity));
    const std::string pred = get_string(p, "predicate", "true");
    o.predicate = shift_predicate(pred, o.q, o.seed);
    auto v = shift_verifier(o);
    if (pred == "true" || pred == "equal") b.honest = Proof(v->m(), 0);
    b.agents = shift_rnl_agents(v);
    b.agents_kind = "shift";
    b.verifier = v;
  } else if (plan.kind == "identity") {
    const std::size_t a = get_uint(p, "a", 0);
    if (a == 0 || a > 8) throw std::invalid_argument("identity: a must lie in 1..8");
    auto v = identity_toy(a, get_rational(p, "soundness", Rational{1, 2}));
    b.honest = matrix_proof(BitMatrix::identity(std::size_t{1} << a));
    b.agents = std::make_shared<IdentityAgents>(v->partition());
    b.verifier = v;
  } else {
    auto v = TableVerifier::from_json(read_file(get_string(p, "path", "")));
    b.agents = std::make_shared<IdentityAgents>(v->partition());
    b.verifier = v;
  }

  for (const auto& step : plan.transforms) {
    Transformed t = apply(step, b, seed);
    if (b.honest) b.honest = t.transform(*b.honest);
    Json s;
    s["name"] = step.name;
    s["proof_transform"] = t.transform.name;
    s["notes"] = t.notes;
    s["verifier"] = info_json(t.verifier->info());
    b.steps.push_back(s);
    b.verifier = t.verifier;
    if (step.name != "identity") b.agents_kind = t.agents ? step.name : "none";
    b.agents = t.agents;
  }
  return b;
}

Json run_check(const Built& b, const std::string& name, std::uint64_t seed, bool& ok) {
  const Verifier& v = *b.verifier;
  if (name == "rectangular" || name == "rop" || name == "zero-rop" || name == "rnl") {
    CheckResult r;
    if (name == "rectangular") {
      r = check_rectangular(v);
    } else if (name == "rop") {
      r = check_rop(v);
    } else if (name == "zero-rop") {
      r = check_zero_rop(v);
    } else if (b.agents) {
      r = check_rnl(v, *b.agents);
    } else {
      r = CheckResult{"rnl", false, std::nullopt, "no neighbor-listing agents for this verifier"};
    }
    ok = r.ok;
    return parse_embedded(r.to_json());
  }
  Json j;
  j["property"] = name;
  if (name == "smooth") {
    const SmoothnessReport s = measure_smoothness(v);
    const auto [lo, hi] = std::minmax_element(s.hits.begin(), s.hits.end());
    const auto lo_at = static_cast<std::uint64_t>(lo - s.hits.begin()), hi_at = static_cast<std::uint64_t>(hi - s.hits.begin());
    ok = s.smooth;
    j["ok"] = ok;
    j["total"] = s.total;
    j["min"] = {{"location", lo_at}, {"hits", *lo}, {"probability", to_string(s.probability(lo_at))}};
    j["max"] = {{"location", hi_at}, {"hits", *hi}, {"probability", to_string(s.probability(hi_at))}};
    j["witness"] = ok ? Json(nullptr) : Json{{"locations", {lo_at, hi_at}}};
    return j;
  }
  // robust: distance histogram of a seeded random proof
  if (v.r() > kEnumMaxCoins) {
    throw std::length_error("robust: randomness " + std::to_string(v.r()) + " exceeds the enumeration guard");
  }
  const Proof proof = random_proof(v, seed);
  std::map<Rational, std::uint64_t> hist;
  std::uint64_t unsat = 0;
  for (std::uint64_t c = 0; c < (std::uint64_t{1} << v.r()); ++c) {
    if (!v.coin_valid(c)) continue;
    const RobustDistance d = robust_distance(v, proof, c);
    if (d.unsatisfiable) {
      ++unsat;
    } else {
      ++hist[d.distance];
    }
  }
  Json h = Json::array();
  for (const auto& [d, count] : hist) h.push_back({{"distance", to_string(d)}, {"count", count}});
  ok = true;
  j["ok"] = ok;
  j["proof"] = "random";
  j["histogram"] = h;
  j["unsatisfiable"] = unsat;
  return j;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rectangular PCP toolkit: verifiers, transforms, checks and low-rank counting"};
  app.name("rectpcp");
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::optional<std::uint64_t> seed;
  app.add_flag("--json", g.json, "Machine-readable JSON report on stdout");
  app.add_flag("--quiet", g.quiet, "No human-readable output");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Seed for every random choice (default: $RECTPCP_SEED or 1)");

  Source src;
  std::vector<std::string> props;
  auto* check = app.add_subcommand("check", "Run property checks on a verifier");
  add_source(check, src);
  check->add_option("--props", props, "Comma-separated checks: " + join(kCheckNames))->delimiter(',');

  std::string out_path;
  auto* transform = app.add_subcommand("transform", "Apply transforms and serialize the resulting verifier");
  add_source(transform, src);
  transform->add_option("--out", out_path, "Write the verifier table here");

  std::string a_path, b_path, backend = "both", format = "text";
  bool timings = false;
  auto* count = app.add_subcommand("count", "Count the ones of A*B over F2");
  count->add_option("--a", a_path)->required();
  count->add_option("--b", b_path)->required();
  count->add_option("--backend", backend)->check(CLI::IsMember({"naive", "bucketed", "both"}));
  count->add_option("--format", format)->check(CLI::IsMember({"text", "binary"}));
  count->add_flag("--timings", timings, "Include wall-clock timings (reports stop being reproducible)");

  std::string g1_path, g2_path, random;
  std::size_t rank_bound = 2;
  auto* maxcut = app.add_subcommand("maxcut", "Cut value of a seeded low-rank set on a product graph, three ways");
  maxcut->add_option("--g1", g1_path);
  maxcut->add_option("--g2", g2_path);
  maxcut->add_option("--random", random, "Random factors n1,m1,n2,m2");
  maxcut->add_option("--rank", rank_bound)->check(CLI::PositiveNumber);

  PipelineArgs pa;
  auto* pipeline = app.add_subcommand("pipeline", "Low-rank refuter, decision and rigid-proof extraction");
  add_source(pipeline, src);
  pipeline->add_option("--mode", pa.mode)->check(CLI::IsMember({"refute", "decide", "extract"}));
  pipeline->add_option("--rho", pa.rho)->check(CLI::PositiveNumber);
  pipeline->add_option("--threshold", pa.threshold, "Acceptance threshold s (default: verifier soundness)");
  pipeline->add_option("--search", pa.search)->check(CLI::IsMember({"exhaustive", "seeded"}));
  pipeline->add_option("--budget", pa.budget);

  std::string matrix_path, matrix_format = "text";
  std::optional<std::size_t> identity;
  std::size_t max_rho = 2, budget = 64;
  auto* rigidity = app.add_subcommand("rigidity", "Distance to low rank for each rho");
  rigidity->add_option("--matrix", matrix_path);
  rigidity->add_option("--format", matrix_format)->check(CLI::IsMember({"text", "binary"}));
  rigidity->add_option("--identity", identity, "Use the n x n identity");
  rigidity->add_option("--max-rho", max_rho);
  rigidity->add_option("--budget", budget, "Restarts for heuristic rows");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    if (seed) {
      g.seed = *seed;
    } else if (const char* env = std::getenv("RECTPCP_SEED"); env && *env) {
      const std::string text(env);
      if (!std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isdigit(c); })) {
        throw CLI::ValidationError("RECTPCP_SEED", "expected a non-negative integer, got " + text);
      }
      g.seed = std::stoull(text);
    }
    if (check->parsed()) return cmd_check(g, src, props, out);
    if (transform->parsed()) return cmd_transform(g, src, out_path, out);
    if (count->parsed()) return cmd_count(g, a_path, b_path, backend, format, timings, out);
    if (maxcut->parsed()) return cmd_maxcut(g, g1_path, g2_path, random, rank_bound, out);
    if (pipeline->parsed()) return cmd_pipeline(g, src, pa, out);
    return cmd_rigidity(g, matrix_path, matrix_format, identity, max_rho, budget, out);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kUsage;
  } catch (const SchemaError& e) {
    err << "rectpcp: " << e.what() << '\n';
    return kUsage;
  } catch (const PreconditionError& e) {
    err << "rectpcp: precondition failed: " << e.what() << '\n' << "evidence: " << e.evidence().to_json() << '\n';
    if (g.json) {
      Json rep = header("error", g);
      rep["kind"] = "precondition";
      rep["message"] = e.what();
      rep["evidence"] = parse_embedded(e.evidence().to_json());
      out << rep.dump(2) << '\n';
    }
    return kCheckFailed;
  } catch (const std::length_error& e) {
    err << "rectpcp: guard: " << e.what() << '\n';
    return kGuard;
  } catch (const std::invalid_argument& e) {
    err << "rectpcp: " << e.what() << '\n';
    return kUsage;
  } catch (const std::runtime_error& e) {
    err << "rectpcp: " << e.what() << '\n';
    return kUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "rectpcp: invalid JSON: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "rectpcp: internal error: " << e.what() << '\n';
    return kCheckFailed;
  }
}

}  // namespace rectpcp::cli
