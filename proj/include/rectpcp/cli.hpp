#pragma once

#include <cstdint>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rectpcp/pcp_core.hpp"

namespace rectpcp::cli {

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kUsage = 2, kGuard = 3 };

using Json = nlohmann::ordered_json;

// Plan document violation at a JSON pointer such as /verifier/params/m.
class SchemaError : public std::invalid_argument {
 public:
  SchemaError(std::string path, const std::string& what)
      : std::invalid_argument("schema error at " + (path.empty() ? std::string("/") : path) + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct PlanStep {
  std::string name;
  Json params = Json::object();
};

struct Plan {
  std::string kind;
  Json params = Json::object();
  std::vector<PlanStep> transforms;
  std::vector<std::string> checks;
  std::string report_path;
  std::string verifier_path;
};

inline const std::vector<std::string> kVerifierKinds{"blr", "line", "shift", "identity", "table"};
inline const std::vector<std::string> kTransformNames{"identity", "smoothify", "alphabet_reduce", "add_rop", "compose"};
inline const std::vector<std::string> kCheckNames{"rectangular", "smooth", "rnl", "rop", "zero-rop", "robust"};

// Validates the document shape and every parameter name and type.
Plan parse_plan(const Json& doc);

struct Built {
  VerifierPtr verifier;
  AgentsPtr agents;  // null once a transform drops the listing agents
  std::string agents_kind;
  std::optional<Proof> honest;  // accepted with probability 1, carried through every transform
  Json steps = Json::array();
};

// Builds the verifier and applies the transforms in order; `seed` is the
// default for every seed parameter left out of the plan.
Built build(const Plan& plan, std::uint64_t seed);

// Runs one requested check; "robust" reads a seeded random proof.
Json run_check(const Built& b, const std::string& name, std::uint64_t seed, bool& ok);

// Full command line without the program name; returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rectpcp::cli
