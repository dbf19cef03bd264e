#pragma once

// Iterative deepening over the happening bound, plan extraction from
// satisfying assignments, and unsat-core explanations.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "capplan/encoder.hpp"
#include "capplan/model.hpp"
#include "capplan/smt.hpp"
#include "capplan/synonymy.hpp"

namespace capplan {

struct Happening {
  std::set<std::string> applied;
  std::map<std::string, Value> layer0;  // class id -> value
  std::map<std::string, Value> layer1;
  bool operator==(const Happening&) const = default;
};

struct Plan {
  int bound_happenings = 0;
  std::vector<Happening> happenings;
  /// "<capability>#t<k>" -> parameter property -> value
  std::map<std::string, std::map<std::string, Value>> parameters;
  /// class id -> member property ids
  std::map<std::string, std::vector<std::string>> classes;
  bool operator==(const Plan&) const = default;
};

struct BoundOutcome {
  enum class Status { Sat, Unsat, Unknown };
  int bound = 0;
  Status status = Status::Unknown;
  std::string reason;              // Unknown only
  std::vector<std::string> core;   // Unsat only
  bool core_available = false;
};

std::string_view to_string(BoundOutcome::Status s);

struct PlanFound {
  Plan plan;
  std::vector<BoundOutcome> outcomes;
};

struct NoPlanFound {
  std::vector<BoundOutcome> outcomes;
  bool any_unknown = false;
  std::vector<std::string> last_core;
  bool cores_available = false;
  /// Encoding of the last unsat bound, kept for explanations.
  std::optional<Encoding> last_unsat_encoding;
};

using PlanResult = std::variant<PlanFound, NoPlanFound>;

struct PlannerConfig {
  SolverConfig solver;
  EncoderOptions encoder;
  bool incremental = false;
  bool minimize_core = false;
};

/// Tries bounds 0..max_bound in order and returns the first plan found.
/// Throws InvalidModel when validation fails; solver errors propagate.
PlanResult plan(const CapabilityModel& model, int max_bound, const PlannerConfig& config);

/// Throws IncompleteModel if a declared variable has no value.
Plan extract_plan(const Encoding& encoding, const std::map<std::string, Value>& valuation);

struct ExplanationElement {
  std::string assertion;
  std::string family;
  std::vector<std::string> elements;
  std::optional<int> happening;
  std::string rendering;
};

struct Explanation {
  std::vector<std::string> core;
  std::vector<ExplanationElement> elements;
};

/// Throws CoresUnavailable when the last bound produced no core.
Explanation explain(const NoPlanFound& no_plan, const CapabilityModel& model);

nlohmann::json plan_to_json(const Plan& plan);
/// Throws SchemaError.
Plan plan_from_json(const nlohmann::json& doc);
nlohmann::json outcomes_to_json(const std::vector<BoundOutcome>& outcomes);
nlohmann::json explanation_to_json(const Explanation& explanation);

}  // namespace capplan
