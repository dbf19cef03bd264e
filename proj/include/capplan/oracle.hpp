#pragma once

// Solver-free semantics over property classes: replay a plan against the
// capability model, and find shortest plans by exhaustive search on small
// instances. Shares the synonymy module with the encoder and nothing else.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "capplan/model.hpp"
#include "capplan/planner.hpp"
#include "capplan/synonymy.hpp"

namespace capplan {

/// Property class id -> value.
using WorldState = std::map<std::string, Value>;

struct Violation {
  enum class Kind { Structural, InitialState, Precondition, Effect, Constraint, Mutex, Frame, Continuation, Goal };
  Kind kind = Kind::Structural;
  std::string element;  // capability, class or property id
  std::optional<int> happening;
  std::string message;
};

std::string_view to_string(Violation::Kind kind);

struct Verdict {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

Verdict simulate(const CapabilityModel& model, const SynonymyIndex& index, const Plan& plan);

/// Sorted, distinct real constants from instance descriptions and
/// constraints; {0} when the model has none.
std::vector<Rational> default_value_domain(const CapabilityModel& model);

/// Breadth-first search for a shortest plan with at most max_happenings
/// happenings. Real classes only take values from `domain`. Throws
/// DomainTooLarge once more than `budget` candidate happenings were tried.
std::optional<Plan> brute_force_plan(const CapabilityModel& model, const SynonymyIndex& index, int max_happenings,
                                     const std::vector<Rational>& domain, std::size_t budget = 2'000'000);

}  // namespace capplan
