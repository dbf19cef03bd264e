#pragma once

// Capability data model: type descriptions, properties with instance
// descriptions, carriers (products, resources, information) and
// provided/required capabilities with inputs, outputs and constraints.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "capplan/expr.hpp"
#include "capplan/rational.hpp"

namespace capplan {

enum class Datatype { Boolean, Real };
enum class ExpressionGoal { Requirement, Assurance, ActualValue };
enum class Relation { Eq, Neq, Lt, Gt, Leq, Geq };
enum class CarrierKind { Product, Resource, Information };
enum class CapabilityKind { Provided, Required };

struct TypeDescription {
  std::string id;
  Datatype datatype = Datatype::Real;
  std::optional<std::string> unit;
  std::optional<std::string> label;
  bool operator==(const TypeDescription&) const = default;
};

struct InstanceDescription {
  ExpressionGoal goal = ExpressionGoal::Requirement;
  Relation relation = Relation::Eq;
  std::optional<Value> value;
  bool operator==(const InstanceDescription&) const = default;
};

struct Property {
  std::string id;
  std::string type_id;
  std::string carrier_id;
  CarrierKind carrier_kind = CarrierKind::Product;
  std::vector<InstanceDescription> instances;
  bool operator==(const Property&) const = default;
};

/// A product, resource or information entity. Resources have no type id.
struct Entity {
  std::string id;
  CarrierKind kind = CarrierKind::Product;
  std::string type_id;
  std::vector<std::string> property_ids;
  bool operator==(const Entity&) const = default;
};

struct IoBinding {
  std::string entity_id;
  std::vector<std::string> property_ids;
  bool operator==(const IoBinding&) const = default;
};

struct Capability {
  std::string id;
  CapabilityKind kind = CapabilityKind::Provided;
  /// Providing resource; its properties may appear in constraints.
  std::optional<std::string> resource_id;
  std::vector<IoBinding> inputs;
  std::vector<IoBinding> outputs;
  std::vector<Expr> constraints;
  bool operator==(const Capability&) const = default;
};

/// Where a property sits relative to one capability.
enum class Role { Input, Output, None };

/// Where a capability constraint is applied.
enum class Placement { Precondition, Effect, Mixed };

/// Fully resolved planning input. Immutable once built by parse_model.
class CapabilityModel {
 public:
  std::map<std::string, TypeDescription> type_descriptions;
  std::vector<Entity> products;
  std::vector<Entity> resources;
  std::vector<Entity> information;
  std::map<std::string, Property> properties;
  std::vector<Capability> provided;
  Capability required;

  bool operator==(const CapabilityModel&) const = default;

  const Property& property(const std::string& id) const;
  const TypeDescription& type_of(const std::string& property_id) const;
  Datatype datatype_of(const std::string& property_id) const;
  const Entity* entity(const std::string& id) const;
  const Capability* capability(const std::string& id) const;

  /// Input properties of c, plus providing-resource properties referenced by
  /// its constraints that are not outputs.
  std::set<std::string> input_properties(const Capability& c) const;
  std::set<std::string> output_properties(const Capability& c) const;
  /// Inputs and outputs together: the properties c is directly related to.
  std::set<std::string> attached_properties(const Capability& c) const;
  /// Outputs win when a property is listed on both sides.
  Role role(const Capability& c, const std::string& property_id) const;

  Placement placement(const Capability& c, const Expr& constraint) const;

  /// Input properties without any instance description: parameters chosen
  /// by the planner.
  std::vector<std::string> unbound_parameters(const Capability& c) const;

  /// Properties whose actual values describe the initial state: everything
  /// not attached exclusively to the required capability.
  bool is_provided_side(const std::string& property_id) const;

  SortLookup sort_lookup() const;
};

/// Relation(ref property, const value); throws SchemaError if the
/// description carries no value.
Expr desugar(const Property& p, const InstanceDescription& d);
/// The same relation with the property reference replaced by `subject`.
Expr desugar_on(Expr subject, const InstanceDescription& d);

/// Single-document mode: domain and problem in one document.
CapabilityModel parse_model(const nlohmann::json& document);
/// Two-document mode; top-level arrays are merged and duplicate ids rejected.
CapabilityModel parse_model(const nlohmann::json& domain, const nlohmann::json& problem);

nlohmann::json serialize(const CapabilityModel& model);

struct Diagnostic {
  std::string rule;     // e.g. "DatatypeMismatch"
  std::string element;  // id of the violating element
  std::string message;
  bool operator==(const Diagnostic&) const = default;
};

/// Empty iff every model invariant holds.
std::vector<Diagnostic> validate(const CapabilityModel& model);

struct PropertyPartition {
  std::set<std::string> boolean;
  std::set<std::string> real;
};

PropertyPartition partition_properties(const CapabilityModel& model);

std::string_view to_string(Datatype d);
std::string_view to_string(ExpressionGoal g);
std::string_view to_string(Relation r);
std::string_view to_string(CarrierKind k);

}  // namespace capplan
