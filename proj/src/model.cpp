#include "capplan/model.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "capplan/error.hpp"

namespace capplan {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Relation, std::string_view>, 6> kRelations{{
    {Relation::Eq, "eq"},
    {Relation::Neq, "neq"},
    {Relation::Lt, "lt"},
    {Relation::Gt, "gt"},
    {Relation::Leq, "leq"},
    {Relation::Geq, "geq"},
}};

Op relation_op(Relation r) {
  switch (r) {
    case Relation::Eq: return Op::Eq;
    case Relation::Neq: return Op::Neq;
    case Relation::Lt: return Op::Lt;
    case Relation::Gt: return Op::Gt;
    case Relation::Leq: return Op::Leq;
    case Relation::Geq: return Op::Geq;
  }
  return Op::Eq;
}

const json& require_field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw SchemaError(where + ": missing field '" + key + "'");
  return obj.at(key);
}

std::string require_string(const json& obj, const char* key, const std::string& where) {
  const json& v = require_field(obj, key, where);
  if (!v.is_string() || v.get<std::string>().empty())
    throw SchemaError(where + ": field '" + key + "' must be a non-empty string");
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  if (!obj.at(key).is_string()) throw SchemaError(where + ": field '" + key + "' must be a string");
  return obj.at(key).get<std::string>();
}

const json& optional_array(const json& obj, const char* key, const std::string& where) {
  static const json empty = json::array();
  if (!obj.contains(key)) return empty;
  if (!obj.at(key).is_array()) throw SchemaError(where + ": field '" + key + "' must be an array");
  return obj.at(key);
}

Value parse_value(const json& v, const std::string& where) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    try {
      return parse_rational(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw SchemaError(where + ": invalid number '" + v.get<std::string>() + "'");
    }
  }
  throw SchemaError(where + ": value must be a boolean or a decimal string");
}

json value_to_json(const Value& v) {
  if (const bool* b = std::get_if<bool>(&v)) return *b;
  return to_decimal_string(std::get<Rational>(v));
}

template <typename Enum, std::size_t N>
Enum parse_enum(const json& v, const std::array<std::pair<Enum, std::string_view>, N>& table,
                const std::string& where) {
  if (v.is_string()) {
    for (const auto& [e, name] : table)
      if (name == v.get<std::string>()) return e;
  }
  throw SchemaError(where + ": unexpected value " + v.dump());
}

constexpr std::array<std::pair<Datatype, std::string_view>, 2> kDatatypes{{
    {Datatype::Boolean, "boolean"},
    {Datatype::Real, "real"},
}};

constexpr std::array<std::pair<ExpressionGoal, std::string_view>, 3> kGoals{{
    {ExpressionGoal::Requirement, "requirement"},
    {ExpressionGoal::Assurance, "assurance"},
    {ExpressionGoal::ActualValue, "actualValue"},
}};

constexpr std::array<std::pair<CapabilityKind, std::string_view>, 2> kKinds{{
    {CapabilityKind::Provided, "provided"},
    {CapabilityKind::Required, "required"},
}};

class Builder {
 public:
  void add_document(const json& doc) {
    if (!doc.is_object()) throw SchemaError("model document must be a JSON object");
    static const std::set<std::string> allowed{"typeDescriptions", "products", "resources",
                                               "information", "capabilities", "comment"};
    for (const auto& [key, _] : doc.items())
      if (!allowed.contains(key)) throw SchemaError("unknown top-level key '" + key + "'");

    for (const auto& td : optional_array(doc, "typeDescriptions", "document")) add_type(td);
    for (const auto& p : optional_array(doc, "products", "document"))
      add_entity(p, CarrierKind::Product, model_.products);
    for (const auto& r : optional_array(doc, "resources", "document"))
      add_entity(r, CarrierKind::Resource, model_.resources);
    for (const auto& i : optional_array(doc, "information", "document"))
      add_entity(i, CarrierKind::Information, model_.information);
    for (const auto& c : optional_array(doc, "capabilities", "document")) pending_caps_.push_back(c);
  }

  CapabilityModel finish() {
    for (const auto& [id, prop] : model_.properties)
      if (!model_.type_descriptions.contains(prop.type_id))
        throw DanglingReference("property '" + id + "' references unknown type description '" +
                                prop.type_id + "'");

    bool have_required = false;
    for (const auto& doc : pending_caps_) {
      Capability c = parse_capability(doc);
      if (c.kind == CapabilityKind::Required) {
        if (have_required) throw SchemaError("more than one required capability ('" + c.id + "')");
        have_required = true;
        model_.required = std::move(c);
      } else {
        model_.provided.push_back(std::move(c));
      }
    }
    if (!have_required) throw SchemaError("exactly one required capability must be declared");
    return std::move(model_);
  }

 private:
  void claim(const std::string& id) {
    if (!ids_.insert(id).second) throw DuplicateId("duplicate id '" + id + "'");
  }

  void add_type(const json& doc) {
    TypeDescription td;
    td.id = require_string(doc, "id", "typeDescription");
    std::string where = "typeDescription '" + td.id + "'";
    td.datatype = parse_enum(require_field(doc, "datatype", where), kDatatypes, where + " datatype");
    td.unit = optional_string(doc, "unit", where);
    td.label = optional_string(doc, "label", where);
    claim(td.id);
    model_.type_descriptions.emplace(td.id, std::move(td));
  }

  void add_entity(const json& doc, CarrierKind kind, std::vector<Entity>& out) {
    Entity e;
    e.kind = kind;
    e.id = require_string(doc, "id", std::string(to_string(kind)));
    std::string where = std::string(to_string(kind)) + " '" + e.id + "'";
    if (kind == CarrierKind::Product) {
      e.type_id = require_string(doc, "productTypeId", where);
    } else if (kind == CarrierKind::Information) {
      e.type_id = require_string(doc, "typeId", where);
    }
    claim(e.id);
    for (const auto& pdoc : optional_array(doc, "properties", where)) {
      Property p = parse_property(pdoc, e);
      e.property_ids.push_back(p.id);
      model_.properties.emplace(p.id, std::move(p));
    }
    out.push_back(std::move(e));
  }

  Property parse_property(const json& doc, const Entity& carrier) {
    Property p;
    p.id = require_string(doc, "id", "property of '" + carrier.id + "'");
    std::string where = "property '" + p.id + "'";
    p.type_id = require_string(doc, "typeDescription", where);
    p.carrier_id = carrier.id;
    p.carrier_kind = carrier.kind;
    for (const auto& idoc : optional_array(doc, "instanceDescriptions", where)) {
      InstanceDescription d;
      d.goal = parse_enum(require_field(idoc, "expressionGoal", where), kGoals, where + " expressionGoal");
      if (idoc.contains("relation")) d.relation = parse_enum(idoc.at("relation"), kRelations, where + " relation");
      if (idoc.contains("value") && !idoc.at("value").is_null())
        d.value = parse_value(idoc.at("value"), where);
      p.instances.push_back(std::move(d));
    }
    claim(p.id);
    return p;
  }

  std::vector<IoBinding> parse_bindings(const json& arr, const std::string& where) {
    std::vector<IoBinding> out;
    for (const auto& b : arr) {
      IoBinding io;
      io.entity_id = require_string(b, "entity", where);
      const Entity* e = model_.entity(io.entity_id);
      if (!e) throw DanglingReference(where + ": unknown entity '" + io.entity_id + "'");
      for (const auto& pid : optional_array(b, "properties", where)) {
        if (!pid.is_string()) throw SchemaError(where + ": property references must be strings");
        std::string id = pid.get<std::string>();
        if (std::find(e->property_ids.begin(), e->property_ids.end(), id) == e->property_ids.end())
          throw DanglingReference(where + ": entity '" + e->id + "' has no property '" + id + "'");
        io.property_ids.push_back(std::move(id));
      }
      out.push_back(std::move(io));
    }
    return out;
  }

  Capability parse_capability(const json& doc) {
    Capability c;
    c.id = require_string(doc, "id", "capability");
    std::string where = "capability '" + c.id + "'";
    claim(c.id);
    c.kind = parse_enum(require_field(doc, "kind", where), kKinds, where + " kind");
    c.resource_id = optional_string(doc, "resource", where);
    if (c.resource_id) {
      const Entity* r = model_.entity(*c.resource_id);
      if (!r || r->kind != CarrierKind::Resource)
        throw DanglingReference(where + ": unknown resource '" + *c.resource_id + "'");
    }
    c.inputs = parse_bindings(optional_array(doc, "inputs", where), where + " inputs");
    c.outputs = parse_bindings(optional_array(doc, "outputs", where), where + " outputs");
    for (const auto& cdoc : optional_array(doc, "constraints", where)) {
      Expr e = parse_expression(cdoc);
      for (const auto& ref : references(e))
        if (!model_.properties.contains(ref))
          throw DanglingReference(where + ": constraint references unknown property '" + ref + "'");
      c.constraints.push_back(std::move(e));
    }
    return c;
  }

  CapabilityModel model_;
  std::set<std::string> ids_;
  std::vector<json> pending_caps_;
};

json bindings_to_json(const std::vector<IoBinding>& bindings) {
  json out = json::array();
  for (const auto& b : bindings) out.push_back({{"entity", b.entity_id}, {"properties", b.property_ids}});
  return out;
}

}  // namespace

std::string_view to_string(Datatype d) { return kDatatypes[static_cast<std::size_t>(d)].second; }
std::string_view to_string(ExpressionGoal g) { return kGoals[static_cast<std::size_t>(g)].second; }
std::string_view to_string(Relation r) { return kRelations[static_cast<std::size_t>(r)].second; }
std::string_view to_string(CarrierKind k) {
  switch (k) {
    case CarrierKind::Product: return "product";
    case CarrierKind::Resource: return "resource";
    case CarrierKind::Information: return "information";
  }
  return "?";
}

const Property& CapabilityModel::property(const std::string& id) const {
  auto it = properties.find(id);
  if (it == properties.end()) throw DanglingReference("unknown property '" + id + "'");
  return it->second;
}

const TypeDescription& CapabilityModel::type_of(const std::string& property_id) const {
  const Property& p = property(property_id);
  auto it = type_descriptions.find(p.type_id);
  if (it == type_descriptions.end())
    throw DanglingReference("unknown type description '" + p.type_id + "'");
  return it->second;
}

Datatype CapabilityModel::datatype_of(const std::string& property_id) const {
  return type_of(property_id).datatype;
}

const Entity* CapabilityModel::entity(const std::string& id) const {
  for (const auto* list : {&products, &resources, &information})
    for (const auto& e : *list)
      if (e.id == id) return &e;
  return nullptr;
}

const Capability* CapabilityModel::capability(const std::string& id) const {
  for (const auto& c : provided)
    if (c.id == id) return &c;
  if (required.id == id) return &required;
  return nullptr;
}

std::set<std::string> CapabilityModel::output_properties(const Capability& c) const {
  std::set<std::string> out;
  for (const auto& b : c.outputs) out.insert(b.property_ids.begin(), b.property_ids.end());
  return out;
}

std::set<std::string> CapabilityModel::input_properties(const Capability& c) const {
  std::set<std::string> out;
  for (const auto& b : c.inputs) out.insert(b.property_ids.begin(), b.property_ids.end());
  std::set<std::string> outputs = output_properties(c);
  for (const auto& p : outputs) out.erase(p);
  if (c.resource_id) {
    for (const auto& e : c.constraints)
      for (const auto& ref : references(e)) {
        auto it = properties.find(ref);
        if (it != properties.end() && it->second.carrier_id == *c.resource_id && !outputs.contains(ref))
          out.insert(ref);
      }
  }
  return out;
}

std::set<std::string> CapabilityModel::attached_properties(const Capability& c) const {
  std::set<std::string> out = input_properties(c);
  std::set<std::string> outputs = output_properties(c);
  out.insert(outputs.begin(), outputs.end());
  return out;
}

Role CapabilityModel::role(const Capability& c, const std::string& property_id) const {
  if (output_properties(c).contains(property_id)) return Role::Output;
  if (input_properties(c).contains(property_id)) return Role::Input;
  return Role::None;
}

Placement CapabilityModel::placement(const Capability& c, const Expr& constraint) const {
  bool any_input = false, any_output = false;
  std::set<std::string> outputs = output_properties(c);
  for (const auto& ref : references(constraint)) {
    if (outputs.contains(ref)) any_output = true;
    else any_input = true;
  }
  if (any_input && !any_output) return Placement::Precondition;
  if (any_output && !any_input) return Placement::Effect;
  return Placement::Mixed;
}

std::vector<std::string> CapabilityModel::unbound_parameters(const Capability& c) const {
  std::vector<std::string> out;
  for (const auto& b : c.inputs)
    for (const auto& pid : b.property_ids)
      if (property(pid).instances.empty() && std::find(out.begin(), out.end(), pid) == out.end())
        out.push_back(pid);
  return out;
}

bool CapabilityModel::is_provided_side(const std::string& property_id) const {
  const Property& p = property(property_id);
  if (p.carrier_kind == CarrierKind::Resource) return true;
  for (const auto& c : provided)
    if (attached_properties(c).contains(property_id)) return true;
  return !attached_properties(required).contains(property_id);
}

SortLookup CapabilityModel::sort_lookup() const {
  return [this](const std::string& id) -> std::optional<Sort> {
    auto it = properties.find(id);
    if (it == properties.end()) return std::nullopt;
    auto td = type_descriptions.find(it->second.type_id);
    if (td == type_descriptions.end()) return std::nullopt;
    return td->second.datatype == Datatype::Boolean ? Sort::Bool : Sort::Real;
  };
}

Expr desugar_on(Expr subject, const InstanceDescription& d) {
  if (!d.value) throw SchemaError("instance description without a value cannot be desugared");
  Expr value = is_bool(*d.value) ? Expr::constant(std::get<bool>(*d.value))
                                 : Expr::constant(std::get<Rational>(*d.value));
  return Expr::apply(relation_op(d.relation), {std::move(subject), std::move(value)});
}

Expr desugar(const Property& p, const InstanceDescription& d) {
  return desugar_on(Expr::ref(p.id), d);
}

CapabilityModel parse_model(const json& document) {
  Builder b;
  b.add_document(document);
  return b.finish();
}

CapabilityModel parse_model(const json& domain, const json& problem) {
  Builder b;
  b.add_document(domain);
  b.add_document(problem);
  return b.finish();
}

json serialize(const CapabilityModel& model) {
  json doc = json::object();
  json types = json::array();
  for (const auto& [id, td] : model.type_descriptions) {
    json t = {{"id", td.id}, {"datatype", std::string(to_string(td.datatype))}};
    if (td.unit) t["unit"] = *td.unit;
    if (td.label) t["label"] = *td.label;
    types.push_back(std::move(t));
  }
  doc["typeDescriptions"] = std::move(types);

  auto entity_json = [&](const Entity& e) {
    json out = {{"id", e.id}};
    if (e.kind == CarrierKind::Product) out["productTypeId"] = e.type_id;
    if (e.kind == CarrierKind::Information) out["typeId"] = e.type_id;
    json props = json::array();
    for (const auto& pid : e.property_ids) {
      const Property& p = model.property(pid);
      json instances = json::array();
      for (const auto& d : p.instances) {
        json i = {{"expressionGoal", std::string(to_string(d.goal))},
                  {"relation", std::string(to_string(d.relation))}};
        if (d.value) i["value"] = value_to_json(*d.value);
        instances.push_back(std::move(i));
      }
      props.push_back({{"id", p.id}, {"typeDescription", p.type_id}, {"instanceDescriptions", instances}});
    }
    out["properties"] = std::move(props);
    return out;
  };
  for (const auto& [key, list] : {std::pair{"products", &model.products},
                                  std::pair{"resources", &model.resources},
                                  std::pair{"information", &model.information}}) {
    json arr = json::array();
    for (const auto& e : *list) arr.push_back(entity_json(e));
    doc[key] = std::move(arr);
  }

  auto capability_json = [](const Capability& c) {
    json out = {{"id", c.id},
                {"kind", c.kind == CapabilityKind::Provided ? "provided" : "required"},
                {"inputs", bindings_to_json(c.inputs)},
                {"outputs", bindings_to_json(c.outputs)}};
    if (c.resource_id) out["resource"] = *c.resource_id;
    json cons = json::array();
    for (const auto& e : c.constraints) cons.push_back(to_json(e));
    out["constraints"] = std::move(cons);
    return out;
  };
  json caps = json::array();
  for (const auto& c : model.provided) caps.push_back(capability_json(c));
  caps.push_back(capability_json(model.required));
  doc["capabilities"] = std::move(caps);
  return doc;
}

std::vector<Diagnostic> validate(const CapabilityModel& model) {
  std::vector<Diagnostic> out;
  auto report = [&](std::string rule, std::string element, std::string message) {
    out.push_back({std::move(rule), std::move(element), std::move(message)});
  };

  auto check_id = [&](const std::string& id) {
    if (id.find_first_of("|\\") != std::string::npos)
      report("InvalidIdentifier", id, "identifiers may not contain '|' or '\\'");
  };
  for (const auto& [id, _] : model.type_descriptions) check_id(id);
  for (const auto& [id, _] : model.properties) check_id(id);
  for (const auto* list : {&model.products, &model.resources, &model.information})
    for (const auto& e : *list) {
      check_id(e.id);
      if (e.kind != CarrierKind::Resource && e.type_id.empty())
        report("EmptyProductType", e.id, "products and information entities need a type id");
    }

  for (const auto& [id, p] : model.properties) {
    auto td = model.type_descriptions.find(p.type_id);
    if (td == model.type_descriptions.end()) {
      report("DanglingTypeDescription", id, "unknown type description '" + p.type_id + "'");
      continue;
    }
    Datatype dt = td->second.datatype;
    int actual_values = 0;
    for (const auto& d : p.instances) {
      if (d.value && is_bool(*d.value) != (dt == Datatype::Boolean))
        report("DatatypeMismatch", id,
               "value " + to_string(*d.value) + " does not match datatype " + std::string(to_string(dt)));
      if (dt == Datatype::Boolean && d.relation != Relation::Eq && d.relation != Relation::Neq)
        report("OrderingOnBoolean", id, "boolean properties only support eq/neq relations");
      if (d.goal == ExpressionGoal::ActualValue) {
        ++actual_values;
        if (!d.value || d.relation != Relation::Eq)
          report("InvalidActualValue", id, "actual values need a value and relation eq");
      }
    }
    if (actual_values > 1) report("MultipleActualValues", id, "more than one actual value");
    if (actual_values > 0 && !model.is_provided_side(id))
      report("ActualValueOnRequiredCapability", id,
             "actual values describe system state and cannot belong to the required capability only");
  }

  std::vector<const Capability*> caps;
  for (const auto& c : model.provided) caps.push_back(&c);
  caps.push_back(&model.required);
  SortLookup sorts = model.sort_lookup();
  for (const Capability* c : caps) {
    check_id(c->id);
    if (c->kind == CapabilityKind::Required && c != &model.required)
      report("CapabilityKind", c->id, "required capability in the provided set");
    std::set<std::string> attached;
    for (const auto& b : c->inputs) attached.insert(b.property_ids.begin(), b.property_ids.end());
    for (const auto& b : c->outputs) attached.insert(b.property_ids.begin(), b.property_ids.end());
    for (std::size_t i = 0; i < c->constraints.size(); ++i) {
      const Expr& e = c->constraints[i];
      std::string element = c->id + ".constraint." + std::to_string(i);
      for (const auto& ref : references(e)) {
        bool ok = attached.contains(ref);
        if (!ok && c->resource_id) {
          auto it = model.properties.find(ref);
          ok = it != model.properties.end() && it->second.carrier_id == *c->resource_id;
        }
        if (!ok)
          report("ForeignConstraintReference", element,
                 "constraint references '" + ref + "', which is not attached to capability '" + c->id + "'");
      }
      try {
        if (typecheck(e, sorts) != Sort::Bool)
          report("IllTypedConstraint", element, "constraint root must be boolean");
      } catch (const Error& err) {
        report("IllTypedConstraint", element, err.what());
      }
    }
  }
  return out;
}

PropertyPartition partition_properties(const CapabilityModel& model) {
  PropertyPartition out;
  for (const auto& [id, _] : model.properties) {
    if (model.datatype_of(id) == Datatype::Boolean) out.boolean.insert(id);
    else out.real.insert(id);
  }
  return out;
}

}  // namespace capplan
