#include "capplan/planner.hpp"

#include <memory>
#include <sstream>

#include "capplan/error.hpp"

namespace capplan {

using nlohmann::json;

std::string_view to_string(BoundOutcome::Status s) {
  switch (s) {
    case BoundOutcome::Status::Sat: return "sat";
    case BoundOutcome::Status::Unsat: return "unsat";
    case BoundOutcome::Status::Unknown: return "unknown";
  }
  return "unknown";
}

PlanResult plan(const CapabilityModel& model, int max_bound, const PlannerConfig& config) {
  if (max_bound < 0) throw std::invalid_argument("maximum bound must be non-negative");
  if (auto diagnostics = validate(model); !diagnostics.empty()) {
    std::ostringstream msg;
    msg << "model failed validation:";
    for (const auto& d : diagnostics) msg << "\n  " << d.rule << " [" << d.element << "]: " << d.message;
    throw InvalidModel(msg.str());
  }
  SynonymyIndex index = build_synonymy(model);

  std::unique_ptr<SolverSession> session;
  NoPlanFound failure;
  for (int k = 0; k <= max_bound; ++k) {
    Encoding enc = build(model, index, k, config.encoder);
    SolveOutcome outcome;
    if (config.incremental) {
      if (!session) session = std::make_unique<SolverSession>(config.solver, enc.logic);
      outcome = session->check(enc);
    } else {
      EmitOptions options;
      options.produce_unsat_cores = config.solver.produce_unsat_cores;
      options.random_seed = config.solver.random_seed;
      outcome = solve(emit(enc, options), config.solver);
    }

    BoundOutcome record;
    record.bound = k;
    if (auto* sat = std::get_if<Sat>(&outcome)) {
      record.status = BoundOutcome::Status::Sat;
      failure.outcomes.push_back(record);
      return PlanFound{extract_plan(enc, sat->valuation), std::move(failure.outcomes)};
    }
    if (auto* unsat = std::get_if<Unsat>(&outcome)) {
      record.status = BoundOutcome::Status::Unsat;
      record.core = unsat->core;
      record.core_available = unsat->core_available;
      if (config.minimize_core && unsat->core_available)
        record.core = minimize_core(enc, record.core, config.solver);
      failure.last_core = record.core;
      failure.cores_available = record.core_available;
      failure.last_unsat_encoding = std::move(enc);
    } else {
      record.status = BoundOutcome::Status::Unknown;
      record.reason = std::get<Unknown>(outcome).reason;
      failure.any_unknown = true;
    }
    failure.outcomes.push_back(std::move(record));
  }
  return failure;
}

Plan extract_plan(const Encoding& encoding, const std::map<std::string, Value>& valuation) {
  auto value_of = [&](const VariableKey& key) -> const Value& {
    auto it = valuation.find(symbol(key));
    if (it == valuation.end()) throw IncompleteModel("model has no value for '" + symbol(key) + "'");
    return it->second;
  };
  for (const auto& [key, sort] : encoding.variables) {
    const Value& v = value_of(key);
    if (is_bool(v) != (sort == Sort::Bool))
      throw IncompleteModel("model value for '" + symbol(key) + "' has the wrong sort");
  }

  Plan plan;
  plan.bound_happenings = encoding.happenings();
  for (const auto& s : encoding.state)
    if (s.id == s.class_id) plan.classes[s.class_id];
  for (const auto& s : encoding.state) {
    auto& members = plan.classes[s.class_id];
    members.insert(members.end(), s.members.begin(), s.members.end());
  }

  for (int t = 0; t < encoding.happenings(); ++t) {
    Happening h;
    for (const auto& c : encoding.capabilities)
      if (std::get<bool>(value_of(VariableKey::cap(c, t)))) h.applied.insert(c);
    for (const auto& s : encoding.state) {
      if (s.id != s.class_id) continue;
      h.layer0.emplace(s.class_id, value_of(VariableKey::prop(s.id, t, 0)));
      h.layer1.emplace(s.class_id, value_of(VariableKey::prop(s.id, t, 1)));
    }
    for (const auto& c : h.applied) {
      auto params = encoding.parameters.find(c);
      if (params == encoding.parameters.end() || params->second.empty()) continue;
      auto& slot = plan.parameters[c + "#t" + std::to_string(t)];
      for (const auto& p : params->second)
        slot.emplace(p, value_of(VariableKey::prop(encoding.state_of.at(p), t, 0)));
    }
    plan.happenings.push_back(std::move(h));
  }
  return plan;
}

namespace {

std::string readable_symbol(const Encoding& enc, const std::string& sym) {
  const VariableKey* key = enc.key_of(sym);
  if (!key) return sym;
  if (key->kind == VariableKey::Kind::Cap) return key->id + "@t" + std::to_string(key->happening);
  return key->id + "@t" + std::to_string(key->happening) + ".l" + std::to_string(key->layer);
}

std::string render(const Expr& term) {
  // Implications are stored as (or (not a) b).
  if (const auto* a = std::get_if<Apply>(&term.node); a && a->op == Op::Or && a->args.size() == 2) {
    if (const auto* n = std::get_if<Apply>(&a->args[0].node); n && n->op == Op::Not) {
      auto wrap = [](const Expr& e) {
        std::string s = to_infix(e);
        return std::holds_alternative<Apply>(e.node) ? "(" + s + ")" : s;
      };
      return wrap(n->args[0]) + " => " + wrap(a->args[1]);
    }
  }
  return to_infix(term);
}

std::string describe_property(const CapabilityModel& model, const std::string& id) {
  auto it = model.properties.find(id);
  if (it == model.properties.end()) return {};
  const Property& p = it->second;
  std::string out = "property " + p.id + " of " + std::string(to_string(p.carrier_kind)) + " " + p.carrier_id;
  auto td = model.type_descriptions.find(p.type_id);
  if (td != model.type_descriptions.end()) {
    out += ", type " + td->second.id;
    if (td->second.label) out += " (" + *td->second.label + ")";
    if (td->second.unit) out += " [" + *td->second.unit + "]";
  }
  return out;
}

}  // namespace

Explanation explain(const NoPlanFound& no_plan, const CapabilityModel& model) {
  if (!no_plan.cores_available || !no_plan.last_unsat_encoding)
    throw CoresUnavailable("no unsat core available; run the solver with unsat core production");
  const Encoding& enc = *no_plan.last_unsat_encoding;
  Explanation out;
  out.core = no_plan.last_core;
  for (const auto& name : no_plan.last_core) {
    const Assertion* a = enc.assertion(name);
    if (!a) throw SolverProtocolError("core names unknown assertion '" + name + "'");
    ExplanationElement e;
    e.assertion = name;
    e.family = a->origin.family;
    e.elements = a->origin.elements;
    e.happening = a->origin.happening;
    e.rendering = render(rename_refs(a->term, [&](const std::string& s) { return readable_symbol(enc, s); }));
    std::vector<std::string> notes;
    for (const auto& id : a->origin.elements) {
      if (auto d = describe_property(model, id); !d.empty()) notes.push_back(d);
      else if (const Capability* c = model.capability(id))
        notes.push_back(std::string(c->kind == CapabilityKind::Provided ? "provided" : "required") +
                        " capability " + c->id);
    }
    for (const auto& n : notes) e.rendering += "  {" + n + "}";
    out.elements.push_back(std::move(e));
  }
  return out;
}

namespace {

json value_json(const Value& v) {
  if (const bool* b = std::get_if<bool>(&v)) return *b;
  return to_decimal_string(std::get<Rational>(v));
}

Value value_from_json(const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_string()) {
    try {
      return parse_rational(v.get<std::string>());
    } catch (const std::invalid_argument&) {
    }
  }
  throw SchemaError("plan value must be a boolean or a decimal string, got " + v.dump());
}

json valuation_json(const std::map<std::string, Value>& m) {
  json out = json::object();
  for (const auto& [k, v] : m) out[k] = value_json(v);
  return out;
}

std::map<std::string, Value> valuation_from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaError("plan valuation must be an object");
  std::map<std::string, Value> out;
  for (const auto& [k, v] : doc.items()) out.emplace(k, value_from_json(v));
  return out;
}

}  // namespace

json plan_to_json(const Plan& plan) {
  json happenings = json::array();
  for (const auto& h : plan.happenings)
    happenings.push_back({{"applied", h.applied}, {"layer0", valuation_json(h.layer0)}, {"layer1", valuation_json(h.layer1)}});
  json params = json::object();
  for (const auto& [k, m] : plan.parameters) params[k] = valuation_json(m);
  return {{"boundHappenings", plan.bound_happenings},
          {"happenings", std::move(happenings)},
          {"parameters", std::move(params)},
          {"classes", plan.classes}};
}

Plan plan_from_json(const json& doc) {
  try {
    Plan plan;
    plan.bound_happenings = doc.at("boundHappenings").get<int>();
    for (const auto& h : doc.at("happenings")) {
      Happening out;
      for (const auto& c : h.at("applied")) out.applied.insert(c.get<std::string>());
      out.layer0 = valuation_from_json(h.at("layer0"));
      out.layer1 = valuation_from_json(h.at("layer1"));
      plan.happenings.push_back(std::move(out));
    }
    if (doc.contains("parameters"))
      for (const auto& [k, m] : doc.at("parameters").items()) plan.parameters[k] = valuation_from_json(m);
    if (doc.contains("classes"))
      for (const auto& [k, m] : doc.at("classes").items()) plan.classes[k] = m.get<std::vector<std::string>>();
    if (plan.bound_happenings != static_cast<int>(plan.happenings.size()))
      throw SchemaError("boundHappenings does not match the number of happenings");
    return plan;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed plan document: ") + e.what());
  }
}

json outcomes_to_json(const std::vector<BoundOutcome>& outcomes) {
  json out = json::array();
  for (const auto& o : outcomes) {
    json j = {{"bound", o.bound}, {"happenings", o.bound + 1}, {"outcome", std::string(to_string(o.status))}};
    if (o.status == BoundOutcome::Status::Unknown) j["reason"] = o.reason;
    if (o.status == BoundOutcome::Status::Unsat && o.core_available) j["core"] = o.core;
    out.push_back(std::move(j));
  }
  return out;
}

json explanation_to_json(const Explanation& explanation) {
  json elements = json::array();
  for (const auto& e : explanation.elements) {
    json j = {{"assertion", e.assertion}, {"family", e.family}, {"elements", e.elements}, {"rendering", e.rendering}};
    if (e.happening) j["happening"] = *e.happening;
    elements.push_back(std::move(j));
  }
  return {{"core", explanation.core}, {"elements", std::move(elements)}};
}

}  // namespace capplan
