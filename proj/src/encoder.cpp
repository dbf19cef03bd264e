#include "capplan/encoder.hpp"

#include <stdexcept>

#include "capplan/error.hpp"

namespace capplan {

namespace {

std::string tk(int t) { return ".t" + std::to_string(t); }

Sort sort_of_datatype(Datatype d) { return d == Datatype::Boolean ? Sort::Bool : Sort::Real; }

bool has_value_description(const Property& p, ExpressionGoal goal) {
  for (const auto& d : p.instances)
    if (d.goal == goal && d.value) return true;
  return false;
}

// Desugared non-actual instance descriptions of p applied to `subject`.
// Valueless descriptions only mark a property; constraints give the value.
void describe(const Property& p, const Expr& subject, std::vector<Expr>& out) {
  for (const auto& d : p.instances)
    if (d.goal != ExpressionGoal::ActualValue && d.value) out.push_back(desugar_on(subject, d));
}

}  // namespace

std::string symbol(const VariableKey& key) {
  std::string s = key.id + "#t" + std::to_string(key.happening);
  if (key.kind == VariableKey::Kind::Prop) s += "#l" + std::to_string(key.layer);
  return s;
}

void Encoding::declare(const VariableKey& key, Sort sort) {
  std::string sym = symbol(key);
  if (!key_by_symbol_.emplace(sym, variables.size()).second)
    throw std::logic_error("duplicate solver symbol '" + sym + "'");
  variables.emplace_back(key, sort);
}

void Encoding::add(std::string name, Expr term, Origin origin) {
  for (const auto& ref : references(term))
    if (!is_declared(ref)) throw std::logic_error("assertion '" + name + "' uses undeclared '" + ref + "'");
  if (!assertion_by_name_.emplace(name, assertions.size()).second)
    throw std::logic_error("duplicate assertion name '" + name + "'");
  assertions.push_back({std::move(name), std::move(term), std::move(origin)});
}

const VariableKey* Encoding::key_of(const std::string& sym) const {
  auto it = key_by_symbol_.find(sym);
  return it == key_by_symbol_.end() ? nullptr : &variables[it->second].first;
}

std::optional<Sort> Encoding::sort_of(const std::string& sym) const {
  auto it = key_by_symbol_.find(sym);
  if (it == key_by_symbol_.end()) return std::nullopt;
  return variables[it->second].second;
}

const Assertion* Encoding::assertion(const std::string& name) const {
  auto it = assertion_by_name_.find(name);
  return it == assertion_by_name_.end() ? nullptr : &assertions[it->second];
}

Expr Encoding::var(const std::string& property_id, int t, int layer) const {
  auto it = state_of.find(property_id);
  if (it == state_of.end()) throw DanglingReference("no state variable for property '" + property_id + "'");
  return Expr::ref(symbol(VariableKey::prop(it->second, t, layer)));
}

Expr Encoding::cap(const std::string& capability_id, int t) const {
  return Expr::ref(symbol(VariableKey::cap(capability_id, t)));
}

Encoding make_encoding(const CapabilityModel& model, const SynonymyIndex& index, int n,
                       const EncoderOptions& options) {
  if (n < 0) throw std::invalid_argument("bound must be non-negative");
  Encoding enc;
  enc.bound = n;
  enc.expanded = options.expanded_synonyms;
  for (const auto& pc : index.property_classes) {
    Sort sort = sort_of_datatype(model.datatype_of(pc.class_id));
    if (enc.expanded) {
      for (const auto& m : pc.members) {
        enc.state.push_back({m, sort, pc.class_id, {m}});
        enc.state_of[m] = m;
      }
    } else {
      enc.state.push_back({pc.class_id, sort, pc.class_id, {pc.members.begin(), pc.members.end()}});
      for (const auto& m : pc.members) enc.state_of[m] = pc.class_id;
    }
  }
  for (const auto& c : model.provided) {
    enc.capabilities.push_back(c.id);
    enc.parameters[c.id] = model.unbound_parameters(c);
  }
  bool linear = true;
  for (const auto& c : model.provided)
    for (const auto& e : c.constraints) linear = linear && is_linear(e);
  for (const auto& e : model.required.constraints) linear = linear && is_linear(e);
  enc.logic = linear ? Logic::LinearReal : Logic::NonlinearReal;
  return enc;
}

void declare_variables(Encoding& enc, const CapabilityModel&, const SynonymyIndex&, int n) {
  for (int t = 0; t <= n; ++t) {
    for (int layer = 0; layer <= 1; ++layer)
      for (const auto& s : enc.state) enc.declare(VariableKey::prop(s.id, t, layer), s.sort);
    for (const auto& c : enc.capabilities) enc.declare(VariableKey::cap(c, t), Sort::Bool);
  }
}

void assert_layer_frame_axioms(Encoding& enc, const CapabilityModel& model, const SynonymyIndex& index, int t) {
  auto effects = class_effects(model, index);
  for (const auto& s : enc.state) {
    const ClassEffects& ce = effects.at(s.class_id);
    Expr before = Expr::ref(symbol(VariableKey::prop(s.id, t, 0)));
    Expr after = Expr::ref(symbol(VariableKey::prop(s.id, t, 1)));
    auto caps_of = [&](const std::set<std::string>& ids) {
      std::vector<Expr> out;
      for (const auto& c : ids) out.push_back(enc.cap(c, t));
      return out;
    };
    Origin origin{"frame", {s.id}, t};
    if (s.sort == Sort::Bool) {
      std::vector<Expr> pos{before};
      for (auto& c : caps_of(ce.positive)) pos.push_back(std::move(c));
      enc.add("frame." + s.id + tk(t) + ".pos", mk_implies(after, mk_or(std::move(pos))), origin);

      std::vector<Expr> neg{mk_not(before)};
      for (auto& c : caps_of(ce.negative)) neg.push_back(std::move(c));
      enc.add("frame." + s.id + tk(t) + ".neg", mk_implies(mk_not(after), mk_or(std::move(neg))), origin);
    } else {
      std::vector<Expr> idle;
      for (auto& c : caps_of(ce.numeric)) idle.push_back(mk_not(std::move(c)));
      Expr same = mk_eq(after, before);
      Expr term = idle.empty() ? same : mk_implies(mk_and(std::move(idle)), same);
      enc.add("frame." + s.id + tk(t) + ".real", std::move(term), origin);
    }
  }
}

void assert_capability_semantics(Encoding& enc, const CapabilityModel& model, const SynonymyIndex& index,
                                 int t) {
  for (const auto& c : model.provided) {
    Expr applied = enc.cap(c.id, t);
    std::set<std::string> inputs = model.input_properties(c);
    std::set<std::string> outputs = model.output_properties(c);
    auto at_role = [&](const std::string& ref) {
      return symbol(VariableKey::prop(enc.state_of.at(ref), t, outputs.contains(ref) ? 1 : 0));
    };

    std::vector<Expr> pre;
    for (const auto& q : inputs) describe(model.property(q), enc.var(q, t, 0), pre);
    std::vector<Expr> eff;
    for (const auto& q : outputs) describe(model.property(q), enc.var(q, t, 1), eff);

    std::vector<std::pair<std::size_t, Expr>> mixed;
    for (std::size_t i = 0; i < c.constraints.size(); ++i) {
      Expr term = rename_refs(c.constraints[i], at_role);
      switch (model.placement(c, c.constraints[i])) {
        case Placement::Precondition: pre.push_back(std::move(term)); break;
        case Placement::Effect: eff.push_back(std::move(term)); break;
        case Placement::Mixed: mixed.emplace_back(i, std::move(term)); break;
      }
    }

    if (!pre.empty())
      enc.add("pre." + c.id + tk(t), mk_implies(applied, mk_and(std::move(pre))), {"pre", {c.id}, t});
    if (!eff.empty())
      enc.add("eff." + c.id + tk(t), mk_implies(applied, mk_and(std::move(eff))), {"eff", {c.id}, t});
    for (auto& [i, term] : mixed)
      enc.add("constraint." + c.id + "." + std::to_string(i) + tk(t), mk_implies(applied, std::move(term)),
              {"constraint", {c.id, std::to_string(i)}, t});

    if (enc.expanded) {
      // Changes to directly affected properties reach every synonym.
      std::vector<Expr> propagate;
      for (const auto& q : effect_sets(c, model, index).all)
        for (const auto& s : index.syn_props.at(q)) propagate.push_back(mk_eq(enc.var(q, t, 1), enc.var(s, t, 1)));
      if (!propagate.empty())
        enc.add("syn." + c.id + tk(t), mk_implies(applied, mk_and(std::move(propagate))), {"syn", {c.id}, t});
    }
  }
}

void assert_mutexes(Encoding& enc, const CapabilityModel& model, const SynonymyIndex& index, int t) {
  for (const auto& [a, b] : mutex_pairs(model, index))
    enc.add("mutex." + a + "." + b + tk(t), mk_or({mk_not(enc.cap(a, t)), mk_not(enc.cap(b, t))}),
            {"mutex", {a, b}, t});
}

void assert_boundaries(Encoding& enc, const CapabilityModel& model, const SynonymyIndex& index, int n) {
  const Capability& req = model.required;
  std::set<std::string> req_inputs = model.input_properties(req);
  std::set<std::string> req_outputs = model.output_properties(req);

  for (const auto& [id, p] : model.properties) {
    std::vector<Expr> init;
    if (model.is_provided_side(id))
      for (const auto& d : p.instances)
        if (d.goal == ExpressionGoal::ActualValue && d.value) init.push_back(desugar_on(enc.var(id, 0, 0), d));
    if (req_inputs.contains(id)) describe(p, enc.var(id, 0, 0), init);
    if (!init.empty()) enc.add("init." + id, mk_and(std::move(init)), {"init", {id}, 0});
  }
  for (std::size_t i = 0; i < req.constraints.size(); ++i) {
    if (model.placement(req, req.constraints[i]) != Placement::Precondition) continue;
    Expr term = rename_refs(req.constraints[i], [&](const std::string& ref) {
      return symbol(VariableKey::prop(enc.state_of.at(ref), 0, 0));
    });
    enc.add("init." + req.id + ".constraint." + std::to_string(i), std::move(term),
            {"init", {req.id, std::to_string(i)}, 0});
  }

  for (const auto& id : req_outputs) {
    std::vector<Expr> goal;
    describe(model.property(id), enc.var(id, n, 1), goal);
    if (!goal.empty()) enc.add("goal." + id, mk_and(std::move(goal)), {"goal", {id}, n});
  }
  for (std::size_t i = 0; i < req.constraints.size(); ++i) {
    if (model.placement(req, req.constraints[i]) == Placement::Precondition) continue;
    Expr term = rename_refs(req.constraints[i], [&](const std::string& ref) {
      bool out = req_outputs.contains(ref);
      return symbol(VariableKey::prop(enc.state_of.at(ref), out ? n : 0, out ? 1 : 0));
    });
    enc.add("goal." + req.id + ".constraint." + std::to_string(i), std::move(term),
            {"goal", {req.id, std::to_string(i)}, n});
  }

  if (!enc.expanded) return;  // class-collapsed variables align by construction

  for (const auto& pc : index.property_classes) {
    std::vector<Expr> same;
    for (const auto& m : pc.members)
      if (m != pc.class_id) same.push_back(mk_eq(enc.var(m, 0, 0), enc.var(pc.class_id, 0, 0)));
    if (!same.empty()) enc.add("align.class." + pc.class_id, mk_and(std::move(same)), {"align", {pc.class_id}, 0});
  }
  auto align = [&](const std::string& prefix, const std::string& q, int t, int layer) {
    std::vector<Expr> same;
    for (const auto& s : index.syn_props.at(q)) same.push_back(mk_eq(enc.var(q, t, layer), enc.var(s, t, layer)));
    if (!same.empty()) enc.add(prefix + q, mk_and(std::move(same)), {"align", {q}, t});
  };
  for (const auto& q : req_inputs)
    if (has_value_description(model.property(q), ExpressionGoal::Requirement)) align("align.pre.", q, 0, 0);
  std::set<std::string> req_eff;
  for (const auto& q : req_outputs)
    if (!model.property(q).instances.empty()) req_eff.insert(q);
  for (const auto& e : req.constraints)
    for (const auto& ref : references(e))
      if (req_outputs.contains(ref)) req_eff.insert(ref);
  for (const auto& q : req_eff) align("align.eff.", q, n, 1);
}

void assert_happening_continuation(Encoding& enc, const CapabilityModel&, int n) {
  // Booleans first, then reals: separate families.
  for (int t = 1; t <= n; ++t)
    for (const auto& s : enc.state) {
      if (s.sort != Sort::Bool) continue;
      Expr now = Expr::ref(symbol(VariableKey::prop(s.id, t, 0)));
      Expr prev = Expr::ref(symbol(VariableKey::prop(s.id, t - 1, 1)));
      Origin origin{"cont", {s.id}, t};
      enc.add("cont." + s.id + tk(t) + ".pos", mk_implies(now, prev), origin);
      enc.add("cont." + s.id + tk(t) + ".neg", mk_implies(mk_not(now), mk_not(prev)), origin);
    }
  for (int t = 1; t <= n; ++t)
    for (const auto& s : enc.state) {
      if (s.sort != Sort::Real) continue;
      enc.add("cont." + s.id + tk(t),
              mk_eq(Expr::ref(symbol(VariableKey::prop(s.id, t, 0))),
                    Expr::ref(symbol(VariableKey::prop(s.id, t - 1, 1)))),
              {"cont", {s.id}, t});
    }
}

Encoding build(const CapabilityModel& model, const SynonymyIndex& index, int n, const EncoderOptions& options) {
  Encoding enc = make_encoding(model, index, n, options);
  declare_variables(enc, model, index, n);
  assert_boundaries(enc, model, index, n);
  for (int t = 0; t <= n; ++t) assert_capability_semantics(enc, model, index, t);
  for (int t = 0; t <= n; ++t) assert_layer_frame_axioms(enc, model, index, t);
  for (int t = 0; t <= n; ++t) assert_mutexes(enc, model, index, t);
  assert_happening_continuation(enc, model, n);
  return enc;
}

bool is_goal_family(const Assertion& a) {
  return a.name.starts_with("goal.") || a.name.starts_with("align.eff.");
}

}  // namespace capplan
