#include "capplan/oracle.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include "capplan/error.hpp"

namespace capplan {

std::string_view to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::Structural: return "Structural";
    case Violation::Kind::InitialState: return "InitialState";
    case Violation::Kind::Precondition: return "PreconditionFailed";
    case Violation::Kind::Effect: return "EffectFailed";
    case Violation::Kind::Constraint: return "ConstraintFailed";
    case Violation::Kind::Mutex: return "MutexViolation";
    case Violation::Kind::Frame: return "FrameViolation";
    case Violation::Kind::Continuation: return "ContinuationViolation";
    case Violation::Kind::Goal: return "GoalFailed";
  }
  return "Structural";
}

namespace {

using Condition = std::pair<std::string, Expr>;  // label, condition over property ids

bool holds(const Expr& e, const Valuation& v) {
  try {
    return evaluate_bool(e, v);
  } catch (const Error&) {
    return false;
  }
}

struct CapabilityRules {
  const Capability* cap = nullptr;
  std::set<std::string> outputs;
  std::vector<Condition> pre;   // read layer 0
  std::vector<Condition> eff;   // outputs at layer 1, the rest at layer 0
  std::vector<Condition> constraints;
  std::set<std::string> attached_classes;
  std::set<std::string> rising, falling, numeric;  // classes it may change
};

class Semantics {
 public:
  Semantics(const CapabilityModel& model, const SynonymyIndex& index) : model_(model), index_(index) {
    for (const auto& pc : index.property_classes)
      sorts_[pc.class_id] = model.datatype_of(pc.class_id) == Datatype::Boolean ? Sort::Bool : Sort::Real;

    for (const auto& c : model.provided) {
      CapabilityRules r;
      r.cap = &c;
      r.outputs = model.output_properties(c);
      for (const auto& q : model.input_properties(c))
        for (const auto& d : model.property(q).instances)
          if (d.goal != ExpressionGoal::ActualValue && d.value) r.pre.emplace_back(q, desugar(model.property(q), d));
      for (const auto& q : r.outputs)
        for (const auto& d : model.property(q).instances)
          if (d.goal != ExpressionGoal::ActualValue && d.value) r.eff.emplace_back(q, desugar(model.property(q), d));
      for (std::size_t i = 0; i < c.constraints.size(); ++i) {
        Condition cond{"constraint " + std::to_string(i), c.constraints[i]};
        switch (model.placement(c, c.constraints[i])) {
          case Placement::Precondition: r.pre.push_back(std::move(cond)); break;
          case Placement::Effect: r.eff.push_back(std::move(cond)); break;
          case Placement::Mixed: r.constraints.push_back(std::move(cond)); break;
        }
      }
      for (const auto& q : model.attached_properties(c)) r.attached_classes.insert(index.class_of.at(q));
      EffectSets eff = effect_sets(c, model, index);
      for (const auto& q : eff.positive) r.rising.insert(index.class_of.at(q));
      for (const auto& q : eff.negative) r.falling.insert(index.class_of.at(q));
      for (const auto& q : eff.numeric) r.numeric.insert(index.class_of.at(q));
      rules_.emplace(c.id, std::move(r));
    }

    const Capability& req = model.required;
    req_outputs_ = model.output_properties(req);
    std::set<std::string> req_inputs = model.input_properties(req);
    for (const auto& [id, p] : model.properties) {
      for (const auto& d : p.instances) {
        if (!d.value) continue;
        bool actual = d.goal == ExpressionGoal::ActualValue;
        if (actual && model.is_provided_side(id)) init_.emplace_back(id, desugar(p, d));
        if (!actual && req_inputs.contains(id)) init_.emplace_back(id, desugar(p, d));
      }
    }
    for (const auto& q : req_outputs_)
      for (const auto& d : model.property(q).instances)
        if (d.goal != ExpressionGoal::ActualValue && d.value) goal_.emplace_back(q, desugar(model.property(q), d));
    for (std::size_t i = 0; i < req.constraints.size(); ++i) {
      const Expr& e = req.constraints[i];
      Condition cond{req.id + " constraint " + std::to_string(i), e};
      if (model.placement(req, e) == Placement::Precondition) {
        init_.push_back(std::move(cond));
      } else {
        for (const auto& ref : references(e)) goal_reads_initial_ = goal_reads_initial_ || !req_outputs_.contains(ref);
        goal_.push_back(std::move(cond));
      }
    }
  }

  const std::map<std::string, Sort>& sorts() const { return sorts_; }
  const std::map<std::string, CapabilityRules>& rules() const { return rules_; }
  const std::vector<Condition>& init() const { return init_; }
  bool goal_reads_initial() const { return goal_reads_initial_; }
  const std::string& class_of(const std::string& property) const { return index_.class_of.at(property); }

  bool mutex(const CapabilityRules& a, const CapabilityRules& b) const {
    return std::any_of(a.attached_classes.begin(), a.attached_classes.end(),
                       [&](const std::string& k) { return b.attached_classes.contains(k); });
  }

  // Every property mapped to its class value in `before`, or in `after`
  // when listed in `late`.
  Valuation valuation(const WorldState& before, const WorldState& after, const std::set<std::string>& late) const {
    Valuation v;
    for (const auto& [id, cls] : index_.class_of) v.emplace(id, (late.contains(id) ? after : before).at(cls));
    return v;
  }

  void check_initial(const WorldState& s0, std::vector<Violation>& out) const {
    Valuation v = valuation(s0, s0, {});
    for (const auto& [label, e] : init_)
      if (!holds(e, v))
        out.push_back({Violation::Kind::InitialState, label, 0, "initial state violates " + to_infix(e)});
  }

  void check_happening(int t, const Happening& h, std::vector<Violation>& out) const {
    std::vector<const CapabilityRules*> applied;
    for (const auto& id : h.applied) applied.push_back(&rules_.at(id));

    for (std::size_t i = 0; i < applied.size(); ++i)
      for (std::size_t j = i + 1; j < applied.size(); ++j)
        if (mutex(*applied[i], *applied[j]))
          out.push_back({Violation::Kind::Mutex, applied[i]->cap->id + "," + applied[j]->cap->id, t,
                         "mutex capabilities applied together"});

    Valuation before = valuation(h.layer0, h.layer0, {});
    for (const auto* r : applied) {
      const std::string& c = r->cap->id;
      for (const auto& [label, e] : r->pre)
        if (!holds(e, before))
          out.push_back({Violation::Kind::Precondition, c, t, label + ": " + to_infix(e) + " fails before application"});
      Valuation v = valuation(h.layer0, h.layer1, r->outputs);
      for (const auto& [label, e] : r->eff)
        if (!holds(e, v))
          out.push_back({Violation::Kind::Effect, c, t, label + ": " + to_infix(e) + " fails after application"});
      for (const auto& [label, e] : r->constraints)
        if (!holds(e, v)) out.push_back({Violation::Kind::Constraint, c, t, label + ": " + to_infix(e) + " fails"});
    }

    for (const auto& [cls, sort] : sorts_) {
      const Value& a = h.layer0.at(cls);
      const Value& b = h.layer1.at(cls);
      if (a == b) continue;
      bool allowed = false;
      for (const auto* r : applied) {
        if (sort == Sort::Real) allowed = allowed || r->numeric.contains(cls);
        else if (std::get<bool>(b)) allowed = allowed || r->rising.contains(cls);
        else allowed = allowed || r->falling.contains(cls);
      }
      if (!allowed)
        out.push_back({Violation::Kind::Frame, cls, t,
                       "changed from " + to_string(a) + " to " + to_string(b) + " without an affecting capability"});
    }
  }

  bool goal_holds(const WorldState& first, const WorldState& last, std::vector<Violation>* out, int t) const {
    Valuation v = valuation(first, last, req_outputs_);
    bool ok = true;
    for (const auto& [label, e] : goal_) {
      if (holds(e, v)) continue;
      ok = false;
      if (out) out->push_back({Violation::Kind::Goal, label, t, "goal " + to_infix(e) + " not reached"});
    }
    return ok;
  }

 private:
  const CapabilityModel& model_;
  const SynonymyIndex& index_;
  std::map<std::string, Sort> sorts_;
  std::map<std::string, CapabilityRules> rules_;
  std::set<std::string> req_outputs_;
  std::vector<Condition> init_;
  std::vector<Condition> goal_;
  bool goal_reads_initial_ = false;
};

bool well_sorted(const Value& v, Sort s) { return is_bool(v) == (s == Sort::Bool); }

void check_layer(const Semantics& sem, const WorldState& layer, int t, const std::string& name,
                 std::vector<Violation>& out) {
  for (const auto& [cls, sort] : sem.sorts()) {
    auto it = layer.find(cls);
    if (it == layer.end())
      out.push_back({Violation::Kind::Structural, cls, t, name + " has no value for class"});
    else if (!well_sorted(it->second, sort))
      out.push_back({Violation::Kind::Structural, cls, t, name + " value has the wrong datatype"});
  }
  for (const auto& [cls, v] : layer)
    if (!sem.sorts().contains(cls)) out.push_back({Violation::Kind::Structural, cls, t, name + " names an unknown class"});
}

void fill_metadata(Plan& plan, const CapabilityModel& model, const SynonymyIndex& index) {
  for (const auto& pc : index.property_classes) plan.classes[pc.class_id] = {pc.members.begin(), pc.members.end()};
  for (int t = 0; t < static_cast<int>(plan.happenings.size()); ++t) {
    const Happening& h = plan.happenings[t];
    for (const auto& c : h.applied) {
      auto params = model.unbound_parameters(*model.capability(c));
      if (params.empty()) continue;
      auto& slot = plan.parameters[c + "#t" + std::to_string(t)];
      for (const auto& p : params) slot.emplace(p, h.layer0.at(index.class_of.at(p)));
    }
  }
}

}  // namespace

Verdict simulate(const CapabilityModel& model, const SynonymyIndex& index, const Plan& plan) {
  Semantics sem(model, index);
  Verdict verdict;
  auto& out = verdict.violations;

  if (plan.happenings.empty()) out.push_back({Violation::Kind::Structural, "plan", std::nullopt, "plan has no happenings"});
  if (plan.bound_happenings != static_cast<int>(plan.happenings.size()))
    out.push_back({Violation::Kind::Structural, "plan", std::nullopt, "boundHappenings differs from happening count"});
  for (int t = 0; t < static_cast<int>(plan.happenings.size()); ++t) {
    const Happening& h = plan.happenings[t];
    check_layer(sem, h.layer0, t, "layer0", out);
    check_layer(sem, h.layer1, t, "layer1", out);
    for (const auto& c : h.applied)
      if (!sem.rules().contains(c)) out.push_back({Violation::Kind::Structural, c, t, "not a provided capability"});
  }
  for (const auto& [key, values] : plan.parameters) {
    auto hash = key.rfind("#t");
    int t = hash == std::string::npos ? -1 : std::atoi(key.c_str() + hash + 2);
    if (t < 0 || t >= static_cast<int>(plan.happenings.size())) {
      out.push_back({Violation::Kind::Structural, key, std::nullopt, "parameter entry names no happening"});
      continue;
    }
    for (const auto& [p, v] : values) {
      auto cls = index.class_of.find(p);
      if (cls == index.class_of.end() || !plan.happenings[t].layer0.contains(cls->second) ||
          plan.happenings[t].layer0.at(cls->second) != v)
        out.push_back({Violation::Kind::Structural, key, t, "parameter " + p + " disagrees with layer0"});
    }
  }
  if (!out.empty()) return verdict;

  const int n = static_cast<int>(plan.happenings.size());
  sem.check_initial(plan.happenings.front().layer0, out);
  for (int t = 0; t < n; ++t) {
    const Happening& h = plan.happenings[t];
    if (t > 0)
      for (const auto& [cls, v] : h.layer0)
        if (plan.happenings[t - 1].layer1.at(cls) != v)
          out.push_back({Violation::Kind::Continuation, cls, t, "layer0 differs from the previous layer1"});
    sem.check_happening(t, h, out);
  }
  sem.goal_holds(plan.happenings.front().layer0, plan.happenings.back().layer1, &out, n - 1);
  return verdict;
}

std::vector<Rational> default_value_domain(const CapabilityModel& model) {
  std::set<Rational> values;
  auto collect = [&](const Value& v) {
    if (const auto* r = std::get_if<Rational>(&v)) values.insert(*r);
  };
  std::function<void(const Expr&)> walk = [&](const Expr& e) {
    if (const auto* c = std::get_if<Constant>(&e.node)) collect(c->value);
    if (const auto* a = std::get_if<Apply>(&e.node))
      for (const auto& arg : a->args) walk(arg);
  };
  for (const auto& [id, p] : model.properties)
    for (const auto& d : p.instances)
      if (d.value) collect(*d.value);
  for (const auto& c : model.provided)
    for (const auto& e : c.constraints) walk(e);
  for (const auto& e : model.required.constraints) walk(e);
  if (values.empty()) values.insert(Rational(0));
  return {values.begin(), values.end()};
}

std::optional<Plan> brute_force_plan(const CapabilityModel& model, const SynonymyIndex& index, int max_happenings,
                                     const std::vector<Rational>& domain, std::size_t budget) {
  Semantics sem(model, index);
  std::size_t spent = 0;
  auto spend = [&] {
    if (++spent > budget) throw DomainTooLarge("search budget of " + std::to_string(budget) + " exceeded");
  };

  std::vector<std::string> classes;
  std::map<std::string, std::vector<Value>> candidates;
  for (const auto& [cls, sort] : sem.sorts()) {
    classes.push_back(cls);
    auto& vals = candidates[cls];
    if (sort == Sort::Bool) vals = {Value(false), Value(true)};
    else
      for (const auto& r : domain) vals.emplace_back(r);
  }
  // Initial conditions over a single class prune that class's candidates.
  for (const auto& [label, e] : sem.init()) {
    std::set<std::string> touched;
    for (const auto& ref : references(e)) touched.insert(sem.class_of(ref));
    if (touched.size() != 1) continue;
    const std::string& cls = *touched.begin();
    std::vector<Value> kept;
    for (const auto& v : candidates[cls]) {
      Valuation val;
      for (const auto& ref : references(e)) val.emplace(ref, v);
      if (holds(e, val)) kept.push_back(v);
    }
    candidates[cls] = std::move(kept);
  }

  // Assigns every combination of `options` (class -> values) on top of
  // `base` and calls visit; stops early when visit returns true.
  auto enumerate = [&](const WorldState& base, const std::vector<std::pair<std::string, std::vector<Value>>>& options,
                       const std::function<bool(const WorldState&)>& visit) {
    WorldState s = base;
    std::function<bool(std::size_t)> rec = [&](std::size_t i) -> bool {
      if (i == options.size()) return visit(s);
      for (const auto& v : options[i].second) {
        s[options[i].first] = v;
        if (rec(i + 1)) return true;
      }
      return false;
    };
    return rec(0);
  };

  struct Node {
    WorldState first;
    WorldState current;
    int parent = -1;
    Happening step;  // unused for roots
  };
  std::vector<Node> nodes;
  std::set<std::pair<WorldState, WorldState>> seen;
  auto key = [&](const Node& n) {
    return std::make_pair(sem.goal_reads_initial() ? n.first : WorldState{}, n.current);
  };

  std::vector<std::pair<std::string, std::vector<Value>>> all;
  for (const auto& cls : classes) all.emplace_back(cls, candidates[cls]);
  std::vector<int> frontier;
  enumerate({}, all, [&](const WorldState& s0) {
    spend();
    std::vector<Violation> v;
    sem.check_initial(s0, v);
    if (!v.empty()) return false;
    Node root{s0, s0, -1, {}};
    if (seen.insert(key(root)).second) {
      frontier.push_back(static_cast<int>(nodes.size()));
      nodes.push_back(std::move(root));
    }
    return false;
  });

  std::vector<const CapabilityRules*> caps;
  for (const auto& [id, r] : sem.rules()) caps.push_back(&r);
  const std::size_t subsets = std::size_t{1} << caps.size();

  auto reconstruct = [&](int leaf) {
    Plan plan;
    for (int i = leaf; nodes[i].parent >= 0; i = nodes[i].parent) plan.happenings.push_back(nodes[i].step);
    std::reverse(plan.happenings.begin(), plan.happenings.end());
    plan.bound_happenings = static_cast<int>(plan.happenings.size());
    fill_metadata(plan, model, index);
    return plan;
  };

  for (int depth = 0; depth < max_happenings && !frontier.empty(); ++depth) {
    std::vector<int> next;
    for (int ni : frontier) {
      for (std::size_t mask = 0; mask < subsets; ++mask) {
        std::vector<const CapabilityRules*> chosen;
        for (std::size_t i = 0; i < caps.size(); ++i)
          if (mask & (std::size_t{1} << i)) chosen.push_back(caps[i]);
        bool compatible = true;
        for (std::size_t i = 0; i < chosen.size() && compatible; ++i)
          for (std::size_t j = i + 1; j < chosen.size() && compatible; ++j)
            compatible = !sem.mutex(*chosen[i], *chosen[j]);
        if (!compatible) continue;

        const WorldState cur = nodes[ni].current;
        std::vector<std::pair<std::string, std::vector<Value>>> options;
        for (const auto& cls : classes) {
          bool up = false, down = false, num = false;
          for (const auto* r : chosen) {
            up = up || r->rising.contains(cls);
            down = down || r->falling.contains(cls);
            num = num || r->numeric.contains(cls);
          }
          std::vector<Value> vals{cur.at(cls)};
          if (num)
            for (const auto& r : domain)
              if (Value(r) != cur.at(cls)) vals.emplace_back(r);
          if (up && cur.at(cls) == Value(false)) vals.emplace_back(true);
          if (down && cur.at(cls) == Value(true)) vals.emplace_back(false);
          if (vals.size() > 1) options.emplace_back(cls, std::move(vals));
        }

        Happening step;
        for (const auto* r : chosen) step.applied.insert(r->cap->id);
        step.layer0 = cur;
        int found = -1;
        enumerate(cur, options, [&](const WorldState& after) {
          spend();
          step.layer1 = after;
          std::vector<Violation> v;
          sem.check_happening(depth, step, v);
          if (!v.empty()) return false;
          Node child{nodes[ni].first, after, ni, step};
          bool goal = sem.goal_holds(child.first, after, nullptr, depth);
          if (!goal && !seen.insert(key(child)).second) return false;
          int id = static_cast<int>(nodes.size());
          nodes.push_back(std::move(child));
          if (goal) {
            found = id;
            return true;
          }
          next.push_back(id);
          return false;
        });
        if (found >= 0) return reconstruct(found);
      }
    }
    frontier = std::move(next);
  }
  return std::nullopt;
}

}  // namespace capplan
