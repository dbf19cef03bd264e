#include "capplan/synonymy.hpp"

#include <algorithm>
#include <tuple>

#include "capplan/error.hpp"

namespace capplan {

namespace {

// Disjoint sets over property ids.
class UnionFind {
 public:
  void add(const std::string& id) { parent_.try_emplace(id, id); }

  const std::string& find(const std::string& id) {
    std::string& p = parent_.at(id);
    if (p != id) p = find(p);
    return p;
  }

  void unite(const std::string& a, const std::string& b) {
    std::string ra = find(a), rb = find(b);
    if (ra == rb) return;
    if (rb < ra) std::swap(ra, rb);
    parent_[rb] = ra;  // smaller id stays the root
  }

 private:
  std::map<std::string, std::string> parent_;
};

const Entity& carrier_of(const CapabilityModel& model, const Property& p) {
  const Entity* e = model.entity(p.carrier_id);
  if (!e) throw DanglingReference("property '" + p.id + "' has unknown carrier '" + p.carrier_id + "'");
  return *e;
}

}  // namespace

const PropertyClass& SynonymyIndex::property_class(const std::string& class_id) const {
  auto it = std::lower_bound(property_classes.begin(), property_classes.end(), class_id,
                             [](const PropertyClass& c, const std::string& id) { return c.class_id < id; });
  if (it == property_classes.end() || it->class_id != class_id)
    throw DanglingReference("unknown property class '" + class_id + "'");
  return *it;
}

std::vector<std::set<std::string>> synonymous_products(const CapabilityModel& model) {
  std::map<std::pair<CarrierKind, std::string>, std::set<std::string>> blocks;
  for (const auto* list : {&model.products, &model.information})
    for (const auto& e : *list) blocks[{e.kind, e.type_id}].insert(e.id);
  std::vector<std::set<std::string>> out;
  for (auto& [_, block] : blocks) out.push_back(std::move(block));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return *a.begin() < *b.begin(); });
  return out;
}

SynonymyIndex synonymous_properties(const CapabilityModel& model) {
  UnionFind uf;
  // (carrier kind, carrier type id, property type id) -> first member seen
  std::map<std::tuple<CarrierKind, std::string, std::string>, std::string> first_of_key;
  for (const auto& [id, p] : model.properties) {
    uf.add(id);
    const Entity& carrier = carrier_of(model, p);
    if (carrier.kind == CarrierKind::Resource) continue;
    auto key = std::make_tuple(carrier.kind, carrier.type_id, p.type_id);
    auto [it, inserted] = first_of_key.try_emplace(key, id);
    if (!inserted) uf.unite(it->second, id);
  }

  SynonymyIndex index;
  std::map<std::string, std::set<std::string>> members;
  for (const auto& [id, _] : model.properties) {
    std::string root = uf.find(id);
    index.class_of[id] = root;
    members[root].insert(id);
  }
  for (auto& [root, m] : members) {
    for (const auto& q : m) {
      std::set<std::string> others = m;
      others.erase(q);
      index.syn_props[q] = std::move(others);
    }
    index.property_classes.push_back({root, std::move(m)});
  }
  return index;
}

std::map<std::string, std::set<std::string>> synonymous_capabilities(const SynonymyIndex& index,
                                                                     const CapabilityModel& model) {
  std::map<std::string, std::set<std::string>> out;
  std::vector<std::pair<std::string, std::set<std::string>>> attached;
  for (const auto& c : model.provided) attached.emplace_back(c.id, model.attached_properties(c));

  for (const auto& [q, synonyms] : index.syn_props) {
    auto& caps = out[q];
    for (const auto& [cid, props] : attached) {
      if (props.contains(q)) continue;
      bool linked = std::any_of(synonyms.begin(), synonyms.end(),
                                [&](const std::string& s) { return props.contains(s); });
      if (linked) caps.insert(cid);
    }
  }
  return out;
}

SynonymyIndex build_synonymy(const CapabilityModel& model) {
  SynonymyIndex index = synonymous_properties(model);
  index.syn_caps = synonymous_capabilities(index, model);
  return index;
}

EffectSets effect_sets(const Capability& c, const CapabilityModel& model, const SynonymyIndex&) {
  EffectSets out;
  std::set<std::string> outputs = model.output_properties(c);
  for (const auto& q : outputs) {
    const Property& p = model.property(q);
    bool described = std::any_of(p.instances.begin(), p.instances.end(), [](const InstanceDescription& d) {
      return d.goal != ExpressionGoal::ActualValue;
    });
    if (described) out.all.insert(q);
  }
  for (const auto& e : c.constraints) {
    if (model.placement(c, e) == Placement::Precondition) continue;
    for (const auto& ref : references(e))
      if (outputs.contains(ref)) out.all.insert(ref);
  }

  for (const auto& q : out.all) {
    if (model.datatype_of(q) == Datatype::Real) {
      out.numeric.insert(q);
      continue;
    }
    // Only constant boolean assurances carry a sign; an assurance without a
    // value keeps the proposition as it was.
    bool sets_true = false, sets_false = false;
    for (const auto& d : model.property(q).instances) {
      if (d.goal != ExpressionGoal::Assurance || !d.value || !is_bool(*d.value)) continue;
      bool v = std::get<bool>(*d.value);
      if (d.relation == Relation::Neq) v = !v;
      (v ? sets_true : sets_false) = true;
    }
    if (sets_true && !sets_false) out.positive.insert(q);
    if (sets_false && !sets_true) out.negative.insert(q);
  }
  return out;
}

namespace {

const std::set<std::string>& signed_set(const EffectSets& e, EffectSign sign) {
  switch (sign) {
    case EffectSign::Positive: return e.positive;
    case EffectSign::Negative: return e.negative;
    case EffectSign::Numeric: return e.numeric;
  }
  return e.numeric;
}

}  // namespace

std::set<std::string> direct_effect_capabilities(const std::string& property_id, EffectSign sign,
                                                 const CapabilityModel& model,
                                                 const SynonymyIndex& index) {
  std::set<std::string> out;
  for (const auto& c : model.provided)
    if (signed_set(effect_sets(c, model, index), sign).contains(property_id)) out.insert(c.id);
  return out;
}

std::set<std::string> synonymous_effect_capabilities(const std::string& property_id, EffectSign sign,
                                                     const CapabilityModel& model,
                                                     const SynonymyIndex& index) {
  std::set<std::string> out;
  auto caps = index.syn_caps.find(property_id);
  auto syns = index.syn_props.find(property_id);
  if (caps == index.syn_caps.end() || syns == index.syn_props.end()) return out;
  for (const auto& cid : caps->second) {
    const Capability* c = model.capability(cid);
    const auto& eff = signed_set(effect_sets(*c, model, index), sign);
    for (const auto& s : syns->second)
      if (eff.contains(s)) {
        out.insert(cid);
        break;
      }
  }
  return out;
}

std::map<std::string, ClassEffects> class_effects(const CapabilityModel& model, const SynonymyIndex& index) {
  std::map<std::string, ClassEffects> out;
  for (const auto& pc : index.property_classes) out[pc.class_id];
  for (const auto& c : model.provided) {
    EffectSets eff = effect_sets(c, model, index);
    for (const auto& q : eff.positive) out[index.class_of.at(q)].positive.insert(c.id);
    for (const auto& q : eff.negative) out[index.class_of.at(q)].negative.insert(c.id);
    for (const auto& q : eff.numeric) out[index.class_of.at(q)].numeric.insert(c.id);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> mutex_pairs(const CapabilityModel& model,
                                                             const SynonymyIndex& index) {
  std::vector<std::pair<std::string, std::set<std::string>>> classes;
  for (const auto& c : model.provided) {
    std::set<std::string> cls;
    for (const auto& q : model.attached_properties(c)) cls.insert(index.class_of.at(q));
    classes.emplace_back(c.id, std::move(cls));
  }
  std::sort(classes.begin(), classes.end());
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t i = 0; i < classes.size(); ++i)
    for (std::size_t j = i + 1; j < classes.size(); ++j) {
      const auto& a = classes[i].second;
      const auto& b = classes[j].second;
      bool shared = std::any_of(a.begin(), a.end(), [&](const std::string& x) { return b.contains(x); });
      if (shared) out.emplace_back(classes[i].first, classes[j].first);
    }
  return out;
}

}  // namespace capplan
