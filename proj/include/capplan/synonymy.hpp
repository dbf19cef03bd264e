#pragma once

// Identity alignment between capabilities that were modeled independently.
// Products (and information entities) sharing a type id are synonymous;
// their properties sharing a type description are synonymous; capabilities
// linked through synonymous properties are synonymous capabilities. The
// transitive closure of property synonymy gives the property classes the
// encoder and the oracle both operate on.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "capplan/model.hpp"

namespace capplan {

struct PropertyClass {
  std::string class_id;  // lexicographically smallest member
  std::set<std::string> members;
  bool operator==(const PropertyClass&) const = default;
};

struct SynonymyIndex {
  std::vector<PropertyClass> property_classes;  // sorted by class_id
  std::map<std::string, std::string> class_of;  // property id -> class id
  std::map<std::string, std::set<std::string>> syn_props;  // Q^syn_q, excludes q
  std::map<std::string, std::set<std::string>> syn_caps;   // C^syn_q

  const PropertyClass& property_class(const std::string& class_id) const;
};

/// Blocks of product/information ids with equal type ids.
std::vector<std::set<std::string>> synonymous_products(const CapabilityModel& model);

/// Fills property_classes, class_of and syn_props (syn_caps left empty).
SynonymyIndex synonymous_properties(const CapabilityModel& model);

std::map<std::string, std::set<std::string>> synonymous_capabilities(const SynonymyIndex& index,
                                                                     const CapabilityModel& model);

/// All three steps.
SynonymyIndex build_synonymy(const CapabilityModel& model);

struct EffectSets {
  std::set<std::string> all;       // eff_c
  std::set<std::string> positive;  // eff+_c
  std::set<std::string> negative;  // eff-_c
  std::set<std::string> numeric;   // eff^num_c
};

EffectSets effect_sets(const Capability& c, const CapabilityModel& model, const SynonymyIndex& index);

enum class EffectSign { Positive, Negative, Numeric };

/// C+_p, C-_p or C^num_p: provided capabilities with a direct effect of that sign on p.
std::set<std::string> direct_effect_capabilities(const std::string& property_id, EffectSign sign,
                                                 const CapabilityModel& model,
                                                 const SynonymyIndex& index);

/// C^{syn,+}_p and friends: synonymous capabilities with an effect of that
/// sign on one of p's synonyms.
std::set<std::string> synonymous_effect_capabilities(const std::string& property_id, EffectSign sign,
                                                     const CapabilityModel& model,
                                                     const SynonymyIndex& index);

/// Capabilities allowed to change a class in one direction: every provided
/// capability with an effect of that sign on any member of the class. This
/// is the union of the direct and synonymous sets over all members, and also
/// covers a capability related to p that changes p through a synonym.
struct ClassEffects {
  std::set<std::string> positive;
  std::set<std::string> negative;
  std::set<std::string> numeric;
};

std::map<std::string, ClassEffects> class_effects(const CapabilityModel& model, const SynonymyIndex& index);

/// Unordered pairs (first < second) of provided capabilities whose attached
/// properties share a class.
std::vector<std::pair<std::string, std::string>> mutex_pairs(const CapabilityModel& model,
                                                             const SynonymyIndex& index);

}  // namespace capplan
