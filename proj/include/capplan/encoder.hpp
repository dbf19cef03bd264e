#pragma once

// Bounded-happenings SMT encoding. Each happening t holds two layers of
// state variables (before and after capability application) and one boolean
// per provided capability. By default there is one state variable per
// synonymy class; the expanded mode keeps one per property and emits the
// synonym propagation and alignment equalities explicitly.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "capplan/expr.hpp"
#include "capplan/model.hpp"
#include "capplan/synonymy.hpp"

namespace capplan {

struct VariableKey {
  enum class Kind { Prop, Cap };
  Kind kind = Kind::Prop;
  std::string id;  // state variable id (class or property) or capability id
  int happening = 0;
  int layer = 0;  // unused for Cap

  auto operator<=>(const VariableKey&) const = default;
  bool operator==(const VariableKey&) const = default;

  static VariableKey prop(std::string id, int t, int layer) { return {Kind::Prop, std::move(id), t, layer}; }
  static VariableKey cap(std::string id, int t) { return {Kind::Cap, std::move(id), t, 0}; }
};

/// Solver symbol: "<id>#t<k>#l<l>" or "<cap>#t<k>".
std::string symbol(const VariableKey& key);

enum class Logic { LinearReal, NonlinearReal };

/// Provenance of one assertion, used for explanations.
struct Origin {
  std::string family;                 // init, goal, pre, eff, constraint, frame, mutex, cont, syn, align
  std::vector<std::string> elements;  // capability / property / class ids
  std::optional<int> happening;
};

struct Assertion {
  std::string name;
  Expr term;  // references are solver symbols
  Origin origin;
};

/// One state variable family: a synonymy class or, in expanded mode, a property.
struct StateVariable {
  std::string id;
  Sort sort = Sort::Real;
  std::string class_id;
  std::vector<std::string> members;  // properties it stands for
};

struct EncoderOptions {
  bool expanded_synonyms = false;
};

class Encoding {
 public:
  int bound = 0;  // n; the encoding has n + 1 happenings
  bool expanded = false;
  Logic logic = Logic::LinearReal;
  std::vector<StateVariable> state;
  std::vector<std::string> capabilities;
  std::vector<std::pair<VariableKey, Sort>> variables;  // declaration order
  std::vector<Assertion> assertions;
  /// capability id -> its unbound parameter properties
  std::map<std::string, std::vector<std::string>> parameters;
  /// property id -> state variable id
  std::map<std::string, std::string> state_of;

  int happenings() const { return bound + 1; }

  /// Appends a declaration; throws std::logic_error on a duplicate symbol.
  void declare(const VariableKey& key, Sort sort);
  /// Appends an assertion; throws std::logic_error on a duplicate name or an
  /// undeclared symbol.
  void add(std::string name, Expr term, Origin origin);

  bool is_declared(const std::string& sym) const { return key_by_symbol_.contains(sym); }
  const VariableKey* key_of(const std::string& sym) const;
  std::optional<Sort> sort_of(const std::string& sym) const;
  const Assertion* assertion(const std::string& name) const;

  /// Reference to the state variable of a property at (t, layer).
  Expr var(const std::string& property_id, int t, int layer) const;
  Expr cap(const std::string& capability_id, int t) const;

 private:
  std::map<std::string, std::size_t> key_by_symbol_;
  std::map<std::string, std::size_t> assertion_by_name_;
};

/// Empty encoding with state/capability metadata for bound n.
Encoding make_encoding(const CapabilityModel& model, const SynonymyIndex& index, int n,
                       const EncoderOptions& options = {});

void declare_variables(Encoding& enc, const CapabilityModel& model, const SynonymyIndex& index, int n);
void assert_layer_frame_axioms(Encoding& enc, const CapabilityModel& model, const SynonymyIndex& index, int t);
void assert_capability_semantics(Encoding& enc, const CapabilityModel& model, const SynonymyIndex& index, int t);
void assert_mutexes(Encoding& enc, const CapabilityModel& model, const SynonymyIndex& index, int t);
void assert_boundaries(Encoding& enc, const CapabilityModel& model, const SynonymyIndex& index, int n);
void assert_happening_continuation(Encoding& enc, const CapabilityModel& model, int n);

/// Whole encoding in the fixed family order: declarations, boundaries,
/// capability semantics, layer frame axioms, mutexes, happening continuation.
Encoding build(const CapabilityModel& model, const SynonymyIndex& index, int n,
               const EncoderOptions& options = {});

bool is_goal_family(const Assertion& a);

}  // namespace capplan
