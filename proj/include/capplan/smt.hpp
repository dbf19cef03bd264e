#pragma once

// SMT-LIB2 rendering of encodings and an out-of-process solver driver.

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "capplan/encoder.hpp"
#include "capplan/rational.hpp"

namespace capplan {

struct SolverConfig {
  std::vector<std::string> command{"z3", "-in"};
  double timeout_seconds = 60.0;
  bool produce_unsat_cores = true;
  std::optional<long> random_seed;
  /// Appends every exchange with the solver to this file when set.
  std::optional<std::string> transcript_path;
};

/// Splits a shell-like command line on whitespace, honouring '...' and "...".
std::vector<std::string> split_command(std::string_view command_line);

struct EmitOptions {
  bool produce_unsat_cores = true;
  std::optional<long> random_seed;
  /// When set, only assertions with these names are emitted.
  const std::set<std::string>* only = nullptr;
};

/// Byte-deterministic SMT-LIB2 script for one encoding.
std::string emit(const Encoding& encoding, const EmitOptions& options = {});

/// Logic header name, "QF_LRA" or "QF_NRA".
std::string_view logic_name(Logic logic);

// S-expressions as printed by solvers.
struct SExpr {
  enum class Kind { Atom, String, List };
  Kind kind = Kind::Atom;
  std::string text;  // atom (quotes stripped from |symbols|) or string contents
  std::vector<SExpr> items;

  bool is_atom(std::string_view s) const { return kind == Kind::Atom && text == s; }
  bool is_list() const { return kind == Kind::List; }
};

/// Parses all complete S-expressions in `text`. Throws SolverProtocolError.
std::vector<SExpr> parse_sexprs(std::string_view text);

/// Literal model value: true/false, numerals, decimals, (- x), (/ x y).
/// std::nullopt for anything else (e.g. algebraic numbers, terms).
std::optional<Value> parse_model_value(const SExpr& e);

struct Sat {
  std::map<std::string, Value> valuation;  // solver symbol -> value
};
struct Unsat {
  std::vector<std::string> core;
  bool core_available = false;
};
struct Unknown {
  std::string reason;
};
using SolveOutcome = std::variant<Sat, Unsat, Unknown>;

/// Interprets the full answer stream of a batch script.
SolveOutcome parse_solver_output(std::string_view output);

/// Runs the solver once on a complete script. Throws SolverLaunchError and
/// SolverProtocolError; a timeout is reported as Unknown.
SolveOutcome solve(const std::string& script, const SolverConfig& config);

/// Deletion-based core minimization: drops each core member in turn and keeps
/// the removal whenever the remaining assertions are still unsatisfiable.
std::vector<std::string> minimize_core(const Encoding& encoding, std::vector<std::string> core,
                                       const SolverConfig& config);

class Subprocess;

/// Long-lived interactive solver for incremental deepening: per-happening
/// assertions accumulate, goal assertions live inside push/pop scopes.
class SolverSession {
 public:
  explicit SolverSession(const SolverConfig& config, Logic logic);
  ~SolverSession();
  SolverSession(const SolverSession&) = delete;
  SolverSession& operator=(const SolverSession&) = delete;

  /// Declares and asserts whatever `encoding` adds over previous calls,
  /// checks it with its goal assertions, and retracts the goal again.
  SolveOutcome check(const Encoding& encoding);

 private:
  void send(const std::string& commands);
  SExpr read_response();

  SolverConfig config_;
  std::unique_ptr<Subprocess> process_;
  std::set<std::string> declared_;
  std::set<std::string> asserted_;
  std::string pending_;
};

}  // namespace capplan
