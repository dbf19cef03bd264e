#include "capplan/cli.hpp"

#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "capplan/error.hpp"
#include "capplan/oracle.hpp"
#include "capplan/planner.hpp"
#include "capplan/smt.hpp"

namespace capplan::cli {

namespace {

using nlohmann::json;

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string domain, problem, model, plan_path, output;
  std::string format = "json";
  int max_happenings = -1;
  int bound = 0;
  std::string solver_cmd;
  double timeout = 60.0;
  std::optional<long> seed;
  std::string transcript;
  bool expanded = false;
  bool incremental = false;
  bool minimize_core = false;
  bool no_cores = false;
  bool explain_synonymy = false;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoFailure("cannot read '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("'" + path + "' is not valid JSON: " + e.what());
  }
}

CapabilityModel load_model(const Options& o) {
  if (!o.model.empty()) {
    if (!o.domain.empty() || !o.problem.empty()) throw UsageFailure("--model excludes --domain/--problem");
    return parse_model(read_json(o.model));
  }
  if (o.domain.empty() || o.problem.empty()) throw UsageFailure("give --model, or both --domain and --problem");
  return parse_model(read_json(o.domain), read_json(o.problem));
}

void emit_document(const Options& o, const std::string& text, std::ostream& out) {
  if (o.output.empty()) {
    out << text;
    return;
  }
  std::ofstream file(o.output);
  if (!file || !(file << text)) throw IoFailure("cannot write '" + o.output + "'");
}

std::string render(const Options& o, const json& doc, const std::string& text) {
  return o.format == "json" ? doc.dump(2) + "\n" : text;
}

std::string value_text(const Value& v) { return to_string(v); }

std::string plan_text(const Plan& plan) {
  std::ostringstream s;
  s << "plan with " << plan.bound_happenings << " happening(s)\n";
  for (std::size_t t = 0; t < plan.happenings.size(); ++t) {
    const Happening& h = plan.happenings[t];
    s << "happening " << t << ":";
    if (h.applied.empty()) s << " (no capability)";
    for (const auto& c : h.applied) s << " " << c;
    s << "\n";
    for (const auto& [cls, v] : h.layer0) {
      s << "  " << cls << ": " << value_text(v);
      if (h.layer1.at(cls) != v) s << " -> " << value_text(h.layer1.at(cls));
      s << "\n";
    }
    for (const auto& [key, values] : plan.parameters) {
      if (!key.ends_with("#t" + std::to_string(t))) continue;
      for (const auto& [p, v] : values) s << "  parameter " << key << " " << p << " = " << value_text(v) << "\n";
    }
  }
  return s.str();
}

std::string outcomes_text(const std::vector<BoundOutcome>& outcomes) {
  std::ostringstream s;
  for (const auto& o : outcomes) {
    s << "bound " << o.bound << ": " << to_string(o.status);
    if (!o.reason.empty()) s << " (" << o.reason << ")";
    s << "\n";
  }
  return s.str();
}

std::string explanation_text(const Explanation& e) {
  std::ostringstream s;
  s << "unsat core (" << e.core.size() << " assertion(s)):\n";
  for (const auto& el : e.elements) s << "  " << el.assertion << ": " << el.rendering << "\n";
  return s.str();
}

json diagnostics_json(const std::vector<Diagnostic>& diagnostics) {
  json out = json::array();
  for (const auto& d : diagnostics) out.push_back({{"rule", d.rule}, {"element", d.element}, {"message", d.message}});
  return out;
}

std::string diagnostics_text(const std::vector<Diagnostic>& diagnostics) {
  std::ostringstream s;
  if (diagnostics.empty()) s << "model is valid\n";
  for (const auto& d : diagnostics) s << d.rule << " [" << d.element << "]: " << d.message << "\n";
  return s.str();
}

json synonymy_json(const CapabilityModel& model, const SynonymyIndex& index) {
  json products = json::array();
  for (const auto& block : synonymous_products(model)) products.push_back(block);
  json classes = json::object();
  for (const auto& pc : index.property_classes) classes[pc.class_id] = pc.members;
  json caps = json::object();
  for (const auto& [q, cs] : index.syn_caps)
    if (!cs.empty()) caps[q] = cs;
  json mutex = json::array();
  for (const auto& [a, b] : mutex_pairs(model, index)) mutex.push_back({a, b});
  return {{"synonymousProducts", products},
          {"propertyClasses", classes},
          {"synonymousCapabilities", caps},
          {"mutexPairs", mutex}};
}

std::string synonymy_text(const CapabilityModel& model, const SynonymyIndex& index) {
  std::ostringstream s;
  s << "synonymous products:\n";
  for (const auto& block : synonymous_products(model)) {
    s << " ";
    for (const auto& p : block) s << " " << p;
    s << "\n";
  }
  s << "property classes:\n";
  for (const auto& pc : index.property_classes) {
    s << "  " << pc.class_id << ":";
    for (const auto& m : pc.members) s << " " << m;
    s << "\n";
  }
  s << "synonymous capabilities:\n";
  for (const auto& [q, cs] : index.syn_caps) {
    if (cs.empty()) continue;
    s << "  " << q << ":";
    for (const auto& c : cs) s << " " << c;
    s << "\n";
  }
  s << "mutex pairs:\n";
  for (const auto& [a, b] : mutex_pairs(model, index)) s << "  " << a << " " << b << "\n";
  return s.str();
}

SolverConfig solver_config(const Options& o) {
  SolverConfig config;
  if (!o.solver_cmd.empty()) config.command = split_command(o.solver_cmd);
  if (config.command.empty()) throw UsageFailure("--solver-cmd is empty");
  config.timeout_seconds = o.timeout;
  config.random_seed = o.seed;
  config.produce_unsat_cores = !o.no_cores;
  if (!o.transcript.empty()) config.transcript_path = o.transcript;
  return config;
}

int cmd_plan(const Options& o, std::ostream& out) {
  CapabilityModel model = load_model(o);
  PlannerConfig config;
  config.solver = solver_config(o);
  config.encoder.expanded_synonyms = o.expanded;
  config.incremental = o.incremental;
  config.minimize_core = o.minimize_core;

  PlanResult result = plan(model, o.max_happenings, config);
  if (auto* found = std::get_if<PlanFound>(&result)) {
    json doc = {{"status", "plan"}, {"plan", plan_to_json(found->plan)}, {"outcomes", outcomes_to_json(found->outcomes)}};
    emit_document(o, render(o, doc, plan_text(found->plan)), out);
    return kOk;
  }
  const auto& none = std::get<NoPlanFound>(result);
  json doc = {{"status", "noPlan"}, {"anyUnknown", none.any_unknown}, {"outcomes", outcomes_to_json(none.outcomes)}};
  std::string text = "no plan within " + std::to_string(o.max_happenings + 1) + " happening(s)\n" +
                     outcomes_text(none.outcomes);
  if (none.cores_available && none.last_unsat_encoding) {
    Explanation e = explain(none, model);
    doc["explanation"] = explanation_to_json(e);
    text += explanation_text(e);
  }
  emit_document(o, render(o, doc, text), out);
  return kNoPlan;
}

int cmd_dump_smt(const Options& o, std::ostream& out) {
  if (o.bound < 0) throw UsageFailure("--bound must be non-negative");
  CapabilityModel model = load_model(o);
  SynonymyIndex index = build_synonymy(model);
  Encoding enc = build(model, index, o.bound, {o.expanded});
  EmitOptions options;
  options.produce_unsat_cores = !o.no_cores;
  options.random_seed = o.seed;
  emit_document(o, emit(enc, options), out);
  return kOk;
}

int cmd_validate(const Options& o, std::ostream& out) {
  CapabilityModel model = load_model(o);
  auto diagnostics = validate(model);
  json doc = {{"valid", diagnostics.empty()}, {"diagnostics", diagnostics_json(diagnostics)}};
  std::string text = diagnostics_text(diagnostics);
  if (o.explain_synonymy && diagnostics.empty()) {
    SynonymyIndex index = build_synonymy(model);
    doc["synonymy"] = synonymy_json(model, index);
    text += synonymy_text(model, index);
  }
  emit_document(o, render(o, doc, text), out);
  return diagnostics.empty() ? kOk : kInvalidModel;
}

int cmd_explain_synonymy(const Options& o, std::ostream& out) {
  CapabilityModel model = load_model(o);
  SynonymyIndex index = build_synonymy(model);
  emit_document(o, render(o, synonymy_json(model, index), synonymy_text(model, index)), out);
  return kOk;
}

int cmd_check(const Options& o, std::ostream& out) {
  CapabilityModel model = load_model(o);
  json doc = read_json(o.plan_path);
  Plan plan = plan_from_json(doc.contains("plan") ? doc.at("plan") : doc);
  SynonymyIndex index = build_synonymy(model);
  Verdict verdict = simulate(model, index, plan);

  json violations = json::array();
  std::ostringstream text;
  text << (verdict.ok() ? "plan is valid\n" : "plan is invalid\n");
  for (const auto& v : verdict.violations) {
    json j = {{"kind", std::string(to_string(v.kind))}, {"element", v.element}, {"message", v.message}};
    if (v.happening) j["happening"] = *v.happening;
    violations.push_back(std::move(j));
    text << "  " << to_string(v.kind) << " " << v.element;
    if (v.happening) text << " at happening " << *v.happening;
    text << ": " << v.message << "\n";
  }
  emit_document(o, render(o, {{"ok", verdict.ok()}, {"violations", violations}}, text.str()), out);
  return verdict.ok() ? kOk : kViolations;
}

void add_model_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--domain", o.domain, "Domain document (provided capabilities)");
  cmd->add_option("--problem", o.problem, "Problem document (required capability, actual values)");
  cmd->add_option("--model", o.model, "Single document holding domain and problem");
  cmd->add_option("--output", o.output, "Write the result here instead of stdout");
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "text"}));
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Capability planner: bounded SMT planning over capability models", "capplan"};
  app.require_subcommand(1);

  auto* plan_cmd = app.add_subcommand("plan", "Find a plan with the fewest happenings");
  add_model_options(plan_cmd, o);
  plan_cmd->add_option("--max-happenings", o.max_happenings, "Largest bound tried (bound k has k+1 happenings)")
      ->required()
      ->check(CLI::NonNegativeNumber);
  plan_cmd->add_option("--solver-cmd", o.solver_cmd, "SMT-LIB2 solver command reading stdin, e.g. \"z3 -in\"")
      ->required();
  plan_cmd->add_option("--timeout", o.timeout, "Per-bound solver timeout in seconds")->check(CLI::PositiveNumber);
  plan_cmd->add_option("--seed", o.seed, "Solver random seed");
  plan_cmd->add_option("--transcript", o.transcript, "Append solver input and output to this file");
  plan_cmd->add_flag("--expanded-synonyms", o.expanded, "One variable per property with explicit synonym equalities");
  plan_cmd->add_flag("--incremental", o.incremental, "Reuse one solver process across bounds");
  plan_cmd->add_flag("--minimize-core", o.minimize_core, "Deletion-based minimization of the unsat core");
  plan_cmd->add_flag("--no-cores", o.no_cores, "Do not request unsat cores");

  auto* dump_cmd = app.add_subcommand("dump-smt", "Print the SMT-LIB2 encoding for one bound");
  add_model_options(dump_cmd, o);
  dump_cmd->add_option("--bound", o.bound, "Bound k (k+1 happenings)")->check(CLI::NonNegativeNumber);
  dump_cmd->add_option("--seed", o.seed, "Solver random seed option to include");
  dump_cmd->add_flag("--expanded-synonyms", o.expanded, "One variable per property with explicit synonym equalities");
  dump_cmd->add_flag("--no-cores", o.no_cores, "Omit unsat core production");

  auto* validate_cmd = app.add_subcommand("validate", "Check model invariants");
  add_model_options(validate_cmd, o);
  validate_cmd->add_flag("--explain-synonymy", o.explain_synonymy, "Also print the synonymy analysis");

  auto* check_cmd = app.add_subcommand("check", "Replay a plan document against the model");
  add_model_options(check_cmd, o);
  check_cmd->add_option("--plan", o.plan_path, "Plan document as printed by 'plan'")->required();

  auto* syn_cmd = app.add_subcommand("explain-synonymy", "Print synonymous products, property classes and mutexes");
  add_model_options(syn_cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*plan_cmd) return cmd_plan(o, out);
    if (*dump_cmd) return cmd_dump_smt(o, out);
    if (*validate_cmd) return cmd_validate(o, out);
    if (*check_cmd) return cmd_check(o, out);
    return cmd_explain_synonymy(o, out);
  } catch (const UsageFailure& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoFailure& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIoError;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return kSolverError;
  } catch (const Error& e) {
    err << "invalid model: " << e.what() << "\n";
    return kInvalidModel;
  }
}

}  // namespace capplan::cli
