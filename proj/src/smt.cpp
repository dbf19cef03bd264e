#include "capplan/smt.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "capplan/error.hpp"
#include "capplan/subprocess.hpp"

namespace capplan {

namespace {

void append_transcript(const std::optional<std::string>& path, std::string_view tag, std::string_view text) {
  if (!path) return;
  std::ofstream out(*path, std::ios::app);
  if (!out) throw std::runtime_error("cannot open transcript file '" + *path + "'");
  out << ";;; " << tag << "\n" << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

std::string bar_quoted(std::string_view name) { return "|" + std::string(name) + "|"; }

std::string header(Logic logic, bool cores, const std::optional<long>& seed) {
  std::string out = "(set-option :produce-models true)\n";
  if (cores) out += "(set-option :produce-unsat-cores true)\n";
  if (seed) out += "(set-option :random-seed " + std::to_string(*seed) + ")\n";
  out += "(set-logic " + std::string(logic_name(logic)) + ")\n";
  return out;
}

std::string declaration(const VariableKey& key, Sort sort) {
  return "(declare-const " + bar_quoted(symbol(key)) + " " + std::string(sort_name(sort)) + ")\n";
}

std::string assertion_command(const Assertion& a) {
  return "(assert (! " + to_smtlib(a.term) + " :named " + bar_quoted(a.name) + "))\n";
}

// Incremental S-expression reader. Returns std::nullopt when `text` holds no
// complete expression yet; `pos` advances past what was consumed.
class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  std::optional<SExpr> next() {
    std::size_t save = pos_;
    skip_space();
    if (pos_ >= text_.size()) {
      pos_ = save;
      return std::nullopt;
    }
    auto e = parse();
    if (!e) pos_ = save;
    return e;
  }

  std::size_t position() const { return pos_; }
  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

 private:
  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::optional<SExpr> parse() {
    skip_space();
    if (pos_ >= text_.size()) return std::nullopt;
    char c = text_[pos_];
    if (c == ')') throw SolverProtocolError("unbalanced ')' in solver output");
    if (c == '(') {
      ++pos_;
      SExpr list{SExpr::Kind::List, {}, {}};
      for (;;) {
        skip_space();
        if (pos_ >= text_.size()) return std::nullopt;
        if (text_[pos_] == ')') {
          ++pos_;
          return list;
        }
        auto item = parse();
        if (!item) return std::nullopt;
        list.items.push_back(std::move(*item));
      }
    }
    if (c == '|') {
      auto end = text_.find('|', pos_ + 1);
      if (end == std::string_view::npos) return std::nullopt;
      SExpr atom{SExpr::Kind::Atom, std::string(text_.substr(pos_ + 1, end - pos_ - 1)), {}};
      pos_ = end + 1;
      return atom;
    }
    if (c == '"') {
      std::string s;
      std::size_t i = pos_ + 1;
      for (;;) {
        if (i >= text_.size()) return std::nullopt;
        if (text_[i] == '"') {
          if (i + 1 < text_.size() && text_[i + 1] == '"') {
            s += '"';
            i += 2;
            continue;
          }
          if (i + 1 >= text_.size()) return std::nullopt;  // may be the start of ""
          break;
        }
        s += text_[i++];
      }
      pos_ = i + 1;
      return SExpr{SExpr::Kind::String, std::move(s), {}};
    }
    std::size_t start = pos_;
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';') break;
      ++pos_;
    }
    // An atom running into end of input may be cut short.
    if (pos_ >= text_.size()) {
      pos_ = start;
      return std::nullopt;
    }
    return SExpr{SExpr::Kind::Atom, std::string(text_.substr(start, pos_ - start)), {}};
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

struct SessionTimeout {};

bool is_error(const SExpr& e) { return e.is_list() && !e.items.empty() && e.items[0].is_atom("error"); }

std::string error_text(const SExpr& e) {
  return e.items.size() > 1 ? e.items[1].text : std::string("unspecified solver error");
}

std::map<std::string, Value> parse_model(const SExpr& model) {
  std::map<std::string, Value> out;
  for (const auto& def : model.items) {
    if (!def.is_list() || def.items.size() != 5 || !def.items[0].is_atom("define-fun")) continue;
    if (!def.items[2].is_list() || !def.items[2].items.empty()) continue;  // functions with arguments
    if (auto v = parse_model_value(def.items[4])) out.emplace(def.items[1].text, std::move(*v));
  }
  return out;
}

bool looks_like_model(const SExpr& e) {
  if (!e.is_list() || is_error(e)) return false;
  if (!e.items.empty() && e.items[0].is_atom("model")) return true;
  for (const auto& item : e.items)
    if (!item.is_list() || item.items.empty() || !item.items[0].is_atom("define-fun")) return false;
  return true;
}

bool looks_like_core(const SExpr& e) {
  if (!e.is_list() || is_error(e)) return false;
  for (const auto& item : e.items)
    if (item.kind != SExpr::Kind::Atom) return false;
  return true;
}

}  // namespace

std::vector<std::string> split_command(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool in_token = false;
  char quote = 0;
  for (char c : line) {
    if (quote) {
      if (c == quote) quote = 0;
      else cur += c;
      continue;
    }
    if (c == '\'' || c == '"') {
      quote = c;
      in_token = true;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (in_token) out.push_back(std::move(cur));
      cur.clear();
      in_token = false;
    } else {
      cur += c;
      in_token = true;
    }
  }
  if (quote) throw std::invalid_argument("unterminated quote in command line");
  if (in_token) out.push_back(std::move(cur));
  return out;
}

std::string_view logic_name(Logic logic) { return logic == Logic::LinearReal ? "QF_LRA" : "QF_NRA"; }

std::string emit(const Encoding& encoding, const EmitOptions& options) {
  std::string out = header(encoding.logic, options.produce_unsat_cores, options.random_seed);
  for (const auto& [key, sort] : encoding.variables) out += declaration(key, sort);
  bool any_assertion = false;
  for (const auto& a : encoding.assertions) {
    if (options.only && !options.only->contains(a.name)) continue;
    out += assertion_command(a);
    any_assertion = true;
  }
  out += "(check-sat)\n";
  if (!encoding.variables.empty()) out += "(get-model)\n";
  if (options.produce_unsat_cores && any_assertion) out += "(get-unsat-core)\n";
  return out;
}

std::vector<SExpr> parse_sexprs(std::string_view text) {
  // Solvers end their output with a newline; a trailing atom without one is complete.
  std::string padded(text);
  padded += '\n';
  Reader r(padded);
  std::vector<SExpr> out;
  while (!r.at_end()) {
    auto e = r.next();
    if (!e) throw SolverProtocolError("truncated S-expression in solver output");
    out.push_back(std::move(*e));
  }
  return out;
}

std::optional<Value> parse_model_value(const SExpr& e) {
  if (e.kind == SExpr::Kind::Atom) {
    if (e.text == "true") return true;
    if (e.text == "false") return false;
    if (e.text.empty() || !(std::isdigit(static_cast<unsigned char>(e.text[0])) || e.text[0] == '.')) return std::nullopt;
    try {
      return parse_rational(e.text);
    } catch (const std::invalid_argument&) {
      return std::nullopt;
    }
  }
  if (!e.is_list() || e.items.empty()) return std::nullopt;
  const SExpr& head = e.items[0];
  if (head.is_atom("-") && e.items.size() == 2) {
    auto v = parse_model_value(e.items[1]);
    if (!v || !is_real(*v)) return std::nullopt;
    return Rational(-std::get<Rational>(*v));
  }
  if (head.is_atom("/") && e.items.size() == 3) {
    auto a = parse_model_value(e.items[1]);
    auto b = parse_model_value(e.items[2]);
    if (!a || !b || !is_real(*a) || !is_real(*b) || std::get<Rational>(*b) == 0) return std::nullopt;
    return Rational(std::get<Rational>(*a) / std::get<Rational>(*b));
  }
  return std::nullopt;
}

SolveOutcome parse_solver_output(std::string_view output) {
  std::vector<SExpr> answers = parse_sexprs(output);
  std::size_t i = 0;
  while (i < answers.size() && answers[i].is_atom("success")) ++i;
  if (i == answers.size()) throw SolverProtocolError("solver produced no answer");
  const SExpr& status = answers[i];
  if (is_error(status)) throw SolverProtocolError("solver error: " + error_text(status));
  if (status.kind != SExpr::Kind::Atom) throw SolverProtocolError("unexpected solver answer");

  if (status.text == "sat") {
    Sat sat;
    for (std::size_t j = i + 1; j < answers.size(); ++j)
      if (looks_like_model(answers[j])) {
        sat.valuation = parse_model(answers[j]);
        break;
      }
    return sat;
  }
  if (status.text == "unsat") {
    Unsat unsat;
    for (std::size_t j = i + 1; j < answers.size(); ++j)
      if (looks_like_core(answers[j])) {
        for (const auto& name : answers[j].items) unsat.core.push_back(name.text);
        unsat.core_available = true;
        break;
      }
    return unsat;
  }
  if (status.text == "unknown" || status.text == "timeout") return Unknown{status.text};
  throw SolverProtocolError("unexpected solver answer '" + status.text + "'");
}

SolveOutcome solve(const std::string& script, const SolverConfig& config) {
  if (config.timeout_seconds <= 0) throw std::invalid_argument("solver timeout must be positive");
  Subprocess child(config.command);
  auto deadline = Subprocess::Clock::now() + std::chrono::duration_cast<Subprocess::Clock::duration>(
                                                  std::chrono::duration<double>(config.timeout_seconds));
  append_transcript(config.transcript_path, "query", script);
  bool finished = child.communicate(script, deadline);
  if (!finished) {
    child.kill();
    child.wait();
    append_transcript(config.transcript_path, "response (timeout)", child.out());
    return Unknown{"timeout after " + std::to_string(config.timeout_seconds) + " s"};
  }
  child.wait();
  append_transcript(config.transcript_path, "response", child.out());
  if (child.out().find_first_not_of(" \t\r\n") == std::string::npos)
    throw SolverProtocolError("solver produced no output" +
                              (child.err().empty() ? std::string() : ": " + child.err()));
  return parse_solver_output(child.out());
}

std::vector<std::string> minimize_core(const Encoding& encoding, std::vector<std::string> core,
                                       const SolverConfig& config) {
  std::size_t i = 0;
  while (i < core.size()) {
    std::set<std::string> keep(core.begin(), core.end());
    keep.erase(core[i]);
    EmitOptions options;
    options.produce_unsat_cores = false;
    options.random_seed = config.random_seed;
    options.only = &keep;
    SolveOutcome outcome = solve(emit(encoding, options), config);
    if (std::holds_alternative<Unsat>(outcome)) core.erase(core.begin() + static_cast<std::ptrdiff_t>(i));
    else ++i;
  }
  return core;
}

SolverSession::SolverSession(const SolverConfig& config, Logic logic)
    : config_(config), process_(std::make_unique<Subprocess>(config.command)) {
  send(header(logic, config.produce_unsat_cores, config.random_seed));
}

SolverSession::~SolverSession() {
  if (process_) {
    process_->close_stdin();
    process_->kill();
  }
}

void SolverSession::send(const std::string& commands) {
  append_transcript(config_.transcript_path, "send", commands);
  auto deadline = Subprocess::Clock::now() + std::chrono::duration_cast<Subprocess::Clock::duration>(
                                                  std::chrono::duration<double>(config_.timeout_seconds));
  if (!process_->write(commands, deadline)) throw SolverProtocolError("solver stopped accepting input");
}

SExpr SolverSession::read_response() {
  auto deadline = Subprocess::Clock::now() + std::chrono::duration_cast<Subprocess::Clock::duration>(
                                                  std::chrono::duration<double>(config_.timeout_seconds));
  for (;;) {
    std::string& buf = process_->out();
    if (!buf.empty()) {
      Reader r(buf);
      // A bare atom is only complete once followed by whitespace.
      if (auto e = r.next()) {
        append_transcript(config_.transcript_path, "receive", buf.substr(0, r.position()));
        buf.erase(0, r.position());
        return *e;
      }
    }
    if (!process_->read_some(deadline)) {
      if (process_->stdout_closed()) throw SolverProtocolError("solver exited: " + process_->err());
      throw SessionTimeout{};
    }
  }
}

SolveOutcome SolverSession::check(const Encoding& encoding) {
  if (!process_) return Unknown{"solver session aborted after an earlier timeout"};
  try {
    std::string commands;
    for (const auto& [key, sort] : encoding.variables)
      if (declared_.insert(symbol(key)).second) commands += declaration(key, sort);
    for (const auto& a : encoding.assertions)
      if (!is_goal_family(a) && asserted_.insert(a.name).second) commands += assertion_command(a);
    commands += "(push 1)\n";
    for (const auto& a : encoding.assertions)
      if (is_goal_family(a)) commands += assertion_command(a);
    commands += "(check-sat)\n";
    send(commands);

    SExpr status = read_response();
    if (is_error(status)) throw SolverProtocolError("solver error: " + error_text(status));
    SolveOutcome outcome;
    if (status.is_atom("sat")) {
      send("(get-model)\n");
      SExpr model = read_response();
      if (is_error(model)) throw SolverProtocolError("solver error: " + error_text(model));
      outcome = Sat{parse_model(model)};
    } else if (status.is_atom("unsat")) {
      Unsat unsat;
      if (config_.produce_unsat_cores) {
        send("(get-unsat-core)\n");
        SExpr core = read_response();
        if (looks_like_core(core)) {
          for (const auto& n : core.items) unsat.core.push_back(n.text);
          unsat.core_available = true;
        }
      }
      outcome = unsat;
    } else if (status.kind == SExpr::Kind::Atom) {
      outcome = Unknown{status.text};
    } else {
      throw SolverProtocolError("unexpected solver answer");
    }
    send("(pop 1)\n");
    return outcome;
  } catch (const SessionTimeout&) {
    process_.reset();
    return Unknown{"timeout after " + std::to_string(config_.timeout_seconds) + " s"};
  }
}

}  // namespace capplan
