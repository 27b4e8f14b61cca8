#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "xkb/http_api.hpp"
#include "xkb/json_io.hpp"
#include "xkb/parser.hpp"
#include "xkb/postulates.hpp"
#include "xkb/revision.hpp"

using namespace xkb;

namespace {

constexpr int kOk = 0;
constexpr int kFindings = 1;
constexpr int kUsage = 2;

/// Bad invocation or unreadable input; maps to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw IoError("cannot write " + path);
}

/// ParseError from a named input file.
struct FileParseError : ParseError {
  FileParseError(std::string path, const ParseError& e)
      : ParseError(e.detail(), e.line(), e.column(), e.expected()), file(std::move(path)) {}
  std::string file;
};

Document load_document(const std::string& path) {
  auto text = read_file(path);
  try {
    return parse_document(text);
  } catch (const ParseError& e) {
    throw FileParseError(path, e);
  }
}

std::string position(const ParseError& e) {
  std::string where = std::to_string(e.line()) + ":" + std::to_string(e.column());
  if (auto* f = dynamic_cast<const FileParseError*>(&e)) return f->file + ":" + where;
  return where;
}

std::string join(const std::vector<std::string>& items, const char* sep = ", ") {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : sep) + s;
  return out.empty() ? "-" : out;
}

std::string fmt_ratio(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void print(const Json& j) { std::cout << j.dump(2) << '\n'; }

struct Inputs {
  std::string kb_path;
  std::string table_path;
  std::string scope = "full";
};

void add_inputs(CLI::App* cmd, Inputs& in, bool kb_required = true) {
  auto* kb = cmd->add_option("--kb", in.kb_path, "knowledge base (.xkb)");
  if (kb_required) kb->required();
  cmd->add_option("--table", in.table_path, "classifier table (CSV)");
  cmd->add_option("--scope", in.scope, "full or dataset")
      ->check(CLI::IsMember({"full", "dataset"}));
}

/// The CSV given with --table, else the table spelled out by the data rules
/// of the given documents.
std::shared_ptr<const ClassifierTable> resolve_table(const Inputs& in, const Schema& schema,
                                                     const std::vector<const Document*>& docs) {
  if (!in.table_path.empty())
    return std::make_shared<const ClassifierTable>(load_table(read_file(in.table_path), schema));
  std::vector<Rule> kd;
  for (const auto* d : docs)
    for (const auto& r : d->rules)
      if (r.origin == Origin::kData) kd.push_back(r);
  return std::make_shared<const ClassifierTable>(table_from_kd(schema, kd));
}

Scope resolve_scope(const Inputs& in, const Schema& schema,
                    const std::shared_ptr<const ClassifierTable>& table) {
  if (in.scope == "full") return Scope::full_universe(schema);
  if (table->empty())
    throw UsageError("dataset scope needs --table or data rules in the knowledge base");
  return Scope::dataset(table);
}

struct Loaded {
  ExplanationKB kb;
  std::shared_ptr<const ClassifierTable> table;
  Scope scope;
};

Loaded load(const Inputs& in) {
  auto doc = load_document(in.kb_path);
  auto kb = ExplanationKB::from_document(doc);
  auto table = resolve_table(in, kb.schema(), {&doc});
  return {kb, table, resolve_scope(in, kb.schema(), table)};
}

std::string describe(const Schema& schema, const ConflictWitness& w) {
  return w.rule_a + " <-> " + w.rule_b + " at " + render(schema, w.point);
}

// ---- validate ----

struct ValidateArgs {
  Inputs in;
};

int run_validate(const ValidateArgs& a, bool json) {
  Loaded l;
  try {
    l = load(a.in);
  } catch (const ParseError& e) {
    if (json) {
      print({{"ok", false},
             {"file", a.in.kb_path},
             {"error", e.detail()},
             {"line", e.line()},
             {"column", e.column()},
             {"expected", e.expected()}});
    } else {
      std::cout << position(e) << ": " << e.detail() << '\n';
      if (!e.expected().empty()) std::cout << "expected: " << join(e.expected()) << '\n';
    }
    return kFindings;
  } catch (const ValidationError& e) {
    if (json)
      print({{"ok", false}, {"error", e.what()}});
    else
      std::cout << e.what() << '\n';
    return kFindings;
  }
  auto report = validate(l.kb, *l.table, l.scope);
  if (json) {
    auto j = to_json(l.kb.schema(), report);
    j["rules"] = l.kb.size();
    print(j);
  } else {
    std::cout << "rules: " << l.kb.kd().size() << " data, " << l.kb.ke().size()
              << " explanation\n";
    if (report.ok()) std::cout << "ok\n";
    for (const auto& w : report.warnings) std::cout << "warning: " << w << '\n';
  }
  return report.ok() ? kOk : kFindings;
}

// ---- check ----

struct CheckArgs {
  Inputs in;
  bool consistency = false;
  bool coherence = false;
  bool completeness = false;
  std::string left;
  std::string right;
};

int run_check(CheckArgs a, bool json) {
  const bool enforce = !a.left.empty() || !a.right.empty();
  if (enforce && (a.left.empty() || a.right.empty()))
    throw UsageError("--enforce-left and --enforce-right go together");
  if (a.in.kb_path.empty() && (a.consistency || a.coherence || a.completeness || !enforce))
    throw UsageError("--kb is required");
  if (!a.consistency && !a.coherence && !a.completeness && !enforce) a.consistency = true;

  Json out = Json::object();
  bool findings = false;
  std::ostringstream text;

  if (!a.in.kb_path.empty()) {
    auto l = load(a.in);
    const auto& schema = l.kb.schema();
    if (a.consistency) {
      auto r = check_consistency(l.kb.rules(), l.scope);
      out["consistency"] = to_json(schema, r);
      findings |= !r.consistent;
      text << "consistency (" << l.scope.name() << "): "
           << (r.consistent ? "consistent" : "inconsistent") << ", " << r.edges.size()
           << " conflict edges\n";
      for (const auto& w : r.edges) text << "  " << describe(schema, w) << '\n';
      for (const auto& w : r.self_conflicts)
        text << "  " << w.rule_a << " conflicts with itself at " << render(schema, w.point)
             << '\n';
    }
    if (a.coherence) {
      if (l.table->empty()) throw UsageError("--coherence needs --table or data rules");
      Json tau = Json::object();
      text << "coherence:\n";
      for (const auto& r : l.kb.rules()) {
        auto v = tau_coherence(r, *l.table);
        tau[r.id] = to_json(v);
        findings |= !v.coherent();
        text << "  " << r.id << ": "
             << (v.vacuous ? "vacuous" : std::to_string(v.numerator) + "/" +
                                              std::to_string(v.denominator))
             << (v.coherent() ? "" : "  incoherent") << '\n';
      }
      out["coherence"] = tau;
    }
    if (a.completeness) {
      if (l.table->empty()) throw UsageError("--completeness needs --table or data rules");
      auto r = check_complete(l.kb.kd(), *l.table);
      out["completeness"] = to_json(schema, r);
      findings |= !r.complete;
      text << "completeness: " << (r.complete ? "complete" : "incomplete") << '\n';
      for (const auto& p : r.missing) text << "  missing " << render(schema, p) << '\n';
      for (const auto& id : r.extras) text << "  extra " << id << '\n';
    }
  }

  if (enforce) {
    auto left = load_document(a.left);
    auto right = load_document(a.right);
    if (!(left.schema == right.schema))
      throw UsageError("--enforce-left and --enforce-right use different schemas");
    auto table = resolve_table(a.in, left.schema, {&left, &right});
    auto scope = resolve_scope(a.in, left.schema, table);
    auto r = enforces(left.rules, right.rules, scope);
    out["enforcement"] = to_json(left.schema, r);
    findings |= !r.holds;
    text << "enforcement (" << scope.name() << "): " << (r.holds ? "holds" : "fails");
    if (!r.holds) {
      text << ", " << *r.rule_id << " not enforced";
      if (r.counterexample) text << " at " << render(left.schema, *r.counterexample);
    }
    text << '\n';
  }

  if (json)
    print(out);
  else
    std::cout << text.str();
  return findings ? kFindings : kOk;
}

// ---- revise / postulates ----

struct ReviseArgs {
  Inputs in;
  std::string scenario;
  std::string op;
  std::string feedback;
  std::string weakening;
  std::string selection;
  std::string incision;
  std::string kd_update;
  std::vector<std::string> protected_ids;
  std::string out_path;
  std::string paired;
};

void add_revision_options(CLI::App* cmd, ReviseArgs& a) {
  add_inputs(cmd, a.in);
  cmd->add_option("--feedback", a.feedback, "feedback rule text")->required();
  auto* sc = cmd->add_option("--scenario", a.scenario, "s1, s2 or s3")
                 ->check(CLI::IsMember({"s1", "s2", "s3"}));
  auto* op = cmd->add_option("--operator", a.op, "revision operator")
                 ->check(CLI::IsMember(operator_names()));
  sc->excludes(op);
  cmd->add_option("--weakening", a.weakening,
                  "body-restriction, head-expansion or reject-only");
  cmd->add_option("--selection", a.selection, "full-meet, max-cardinality or priority");
  cmd->add_option("--incision", a.incision, "exact or greedy");
  cmd->add_option("--kd-update", a.kd_update, "replace-instance or forbid");
  cmd->add_option("--protect", a.protected_ids, "protected rule ids")->delimiter(',');
}

template <class T>
T parse_enum(const std::string& text, std::optional<T> (*parse)(std::string_view),
             const char* what) {
  auto v = parse(text);
  if (!v) throw UsageError(std::string("unknown ") + what + " " + text);
  return *v;
}

Reviser make_operator(const ReviseArgs& a, const RevisionSettings& settings) {
  if (!a.op.empty()) return make_reviser(a.op, settings);
  ScenarioConfig config;
  config.scenario = parse_enum(a.scenario.empty() ? "s1" : a.scenario,
                               scenario_from_string, "scenario");
  if (!a.weakening.empty())
    config.weakening = parse_enum(a.weakening, weakening_from_string, "weakening");
  if (!a.selection.empty())
    config.selection.kind = parse_enum(a.selection, selection_from_string, "selection");
  if (!a.incision.empty())
    config.incision.kind = parse_enum(a.incision, incision_from_string, "incision");
  if (!a.kd_update.empty())
    config.kd_update = parse_enum(a.kd_update, kd_update_from_string, "kd-update");
  if (!a.protected_ids.empty()) config.protected_ids = a.protected_ids;
  return [config, settings](const ExplanationKB& kb, const Rule& r) {
    return scenario_revise(kb, r, config, settings);
  };
}

std::string operator_label(const ReviseArgs& a) {
  return a.op.empty() ? (a.scenario.empty() ? "s1" : a.scenario) : a.op;
}

int run_revise(const ReviseArgs& a, bool json) {
  auto l = load(a.in);
  RevisionSettings settings(l.scope, l.table);
  Rule r = parse_rule(l.kb.schema(), a.feedback);
  auto outcome = make_operator(a, settings)(l.kb, r);
  const auto before = render(l.kb.to_document());
  const auto after = render(outcome.kb_after.to_document());
  if (!a.out_path.empty()) write_file(a.out_path, after);

  if (json) {
    auto j = to_json(l.kb.schema(), outcome);
    j["operator"] = operator_label(a);
    j["unchanged"] = before == after;
    j["diff"] = revision_diff(l.kb, outcome);
    print(j);
    return kOk;
  }
  const auto& t = outcome.trace;
  auto diff = revision_diff(l.kb, outcome);
  std::cout << "operator: " << operator_label(a) << '\n'
            << "input: " << render(r) << '\n'
            << "outcome: " << (t.accepted ? "accepted" : "rejected") << '\n';
  if (t.effective_input && t.accepted && !same_rule(*t.effective_input, r))
    std::cout << "effective input: " << render(*t.effective_input) << '\n';
  std::cout << "kb: " << (before == after ? "unchanged" : "changed") << '\n';
  std::vector<std::string> removed, added;
  for (const auto& id : diff["removed"]) removed.push_back(id.get<std::string>());
  for (const auto& x : diff["added"]) added.push_back(x["id"].get<std::string>());
  std::cout << "removed: " << join(removed) << '\n' << "added: " << join(added) << '\n';
  for (const auto& w : t.weakened)
    std::cout << "weakened: " << render(w.before) << "  ->  " << render(w.after) << '\n';
  std::cout << "coverage shrink: " << fmt_ratio(t.coverage_shrink) << '\n'
            << "drift: " << fmt_ratio(outcome.metrics_after.drift) << '\n'
            << "conflict edges: " << outcome.metrics_after.conflict_edge_count << '\n';
  for (const auto& n : t.notes) std::cout << "note: " << n << '\n';
  if (a.out_path.empty() && before != after) std::cout << '\n' << after;
  return kOk;
}

int run_postulates(const ReviseArgs& a, bool json) {
  auto l = load(a.in);
  RevisionSettings settings(l.scope, l.table);
  const auto& schema = l.kb.schema();
  Rule r = parse_rule(schema, a.feedback);
  auto op = make_operator(a, settings);
  PostulateCase c{l.kb, r, op(l.kb, r), std::nullopt, std::nullopt};
  if (!a.paired.empty()) {
    c.paired = parse_rule(schema, a.paired);
    c.paired_outcome = op(l.kb, *c.paired);
  }
  auto report = check_postulates(c, l.scope, op);
  bool failed = false;
  for (const auto& [id, v] : report) failed |= v.fails();
  if (json) {
    print({{"operator", operator_label(a)},
           {"outcome", c.outcome.trace.accepted ? "accepted" : "rejected"},
           {"postulates", to_json(report)}});
  } else {
    std::cout << "operator: " << operator_label(a) << '\n';
    for (const auto& [id, v] : report) {
      const char* mark = v.holds() ? "holds" : v.fails() ? "FAILS" : "n/a";
      std::printf("  %-26s %-6s", std::string(to_string(id)).c_str(), mark);
      if (v.fails() && v.witness) std::printf("  %s", v.witness->c_str());
      std::printf("\n");
    }
  }
  return failed ? kFindings : kOk;
}

// ---- oracle ----

struct OracleArgs {
  Inputs in;
  std::string mode;
  std::string feedback;
  std::string paired;
  std::size_t max_rules = 12;
  std::size_t max_points = 729;
};

int run_oracle(const OracleArgs& a, bool json) {
  auto l = load(a.in);
  const auto& schema = l.kb.schema();
  auto mode = parse_enum(a.mode, oracle_mode_from_string, "oracle mode");
  std::optional<Rule> r, r2;
  if (!a.feedback.empty()) r = parse_rule(schema, a.feedback);
  if (!a.paired.empty()) r2 = parse_rule(schema, a.paired);
  if (mode != OracleMode::kDef3 && !r) throw UsageError("--feedback is required");
  if (mode == OracleMode::kUniformityAntecedent && !r2)
    throw UsageError("--paired is required for uniformity");
  auto rules = l.kb.rules();
  auto res = brute_oracle(mode, rules, r ? &*r : nullptr, r2 ? &*r2 : nullptr, l.scope,
                          OracleLimits{a.max_rules, a.max_points});
  if (json) {
    auto j = to_json(schema, res);
    j["mode"] = to_string(mode);
    print(j);
  } else if (mode == OracleMode::kRemainders || mode == OracleMode::kKernels) {
    std::cout << to_string(mode) << ": " << res.sets.size() << '\n';
    for (const auto& s : res.sets) std::cout << "  {" << join(s, ", ") << "}\n";
  } else {
    std::cout << to_string(mode) << ": " << (res.holds ? "holds" : "fails") << '\n';
    if (res.witness_point) std::cout << "  at " << render(schema, *res.witness_point) << '\n';
    if (!res.witness_rules.empty()) std::cout << "  rules " << join(res.witness_rules) << '\n';
  }
  return mode == OracleMode::kDef3 && !res.holds ? kFindings : kOk;
}

// ---- matrix ----

struct MatrixArgs {
  std::size_t trials = 500;
  std::uint64_t seed = 1;
  std::string scope = "full";
  std::vector<std::string> operators;
  bool consistent_only = false;
  std::string out_path;
};

int run_matrix(const MatrixArgs& a, bool json) {
  GeneratorConfig config;
  config.trials = a.trials;
  config.seed = a.seed;
  config.dataset_scope = a.scope == "dataset";
  config.consistent_inputs_only = a.consistent_only;
  auto ops = a.operators.empty() ? operator_names() : a.operators;
  auto m = conformance_matrix(ops, config);
  auto text = json ? matrix_to_json(m) : render_matrix(m);
  if (!a.out_path.empty())
    write_file(a.out_path, text);
  else
    std::cout << text << (text.ends_with('\n') ? "" : "\n");
  return kOk;
}

// ---- serve ----

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string store;
};

int run_serve(const ServeArgs& a) {
  auto root = a.store.empty() ? SessionStore::root_from_env()
                              : std::optional<std::filesystem::path>(a.store);
  SessionStore store(root);
  store.load();
  HttpServer server(store);
  int port = server.bind(a.host, a.port);
  std::cout << "listening on http://" << a.host << ":" << port;
  if (root) std::cout << " (store " << root->string() << ", "
                      << store.ids().size() << " sessions)";
  std::cout << std::endl;
  server.listen();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explanation knowledge bases: checks, revision and postulates"};
  app.require_subcommand(1);
  bool json = false;
  auto add_json = [&](CLI::App* cmd) { cmd->add_flag("--json", json, "JSON output"); };

  ValidateArgs va;
  auto* validate_cmd = app.add_subcommand("validate", "parse and validate a knowledge base");
  add_inputs(validate_cmd, va.in);
  add_json(validate_cmd);

  CheckArgs ca;
  auto* check_cmd = app.add_subcommand("check", "consistency, coherence, completeness, enforcement");
  add_inputs(check_cmd, ca.in, false);
  check_cmd->add_flag("--consistency", ca.consistency);
  check_cmd->add_flag("--coherence", ca.coherence);
  check_cmd->add_flag("--completeness", ca.completeness);
  check_cmd->add_option("--enforce-left", ca.left, "enforcing rule set (.xkb)");
  check_cmd->add_option("--enforce-right", ca.right, "enforced rule set (.xkb)");
  add_json(check_cmd);

  ReviseArgs ra;
  auto* revise_cmd = app.add_subcommand("revise", "revise a knowledge base by a feedback rule");
  add_revision_options(revise_cmd, ra);
  revise_cmd->add_option("--out", ra.out_path, "write the revised knowledge base here");
  add_json(revise_cmd);

  ReviseArgs pa;
  auto* post_cmd = app.add_subcommand("postulates", "check postulates for one revision");
  add_revision_options(post_cmd, pa);
  post_cmd->add_option("--paired", pa.paired, "second input for uniformity");
  add_json(post_cmd);

  OracleArgs oa;
  auto* oracle_cmd = app.add_subcommand("oracle", "brute-force remainders, kernels, consistency, uniformity");
  add_inputs(oracle_cmd, oa.in);
  oracle_cmd->add_option("--mode", oa.mode, "remainders, kernels, def3 or uniformity")
      ->required();
  oracle_cmd->add_option("--feedback", oa.feedback, "input rule");
  oracle_cmd->add_option("--paired", oa.paired, "second input rule (uniformity)");
  oracle_cmd->add_option("--max-rules", oa.max_rules);
  oracle_cmd->add_option("--max-points", oa.max_points);
  add_json(oracle_cmd);

  MatrixArgs ma;
  auto* matrix_cmd = app.add_subcommand("matrix", "operator x postulate conformance matrix");
  matrix_cmd->add_option("--trials", ma.trials);
  matrix_cmd->add_option("--seed", ma.seed);
  matrix_cmd->add_option("--scope", ma.scope)->check(CLI::IsMember({"full", "dataset"}));
  matrix_cmd->add_option("--operators", ma.operators)->delimiter(',');
  matrix_cmd->add_flag("--consistent-only", ma.consistent_only,
                       "only inputs consistent with K");
  matrix_cmd->add_option("--out", ma.out_path);
  add_json(matrix_cmd);

  ServeArgs sa;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP session service");
  serve_cmd->add_option("--port", sa.port);
  serve_cmd->add_option("--host", sa.host);
  serve_cmd->add_option("--store", sa.store, "session directory (default $XKB_STORE)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate_cmd) return run_validate(va, json);
    if (*check_cmd) return run_check(ca, json);
    if (*revise_cmd) return run_revise(ra, json);
    if (*post_cmd) return run_postulates(pa, json);
    if (*oracle_cmd) return run_oracle(oa, json);
    if (*matrix_cmd) return run_matrix(ma, json);
    if (*serve_cmd) return run_serve(sa);
  } catch (const ParseError& e) {
    std::cerr << position(e) << ": error: " << e.detail() << '\n';
    if (!e.expected().empty()) std::cerr << "expected: " << join(e.expected()) << '\n';
  } catch (const LimitError& e) {
    std::cerr << "limit: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kUsage;
}
