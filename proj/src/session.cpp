#include "xkb/session.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include "xkb/parser.hpp"

namespace xkb {

namespace {

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  auto t = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

bool has_schema_block(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    } else if (text[i] == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
    } else {
      return text.substr(i).starts_with("schema");
    }
  }
  return false;
}

Scope make_scope(const std::string& name, const Schema& schema,
                 const std::shared_ptr<const ClassifierTable>& table) {
  if (name == "full") return Scope::full_universe(schema);
  if (name == "dataset") {
    if (table->empty())
      throw ValidationError("dataset scope needs a table or data rules");
    return Scope::dataset(table);
  }
  throw ValidationError("scope must be \"full\" or \"dataset\"");
}

ExplanationKB kb_from_text(const std::string& text) {
  return ExplanationKB::from_document(parse_document(text));
}

std::string kb_text(const ExplanationKB& kb) { return render(kb.to_document()); }

std::string describe(const ConflictWitness& w, const Schema& schema) {
  return w.rule_a + " <-> " + w.rule_b + " at " + render(schema, w.point);
}

template <class T>
T option(const Json& options, const char* key,
         std::optional<T> (*parse)(std::string_view)) {
  const auto& v = options.at(key);
  if (!v.is_string())
    throw ValidationError(std::string("option ") + key + " must be a string");
  auto parsed = parse(v.get<std::string>());
  if (!parsed)
    throw ValidationError(std::string("unknown ") + key + " " + v.get<std::string>());
  return *parsed;
}

std::vector<std::string> string_list(const Json& v, const char* key) {
  if (!v.is_array())
    throw ValidationError(std::string("option ") + key + " must be a list of ids");
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string())
      throw ValidationError(std::string("option ") + key + " must be a list of ids");
    out.push_back(s.get<std::string>());
  }
  return out;
}

Scenario parse_scenario(std::string text) {
  for (auto& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  auto s = scenario_from_string(text);
  if (!s) throw ValidationError("scenario must be s1, s2 or s3");
  return *s;
}

}  // namespace

Json to_json(const HistoryEntry& e) {
  return {{"timestamp", e.timestamp},
          {"feedback", e.feedback},
          {"scenario", e.scenario},
          {"options", e.options},
          {"proposal_id", e.proposal_id},
          {"outcome_id", e.outcome_id},
          {"accepted", e.accepted},
          {"version", e.version},
          {"metrics_after", e.metrics_after}};
}

HistoryEntry history_entry_from_json(const Json& j) {
  HistoryEntry e;
  e.timestamp = j.at("timestamp").get<std::string>();
  e.feedback = j.at("feedback").get<std::string>();
  e.scenario = j.at("scenario").get<std::string>();
  e.options = j.at("options");
  e.proposal_id = j.at("proposal_id").get<std::string>();
  e.outcome_id = j.at("outcome_id").get<std::string>();
  e.accepted = j.at("accepted").get<bool>();
  e.version = j.at("version").get<std::size_t>();
  e.metrics_after = j.at("metrics_after");
  return e;
}

std::vector<Candidate> propose_candidates(const ExplanationKB& kb, const Rule& input,
                                          Scenario scenario, const Json& options,
                                          const RevisionSettings& base_settings) {
  if (!options.is_object()) throw ValidationError("options must be an object");
  RevisionSettings settings = base_settings;
  ScenarioConfig config;
  config.scenario = scenario;
  for (const auto& [key, value] : options.items()) {
    if (key == "weakening") {
      config.weakening = option(options, "weakening", weakening_from_string);
    } else if (key == "selection") {
      config.selection.kind = option(options, "selection", selection_from_string);
    } else if (key == "incision") {
      config.incision.kind = option(options, "incision", incision_from_string);
    } else if (key == "kd_update") {
      config.kd_update = option(options, "kd_update", kd_update_from_string);
    } else if (key == "protected_ids") {
      config.protected_ids = string_list(value, "protected_ids");
    } else if (key == "ranking") {
      settings.ranking = string_list(value, "ranking");
    } else {
      throw ValidationError("unknown option " + key);
    }
  }

  std::vector<ScenarioConfig> configs;
  if (scenario == Scenario::kS1 || config.weakening) {
    configs.push_back(config);
  } else {
    for (auto w : {WeakeningStrategy::kBodyRestriction, WeakeningStrategy::kHeadExpansion,
                   WeakeningStrategy::kRejectOnly}) {
      configs.push_back(config);
      configs.back().weakening = w;
    }
  }

  std::vector<Candidate> out;
  std::vector<std::string> seen;
  for (const auto& c : configs) {
    auto outcome = scenario_revise(kb, input, c, settings);
    auto text = kb_text(outcome.kb_after);
    if (std::find(seen.begin(), seen.end(), text) != seen.end()) continue;
    seen.push_back(text);

    Reviser replay = [c, settings](const ExplanationKB& k, const Rule& r) {
      return scenario_revise(k, r, c, settings);
    };
    PostulateCase pc{kb, input, outcome, std::nullopt, std::nullopt};
    Candidate cand;
    cand.outcome_id = std::string(
        to_string(c.weakening.value_or(WeakeningStrategy::kBodyRestriction)));
    cand.config = c;
    cand.postulates = check_postulates(pc, settings.scope, replay);
    cand.diff = revision_diff(kb, outcome);
    cand.outcome = std::move(outcome);
    out.push_back(std::move(cand));
  }
  return out;
}

// ---- Session ----

std::shared_ptr<Session> Session::create(std::string id, const SessionSpec& spec) {
  std::string text = spec.kb_text;
  if (spec.schema && !has_schema_block(text)) text = render(*spec.schema) + "\n" + text;
  auto doc = parse_document(text);
  if (spec.schema && !(doc.schema == *spec.schema))
    throw ValidationError("schema does not match the schema of kb_text");
  auto kb = ExplanationKB::from_document(doc);
  const Schema schema = kb.schema();

  ClassifierTable table;
  if (spec.table_csv)
    table = load_table(*spec.table_csv, schema);
  else if (!kb.kd().empty())
    table = table_from_kd(schema, kb.kd());
  else
    table = ClassifierTable(schema, {});
  if (kb.kd().empty() && !table.empty())
    kb = ExplanationKB(schema, derive_kd(table), kb.ke());

  auto table_ptr = std::make_shared<const ClassifierTable>(table);
  auto scope = make_scope(spec.scope, schema, table_ptr);
  auto report = check_consistency(kb.rules(), scope);
  if (!report.consistent) {
    const auto& w = report.edges.empty() ? report.self_conflicts.front()
                                         : report.edges.front();
    throw RequestError(422, "knowledge base is inconsistent in " + spec.scope +
                                " scope: " + describe(w, schema));
  }

  SessionSnapshot snap;
  snap.id = std::move(id);
  snap.schema = schema;
  snap.table_csv = table_to_csv(table);
  snap.original_kb_text = kb_text(kb);
  snap.current_kb_text = snap.original_kb_text;
  snap.scope = spec.scope;
  snap.version = 0;
  std::shared_ptr<Session> s(new Session());
  s->init(std::move(snap));
  return s;
}

std::shared_ptr<Session> Session::restore(const SessionSnapshot& snapshot,
                                          std::vector<HistoryEntry> history) {
  if (history.size() != snapshot.version)
    throw IoError("session " + snapshot.id + ": snapshot version " +
                  std::to_string(snapshot.version) + " but " +
                  std::to_string(history.size()) + " history entries");
  std::shared_ptr<Session> s(new Session());
  s->init(snapshot);
  s->history_ = std::move(history);
  return s;
}

void Session::init(SessionSnapshot snapshot) {
  snapshot_ = std::move(snapshot);
  id_ = snapshot_.id;
  table_ = std::make_shared<const ClassifierTable>(
      load_table(snapshot_.table_csv, snapshot_.schema));
  scope_ = make_scope(snapshot_.scope, snapshot_.schema, table_);
  original_kb_ = kb_from_text(snapshot_.original_kb_text);
  current_kb_ = kb_from_text(snapshot_.current_kb_text);
  if (!(original_kb_.schema() == snapshot_.schema) ||
      !(current_kb_.schema() == snapshot_.schema))
    throw ValidationError("session " + snapshot_.id + ": schema mismatch");
}

RevisionSettings Session::settings() const { return RevisionSettings(scope_, table_); }

Json Session::state_locked() const {
  return {{"session_id", snapshot_.id},
          {"version", snapshot_.version},
          {"scope", snapshot_.scope},
          {"schema", Json::parse(schema_to_json(snapshot_.schema))},
          {"table_rows", table_->size()},
          {"kb", to_json(current_kb_)},
          {"consistency",
           to_json(snapshot_.schema, check_consistency(current_kb_.rules(), scope_))},
          {"metrics", to_json(metrics(current_kb_, *table_, scope_))},
          {"history_length", history_.size()}};
}

Json Session::state() const {
  std::shared_lock lock(mutex_);
  return state_locked();
}

Json Session::validate_rule(const std::string& text) const {
  std::shared_lock lock(mutex_);
  const Schema& schema = snapshot_.schema;
  Rule r = parse_rule(schema, text);
  Json conflicts = Json::array();
  Json conflict_ids = Json::array();
  for (const auto& k : current_kb_.rules()) {
    if (auto w = conflict(r, k, scope_)) {
      conflicts.push_back(to_json(schema, *w));
      conflict_ids.push_back(k.id);
    }
  }
  Json out = {{"ok", true},
              {"rule", to_json(r)},
              {"instance", is_instance_rule(schema, r)},
              {"self_conflicting", conflict(r, r, scope_).has_value()},
              {"extent", coverage(r.body, scope_)},
              {"conflicts_with", conflict_ids},
              {"conflicts", conflicts}};
  if (!table_->empty()) out["dataset_extent"] = coverage(r.body, Scope::dataset(table_));
  return out;
}

Json Session::propose(const std::string& text, const std::string& scenario_name,
                      const Json& options) {
  auto scenario = parse_scenario(scenario_name);
  std::unique_lock lock(mutex_);
  Rule input = parse_rule(snapshot_.schema, text);
  Proposal p;
  p.id = "p" + std::to_string(next_proposal_++);
  p.text = text;
  p.input = input;
  p.scenario = scenario;
  p.options = options.is_null() ? Json::object() : options;
  p.base_version = snapshot_.version;
  p.candidates = propose_candidates(current_kb_, input, scenario, p.options, settings());

  Json cands = Json::array();
  for (const auto& c : p.candidates) {
    cands.push_back({{"outcome_id", c.outcome_id},
                     {"accepted", c.outcome.trace.accepted},
                     {"outcome", c.outcome.trace.accepted ? "accepted" : "rejected"},
                     {"unchanged", kb_text(c.outcome.kb_after) == snapshot_.current_kb_text},
                     {"coverage_shrink", c.outcome.trace.coverage_shrink},
                     {"diff", c.diff},
                     {"metrics", to_json(c.outcome.metrics_after)},
                     {"postulates", to_json(c.postulates)},
                     {"trace", to_json(c.outcome.trace)},
                     {"kb_text", kb_text(c.outcome.kb_after)}});
  }
  Json out = {{"proposal_id", p.id},
              {"input", to_json(input)},
              {"scenario", to_string(scenario)},
              {"base_version", p.base_version},
              {"candidates", cands}};
  proposals_.emplace(p.id, std::move(p));
  return out;
}

std::pair<Json, HistoryEntry> Session::commit(const std::string& proposal_id,
                                              const std::string& outcome_id,
                                              const CommitHook& persist) {
  std::unique_lock lock(mutex_);
  auto it = proposals_.find(proposal_id);
  if (it == proposals_.end()) throw RequestError(404, "unknown proposal " + proposal_id);
  Proposal& p = it->second;
  if (p.committed) throw RequestError(409, "proposal " + proposal_id + " already committed");
  if (p.base_version != snapshot_.version)
    throw RequestError(409, "proposal " + proposal_id + " is stale: knowledge base changed");
  auto c = std::find_if(p.candidates.begin(), p.candidates.end(),
                        [&](const Candidate& c) { return c.outcome_id == outcome_id; });
  if (c == p.candidates.end())
    throw RequestError(404, "unknown outcome " + outcome_id + " in proposal " + proposal_id);

  const auto& kb_after = c->outcome.kb_after;
  auto report = check_consistency(kb_after.rules(), scope_);
  if (!report.consistent)
    throw RequestError(422, "candidate " + outcome_id + " leaves the knowledge base inconsistent");

  SessionSnapshot next = snapshot_;
  next.current_kb_text = kb_text(kb_after);
  next.version = snapshot_.version + 1;

  HistoryEntry e;
  e.timestamp = utc_timestamp();
  e.feedback = p.text;
  e.scenario = std::string(to_string(p.scenario));
  e.options = p.options;
  e.proposal_id = p.id;
  e.outcome_id = outcome_id;
  e.accepted = c->outcome.trace.accepted;
  e.version = next.version;
  e.metrics_after = to_json(c->outcome.metrics_after);

  if (persist) persist(next, e);
  snapshot_ = std::move(next);
  current_kb_ = kb_from_text(snapshot_.current_kb_text);
  history_.push_back(e);
  p.committed = true;
  return {state_locked(), e};
}

Json Session::history() const {
  std::shared_lock lock(mutex_);
  Json entries = Json::array();
  Json drift = Json::array();
  drift.push_back(metrics(original_kb_, *table_, scope_).drift);
  for (const auto& e : history_) {
    entries.push_back(to_json(e));
    drift.push_back(e.metrics_after.at("drift"));
  }
  return {{"session_id", snapshot_.id},
          {"length", history_.size()},
          {"entries", entries},
          {"drift_series", drift}};
}

SessionSnapshot Session::snapshot() const {
  std::shared_lock lock(mutex_);
  return snapshot_;
}

std::vector<HistoryEntry> Session::history_entries() const {
  std::shared_lock lock(mutex_);
  return history_;
}

std::string Session::current_kb_text() const {
  std::shared_lock lock(mutex_);
  return snapshot_.current_kb_text;
}

KBMetrics Session::current_metrics() const {
  std::shared_lock lock(mutex_);
  return metrics(current_kb_, *table_, scope_);
}

std::vector<Json> replay_history(const SessionSnapshot& snapshot,
                                 const std::vector<HistoryEntry>& history) {
  auto table = std::make_shared<const ClassifierTable>(
      load_table(snapshot.table_csv, snapshot.schema));
  auto scope = make_scope(snapshot.scope, snapshot.schema, table);
  RevisionSettings settings(scope, table);
  auto kb = kb_from_text(snapshot.original_kb_text);
  std::vector<Json> out;
  for (const auto& e : history) {
    Rule input = parse_rule(snapshot.schema, e.feedback);
    auto cands = propose_candidates(kb, input, parse_scenario(e.scenario), e.options,
                                    settings);
    auto c = std::find_if(cands.begin(), cands.end(), [&](const Candidate& c) {
      return c.outcome_id == e.outcome_id;
    });
    if (c == cands.end())
      throw RequestError(409, "replay of version " + std::to_string(e.version) +
                                  " did not produce outcome " + e.outcome_id);
    kb = kb_from_text(kb_text(c->outcome.kb_after));
    out.push_back(to_json(c->outcome.metrics_after));
  }
  return out;
}

// ---- SessionStore ----

namespace {

namespace fs = std::filesystem;

Json snapshot_json(const SessionSnapshot& s) {
  return {{"id", s.id},
          {"version", s.version},
          {"scope", s.scope},
          {"schema", Json::parse(schema_to_json(s.schema))},
          {"table_csv", s.table_csv},
          {"original_kb", s.original_kb_text},
          {"current_kb", s.current_kb_text}};
}

SessionSnapshot snapshot_from_json(const Json& j) {
  SessionSnapshot s;
  s.id = j.at("id").get<std::string>();
  s.version = j.at("version").get<std::size_t>();
  s.scope = j.at("scope").get<std::string>();
  s.schema = parse_schema_json(j.at("schema").dump());
  s.table_csv = j.at("table_csv").get<std::string>();
  s.original_kb_text = j.at("original_kb").get<std::string>();
  s.current_kb_text = j.at("current_kb").get<std::string>();
  return s;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SessionStore::SessionStore(std::optional<std::filesystem::path> root)
    : root_(std::move(root)) {
  if (root_) {
    std::error_code ec;
    fs::create_directories(*root_, ec);
    if (ec) throw IoError("cannot create store " + root_->string() + ": " + ec.message());
  }
}

std::optional<std::filesystem::path> SessionStore::root_from_env() {
  const char* v = std::getenv("XKB_STORE");
  if (!v || !*v) return std::nullopt;
  return fs::path(v);
}

void SessionStore::load() {
  if (!root_) return;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(*root_)) {
    const auto& p = entry.path();
    if (p.extension() == ".json") files.push_back(p);
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, std::shared_ptr<Session>> loaded;
  for (const auto& p : files) {
    SessionSnapshot snap;
    try {
      snap = snapshot_from_json(Json::parse(read_file(p)));
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      throw IoError("corrupted session snapshot " + p.string() + ": " + e.what());
    }
    fs::path hist = *root_ / (snap.id + ".history.jsonl");
    std::vector<HistoryEntry> history;
    if (fs::exists(hist)) {
      std::istringstream lines(read_file(hist));
      std::string line;
      std::size_t n = 0;
      while (std::getline(lines, line)) {
        ++n;
        if (line.empty()) continue;
        try {
          history.push_back(history_entry_from_json(Json::parse(line)));
        } catch (const std::exception& e) {
          throw IoError("corrupted history " + hist.string() + " line " +
                        std::to_string(n) + ": " + e.what());
        }
      }
    }
    try {
      loaded[snap.id] = Session::restore(snap, std::move(history));
    } catch (const IoError& e) {
      throw IoError(p.string() + ": " + e.what());
    } catch (const std::exception& e) {
      throw IoError("corrupted session snapshot " + p.string() + ": " + e.what());
    }
  }
  std::lock_guard lock(mutex_);
  sessions_ = std::move(loaded);
}

std::string SessionStore::fresh_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  for (;;) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "s%016llx",
                  static_cast<unsigned long long>(rng()));
    if (!sessions_.count(buf)) return buf;
  }
}

std::shared_ptr<Session> SessionStore::create(const SessionSpec& spec) {
  std::string id;
  {
    std::lock_guard lock(mutex_);
    id = fresh_id();
    sessions_[id] = nullptr;
  }
  std::shared_ptr<Session> s;
  try {
    s = Session::create(id, spec);
    if (root_) {
      write_snapshot(s->snapshot());
      std::ofstream(*root_ / (id + ".history.jsonl"), std::ios::trunc);
    }
  } catch (...) {
    std::lock_guard lock(mutex_);
    sessions_.erase(id);
    throw;
  }
  std::lock_guard lock(mutex_);
  sessions_[id] = s;
  return s;
}

std::shared_ptr<Session> SessionStore::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end() || !it->second)
    throw RequestError(404, "unknown session " + id);
  return it->second;
}

std::vector<std::string> SessionStore::ids() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, s] : sessions_)
    if (s) out.push_back(id);
  return out;
}

std::pair<Json, HistoryEntry> SessionStore::commit(Session& session,
                                                   const std::string& proposal_id,
                                                   const std::string& outcome_id) {
  if (!root_) return session.commit(proposal_id, outcome_id);
  return session.commit(proposal_id, outcome_id,
                        [this](const SessionSnapshot& snap, const HistoryEntry& e) {
                          fs::path hist = *root_ / (snap.id + ".history.jsonl");
                          std::ofstream out(hist, std::ios::app | std::ios::binary);
                          out << to_json(e).dump() << '\n';
                          out.flush();
                          if (!out) throw IoError("cannot append to " + hist.string());
                          write_snapshot(snap);
                        });
}

void SessionStore::write_snapshot(const SessionSnapshot& snapshot) const {
  fs::path target = *root_ / (snapshot.id + ".json");
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
    out << snapshot_json(snapshot).dump(2) << '\n';
    out.flush();
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot write " + target.string() + ": " + ec.message());
}

}  // namespace xkb
