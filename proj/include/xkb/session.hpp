#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "xkb/error.hpp"
#include "xkb/json_io.hpp"

namespace xkb {

/// A request that cannot be served as asked; `status` is the HTTP code
/// (404 unknown session/proposal, 409 conflict, 422 precondition).
class RequestError : public Error {
 public:
  RequestError(int status, std::string message)
      : Error(std::move(message)), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

struct SessionSpec {
  std::optional<Schema> schema;
  std::optional<std::string> table_csv;
  std::string kb_text;
  std::string scope = "full";
};

/// Immutable starting point of a session; together with the history it
/// determines the current state.
struct SessionSnapshot {
  std::string id;
  Schema schema;
  std::string table_csv;
  std::string original_kb_text;
  std::string current_kb_text;
  std::string scope = "full";
  std::size_t version = 0;
};

struct HistoryEntry {
  std::string timestamp;
  std::string feedback;
  std::string scenario;
  Json options = Json::object();
  std::string proposal_id;
  std::string outcome_id;
  bool accepted = false;
  std::size_t version = 0;
  Json metrics_after;
};

Json to_json(const HistoryEntry& e);
HistoryEntry history_entry_from_json(const Json& j);

struct Candidate {
  std::string outcome_id;
  ScenarioConfig config;
  RevisionOutcome outcome;
  PostulateReport postulates;
  Json diff;
};

struct Proposal {
  std::string id;
  std::string text;
  Rule input;
  Scenario scenario = Scenario::kS1;
  Json options = Json::object();
  std::size_t base_version = 0;
  std::vector<Candidate> candidates;
  bool committed = false;
};

/// Candidate revisions of `kb` by `input`. S1, and S2/S3 with an explicit
/// weakening option, give one candidate; S2/S3 otherwise give one per
/// weakening strategy with identical results merged. Outcome ids name the
/// weakening strategy.
std::vector<Candidate> propose_candidates(const ExplanationKB& kb, const Rule& input,
                                          Scenario scenario, const Json& options,
                                          const RevisionSettings& settings);

class Session {
 public:
  static std::shared_ptr<Session> create(std::string id, const SessionSpec& spec);
  /// Rebuilds a session from its snapshot and history.
  static std::shared_ptr<Session> restore(const SessionSnapshot& snapshot,
                                          std::vector<HistoryEntry> history);

  const std::string& id() const { return id_; }

  Json state() const;
  Json validate_rule(const std::string& text) const;
  Json propose(const std::string& text, const std::string& scenario,
               const Json& options);
  /// Called with the next snapshot and history entry before the commit
  /// takes effect; a throwing hook aborts the commit.
  using CommitHook =
      std::function<void(const SessionSnapshot&, const HistoryEntry&)>;

  /// Returns the new state and the appended history entry.
  std::pair<Json, HistoryEntry> commit(const std::string& proposal_id,
                                       const std::string& outcome_id,
                                       const CommitHook& persist = {});
  Json history() const;

  SessionSnapshot snapshot() const;
  std::vector<HistoryEntry> history_entries() const;
  std::string current_kb_text() const;
  KBMetrics current_metrics() const;

 private:
  Session() = default;
  void init(SessionSnapshot snapshot);
  RevisionSettings settings() const;
  Json state_locked() const;

  mutable std::shared_mutex mutex_;
  std::string id_;
  SessionSnapshot snapshot_;
  std::shared_ptr<const ClassifierTable> table_;
  Scope scope_;
  ExplanationKB original_kb_;
  ExplanationKB current_kb_;
  std::vector<HistoryEntry> history_;
  std::map<std::string, Proposal> proposals_;
  std::size_t next_proposal_ = 1;
};

/// Replays committed outcomes from the original snapshot. Returns the
/// metrics after each step; throws RequestError when an entry no longer
/// produces its recorded outcome id.
std::vector<Json> replay_history(const SessionSnapshot& snapshot,
                                 const std::vector<HistoryEntry>& history);

/// Sessions by id, persisted under `root` when one is given: `<id>.json`
/// holds the snapshot and `<id>.history.jsonl` the append-only history.
class SessionStore {
 public:
  explicit SessionStore(std::optional<std::filesystem::path> root = std::nullopt);

  /// Store rooted at $XKB_STORE, or in-memory when unset.
  static std::optional<std::filesystem::path> root_from_env();

  /// Loads every snapshot under the root. Throws IoError naming the file
  /// on a corrupted snapshot or history.
  void load();

  std::shared_ptr<Session> create(const SessionSpec& spec);
  std::shared_ptr<Session> get(const std::string& id) const;
  std::vector<std::string> ids() const;

  /// Commits a proposal and persists it: appends to the history, then
  /// rewrites the snapshot.
  std::pair<Json, HistoryEntry> commit(Session& session, const std::string& proposal_id,
                                       const std::string& outcome_id);

 private:
  void write_snapshot(const SessionSnapshot& snapshot) const;
  std::string fresh_id();

  std::optional<std::filesystem::path> root_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace xkb
