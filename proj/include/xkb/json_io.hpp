#pragma once

#include "json.hpp"

#include "xkb/knowledge_base.hpp"
#include "xkb/postulates.hpp"
#include "xkb/revision.hpp"

namespace xkb {

using Json = nlohmann::ordered_json;

/// `{"f1": "1", ...}` in schema order.
Json to_json(const Schema& schema, const DataPoint& point);
Json to_json(const Schema& schema, const ConflictWitness& w);
Json to_json(const Schema& schema, const ConsistencyReport& report);
Json to_json(const Schema& schema, const CompletenessReport& report);
Json to_json(const Schema& schema, const EnforcementReport& report);
Json to_json(const Schema& schema, const ValidationReport& report);
Json to_json(const CoherenceValue& tau);
Json to_json(const KBMetrics& m);
Json to_json(const Rule& rule);
/// Rules of K_d and K_e with their canonical text.
Json to_json(const ExplanationKB& kb);
Json to_json(const RevisionTrace& trace);
Json to_json(const Schema& schema, const RevisionOutcome& outcome);
Json to_json(const Verdict& v);
Json to_json(const PostulateReport& report);
Json to_json(const Schema& schema, const OracleResult& result);

/// Removed ids, added rules and weakened before/after pairs of a revision.
Json revision_diff(const ExplanationKB& before, const RevisionOutcome& outcome);

}  // namespace xkb
