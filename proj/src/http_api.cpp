#include "xkb/http_api.hpp"

#include <regex>

namespace xkb {

namespace {

ApiResponse error(int status, const std::string& kind, const std::string& message) {
  return {status, {{"error", kind}, {"message", message}}};
}

const std::string& require_string(const Json& body, const char* key) {
  if (!body.contains(key) || !body.at(key).is_string())
    throw ValidationError(std::string("field ") + key + " must be a string");
  return body.at(key).get_ref<const std::string&>();
}

std::optional<std::string> optional_string(const Json& body, const char* key) {
  if (!body.contains(key) || body.at(key).is_null()) return std::nullopt;
  return require_string(body, key);
}

Json parse_body(const std::string& body) {
  if (body.empty()) return Json::object();
  Json j = Json::parse(body);
  if (!j.is_object()) throw ValidationError("request body must be a JSON object");
  return j;
}

SessionSpec session_spec(const Json& body) {
  SessionSpec spec;
  spec.kb_text = require_string(body, "kb_text");
  spec.table_csv = optional_string(body, "table_csv");
  if (auto scope = optional_string(body, "scope")) spec.scope = *scope;
  if (body.contains("schema") && !body.at("schema").is_null()) {
    const auto& s = body.at("schema");
    spec.schema = parse_schema_json(s.is_string() ? s.get<std::string>() : s.dump());
  }
  return spec;
}

ApiResponse route(SessionStore& store, const std::string& method,
                  const std::string& path, const std::string& raw) {
  static const std::regex session_re(R"(^/api/sessions/([A-Za-z0-9_-]+)(/[a-z-]+)?$)");

  if (path == "/healthz") {
    if (method != "GET") return error(405, "method", "use GET");
    return {200, {{"status", "ok"}}};
  }
  if (path == "/api/sessions") {
    if (method == "GET") return {200, {{"sessions", store.ids()}}};
    if (method != "POST") return error(405, "method", "use GET or POST");
    auto session = store.create(session_spec(parse_body(raw)));
    Json out = session->state();
    out["session_id"] = session->id();
    return {201, out};
  }

  std::smatch m;
  if (!std::regex_match(path, m, session_re)) return error(404, "not-found", "no route " + path);
  const std::string id = m[1];
  const std::string action = m[2].matched ? m[2].str() : "";

  auto expect = [&](const char* want) -> std::optional<ApiResponse> {
    if (method == want) return std::nullopt;
    return error(405, "method", std::string("use ") + want);
  };

  if (action.empty()) {
    if (auto e = expect("GET")) return *e;
    return {200, store.get(id)->state()};
  }
  if (action == "/history") {
    if (auto e = expect("GET")) return *e;
    return {200, store.get(id)->history()};
  }
  if (action == "/validate-rule") {
    if (auto e = expect("POST")) return *e;
    auto session = store.get(id);
    return {200, session->validate_rule(require_string(parse_body(raw), "text"))};
  }
  if (action == "/feedback") {
    if (auto e = expect("POST")) return *e;
    auto session = store.get(id);
    auto body = parse_body(raw);
    auto scenario = optional_string(body, "scenario").value_or("s1");
    Json options = body.contains("options") ? body.at("options") : Json::object();
    if (options.is_null()) options = Json::object();
    return {200, session->propose(require_string(body, "text"), scenario, options)};
  }
  if (action == "/commit") {
    if (auto e = expect("POST")) return *e;
    auto session = store.get(id);
    auto body = parse_body(raw);
    auto [state, entry] = store.commit(*session, require_string(body, "proposal_id"),
                                       require_string(body, "outcome_id"));
    state["history_entry"] = to_json(entry);
    return {200, state};
  }
  return error(404, "not-found", "no route " + path);
}

}  // namespace

ApiResponse handle_request(SessionStore& store, const std::string& method,
                           const std::string& path, const std::string& body) {
  try {
    return route(store, method, path, body);
  } catch (const ParseError& e) {
    auto r = error(400, "parse", e.what());
    r.body["detail"] = e.detail();
    r.body["line"] = e.line();
    r.body["column"] = e.column();
    r.body["expected"] = e.expected();
    return r;
  } catch (const ValidationError& e) {
    return error(400, "validation", e.what());
  } catch (const Json::exception& e) {
    return error(400, "json", e.what());
  } catch (const RequestError& e) {
    const char* kind = e.status() == 404   ? "not-found"
                       : e.status() == 409 ? "conflict"
                                           : "precondition";
    return error(e.status(), kind, e.what());
  } catch (const LimitError& e) {
    auto r = error(422, "limit", e.what());
    r.body["partial"] = e.partial();
    return r;
  } catch (const std::exception& e) {
    return error(500, "internal", e.what());
  }
}

}  // namespace xkb
