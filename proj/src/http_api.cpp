#include "uisbench/http_api.hpp"

#include <cmath>
#include <functional>

#include "uisbench/engine_json.hpp"

namespace uisbench {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";
const char* const kId = R"(/sessions/([^/]+))";

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

json error_body(const Error& e) {
  json body = {{"code", e.code()}, {"message", e.what()}};
  if (!e.field().empty()) body["field"] = e.field();
  return body;
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded()) throw Error("bad_json", "request body is not valid JSON");
  if (!body.is_object()) throw Error("bad_json", "request body must be a JSON object");
  return body;
}

double number_field(const json& body, const char* key) {
  if (!body.contains(key)) throw Error("validation_error", "required", key);
  const json& v = body.at(key);
  if (!v.is_number()) throw Error("validation_error", "must be a number", key);
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error("validation_error", "must be finite", key);
  return d;
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

Handler guarded(Handler fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const ValidationFailure& e) {
      json body = error_body(e);
      json errors = json::array();
      for (const auto& fe : e.errors()) errors.push_back({{"field", fe.field}, {"message", fe.message}});
      body["errors"] = errors;
      send(res, 422, body);
    } catch (const Error& e) {
      send(res, status_for(e.code()), error_body(e));
    } catch (const std::exception& e) {
      send(res, 500, {{"code", "internal"}, {"message", e.what()}});
    }
  };
}

}  // namespace

int status_for(const std::string& code) {
  if (code == "not_found") return 404;
  if (code == "wrong_phase" || code == "no_staged_trial") return 409;
  if (code == "bad_json") return 400;
  if (code == "storage_error" || code == "internal") return 500;
  return 422;
}

void mount_api(httplib::Server& server, SessionStore& store) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS"}});
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/schema", guarded([](const httplib::Request&, httplib::Response& res) {
               send(res, 200, engine_schema());
             }));

  server.Post("/sessions", guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                if (!body.contains("engine") || !body.at("engine").is_string()) {
                  throw Error("validation_error", "engine tag required", "engine");
                }
                EngineKind engine;
                try {
                  engine = engine_kind_from_string(body.at("engine").get<std::string>());
                } catch (const Error& e) {
                  throw Error("validation_error", e.what(), "engine");
                }
                std::uint64_t seed = 1;
                if (body.contains("seed")) {
                  if (!body.at("seed").is_number_unsigned()) {
                    throw Error("validation_error", "must be a non-negative integer", "seed");
                  }
                  seed = body.at("seed").get<std::uint64_t>();
                }
                send(res, 201, state_to_json(store.create(engine, seed)));
              }));

  server.Get(kId, guarded([&store](const httplib::Request& req, httplib::Response& res) {
               send(res, 200, state_to_json(store.get(req.matches[1])));
             }));

  server.Get(std::string(kId) + "/trial",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.matches[1];
               const Case c = store.next_learning_trial(id);
               const SessionState s = store.get(id);
               send(res, 200,
                    {{"index", s.learning.size()},
                     {"temperature", display_reading(c.temperature)},
                     {"pressure", display_reading(c.pressure)},
                     {"phase", to_string(s.phase)}});
             }));

  server.Post(std::string(kId) + "/answer",
              guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const json body = parse_body(req);
                if (!body.contains("verdict") || !body.at("verdict").is_string()) {
                  throw Error("validation_error", "verdict must be \"M\" or \"W\"", "verdict");
                }
                Verdict v;
                try {
                  v = verdict_from_string(body.at("verdict").get<std::string>());
                } catch (const Error& e) {
                  throw Error("validation_error", e.what(), "verdict");
                }
                send(res, 200, feedback_to_json(store.submit_answer(req.matches[1], v)));
              }));

  server.Get(std::string(kId) + "/system",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
               send(res, 200, system_to_json(store.get_system(req.matches[1])));
             }));

  server.Put(std::string(kId) + "/system",
             guarded([&store](const httplib::Request& req, httplib::Response& res) {
               const std::string id = req.matches[1];
               json body = parse_body(req);
               const EngineKind engine = store.get(id).engine;
               if (!body.contains("kind")) {
                 body["kind"] = to_string(engine);
               } else if (!body.at("kind").is_string() ||
                          body.at("kind").get<std::string>() != to_string(engine)) {
                 throw Error("kind_mismatch",
                             "session engine is " + std::string(to_string(engine)), "kind");
               }
               const SessionState s = store.put_system(id, system_from_json(body));
               send(res, 200, {{"phase", to_string(s.phase)}, {"system", system_to_json(*s.system)}});
             }));

  server.Post(std::string(kId) + "/probe",
              guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1];
                const json body = parse_body(req);
                const double t = number_field(body, "temperature");
                const double p = number_field(body, "pressure");
                const BeliefReport r = store.test_case(id, t, p);
                send(res, 200,
                     {{"report", report_to_json(r)}, {"probe_count", store.get(id).probes.size()}});
              }));

  server.Post(std::string(kId) + "/finalize",
              guarded([&store](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1];
                json body = test_summary_to_json(store.finalize(id));
                body["phase"] = to_string(store.get(id).phase);
                send(res, 200, body);
              }));
}

}  // namespace uisbench
