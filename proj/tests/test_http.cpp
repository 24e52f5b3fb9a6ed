#include <doctest.h>

#include <thread>

#include "scripted_participant.hpp"
#include "uisbench/engine_json.hpp"
#include "uisbench/http_api.hpp"

using namespace uisbench;
using nlohmann::json;

namespace {

// In-process server on an ephemeral loopback port.
struct Fixture {
  SessionStore store;
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::unique_ptr<httplib::Client> client;

  Fixture() {
    mount_api(server, store);
    port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }
  ~Fixture() {
    server.stop();
    thread.join();
  }

  std::pair<int, json> call(const std::string& method, const std::string& path, const json& body = nullptr) {
    return call_raw(method, path, body.is_null() ? std::string() : body.dump());
  }

  std::pair<int, json> call_raw(const std::string& method, const std::string& path, const std::string& body) {
    httplib::Result r = method == "GET"    ? client->Get(path)
                        : method == "PUT"  ? client->Put(path, body, "application/json")
                                           : client->Post(path, body, "application/json");
    REQUIRE(r);
    const json j = r->body.empty() ? json() : json::parse(r->body);
    return {r->status, j};
  }

  std::string create(const std::string& engine, std::uint64_t seed) {
    auto [status, body] = call("POST", "/sessions", {{"engine", engine}, {"seed", seed}});
    REQUIRE(status == 201);
    return body["id"].get<std::string>();
  }

  // Truthful answers via the library's view of the staged case.
  void learn(const std::string& id) {
    for (;;) {
      auto [status, trial] = call("GET", "/sessions/" + id + "/trial");
      if (status != 200) break;
      const Case c = learning_case(store.get(id).seed, trial["index"].get<std::size_t>());
      auto [s2, fb] = call("POST", "/sessions/" + id + "/answer",
                           {{"verdict", truth_of(c) == Verdict::kMalfunction ? "M" : "W"}});
      REQUIRE(s2 == 200);
      if (fb["phase"] != "Learning") break;
    }
  }
};

}  // namespace

TEST_CASE("schema and cors") {
  Fixture f;
  auto [status, schema] = f.call("GET", "/schema");
  CHECK(status == 200);
  CHECK(schema == engine_schema());
  auto r = f.client->Get("/schema");
  REQUIRE(r);
  CHECK(r->get_header_value("Access-Control-Allow-Origin") == "*");
  CHECK(r->get_header_value("Content-Type") == "application/json");
  auto o = f.client->Options("/sessions");
  REQUIRE(o);
  CHECK(o->status == 204);
}

TEST_CASE("session creation errors") {
  Fixture f;
  auto [s1, b1] = f.call("POST", "/sessions", {{"engine", "bayes"}});
  CHECK(s1 == 422);
  CHECK(b1["code"] == "validation_error");
  CHECK(b1["field"] == "engine");
  auto [s2, b2] = f.call_raw("POST", "/sessions", "{not json");
  CHECK(s2 == 400);
  CHECK(b2["code"] == "bad_json");
  auto [s3, b3] = f.call("POST", "/sessions", {{"engine", "fuzzy"}, {"seed", -4}});
  CHECK(s3 == 422);
  CHECK(b3["field"] == "seed");
  auto [s4, b4] = f.call("POST", "/sessions", {{"engine", "fuzzy"}});
  CHECK(s4 == 201);
  CHECK(b4["seed"] == 1);
  CHECK(b4["phase"] == "Learning");
  auto [s5, b5] = f.call("GET", "/sessions/ffffffffffffffff");
  CHECK(s5 == 404);
  CHECK(b5["code"] == "not_found");
}

TEST_CASE("learning over http") {
  Fixture f;
  const auto id = f.create("emycin", 8);
  auto [s0, b0] = f.call("POST", "/sessions/" + id + "/answer", {{"verdict", "M"}});
  CHECK(s0 == 409);
  CHECK(b0["code"] == "no_staged_trial");

  auto [s1, trial] = f.call("GET", "/sessions/" + id + "/trial");
  CHECK(s1 == 200);
  CHECK(trial["index"] == 0);
  const Case c = learning_case(8, 0);
  CHECK(trial["temperature"] == display_reading(c.temperature));
  CHECK(trial["pressure"] == display_reading(c.pressure));

  auto [s2, b2] = f.call("POST", "/sessions/" + id + "/answer", {{"verdict", "maybe"}});
  CHECK(s2 == 422);
  CHECK(b2["field"] == "verdict");

  auto [s3, fb] = f.call("POST", "/sessions/" + id + "/answer", {{"verdict", "M"}});
  CHECK(s3 == 200);
  CHECK(fb["correct"] == (c.cell.malfunction));
  CHECK(fb["correct_answer"] == (c.cell.malfunction ? "M" : "W"));
  CHECK(fb["trials"] == 1);

  f.learn(id);
  auto [s4, state] = f.call("GET", "/sessions/" + id);
  CHECK(s4 == 200);
  CHECK(state["phase"] == "Building");
  auto [s5, b5] = f.call("GET", "/sessions/" + id + "/trial");
  CHECK(s5 == 409);
  CHECK(b5["code"] == "wrong_phase");
}

TEST_CASE("system entry, probing and finalizing over http") {
  Fixture f;
  const auto id = f.create("independence", 4);
  auto [s0, b0] = f.call("POST", "/sessions/" + id + "/probe", {{"temperature", 200}, {"pressure", 82}});
  CHECK(s0 == 409);
  f.learn(id);

  auto [s1, b1] = f.call("GET", "/sessions/" + id + "/system");
  CHECK(s1 == 404);

  json sys = system_to_json(script::honest_system(EngineKind::kIndependence));
  json wrong = sys;
  wrong["kind"] = "fuzzy";
  auto [s2, b2] = f.call("PUT", "/sessions/" + id + "/system", wrong);
  CHECK(s2 == 422);
  CHECK(b2["code"] == "kind_mismatch");

  json bad = sys;
  bad["params"]["p_nn"] = 1.5;
  bad["params"]["p_hh"] = -0.5;
  auto [s3, b3] = f.call("PUT", "/sessions/" + id + "/system", bad);
  CHECK(s3 == 422);
  CHECK(b3["code"] == "validation_error");
  REQUIRE(b3["errors"].size() == 2);
  CHECK(b3["errors"][0]["field"] == "params.p_nn");
  CHECK(b3["errors"][1]["field"] == "params.p_hh");

  json broken = sys;
  broken.erase("params");
  auto [s4, b4] = f.call("PUT", "/sessions/" + id + "/system", broken);
  CHECK(s4 == 422);

  json no_kind = sys;
  no_kind.erase("kind");
  auto [s5, b5] = f.call("PUT", "/sessions/" + id + "/system", no_kind);
  CHECK(s5 == 200);
  CHECK(b5["phase"] == "Tuning");
  auto [s6, back] = f.call("GET", "/sessions/" + id + "/system");
  CHECK(s6 == 200);
  CHECK(back == sys);

  auto [s7, probe] = f.call("POST", "/sessions/" + id + "/probe", {{"temperature", 200}, {"pressure", 82}});
  CHECK(s7 == 200);
  CHECK(probe["report"]["value"].get<double>() == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(probe["probe_count"] == 1);
  auto [s8, b8] = f.call("POST", "/sessions/" + id + "/probe", {{"temperature", "hot"}, {"pressure", 82}});
  CHECK(s8 == 422);
  CHECK(b8["field"] == "temperature");

  auto [s9, summary] = f.call("POST", "/sessions/" + id + "/finalize");
  CHECK(s9 == 200);
  CHECK(summary["phase"] == "Done");
  CHECK(summary["trials"].size() == 30);
  CHECK(summary["trials_to_tune"] == 1);
  auto [s10, b10] = f.call("POST", "/sessions/" + id + "/finalize");
  CHECK(s10 == 409);

  auto [s11, state] = f.call("GET", "/sessions/" + id);
  CHECK(state["test"]["trials"] == summary["trials"]);
  CHECK(state["test"]["accuracy"] == summary["accuracy"]);
}

TEST_CASE("status mapping") {
  CHECK(status_for("not_found") == 404);
  CHECK(status_for("wrong_phase") == 409);
  CHECK(status_for("no_staged_trial") == 409);
  CHECK(status_for("bad_json") == 400);
  CHECK(status_for("storage_error") == 500);
  CHECK(status_for("validation_error") == 422);
  CHECK(status_for("kind_mismatch") == 422);
}
