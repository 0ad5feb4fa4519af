#include "sovai/api.hpp"

#include "httplib.h"
#include "gtest/gtest.h"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

using namespace sovai;
namespace fs = std::filesystem;

namespace {

fs::path freshDir(const std::string& tag) {
  static std::atomic<int> n{0};
  const auto dir = fs::temp_directory_path() /
                   ("sovai-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
  fs::remove_all(dir);
  return dir;
}

struct Fixture {
  fs::path dir;
  ScenarioStore store;
  Service service;

  explicit Fixture(const std::string& tag, bool seed = true)
      : dir(freshDir(tag)), store(dir), service(store) {
    if (seed) store.seed(builtinScenarios());
  }
  ~Fixture() { fs::remove_all(dir); }

  ApiResponse call(const std::string& method, const std::string& path, const std::string& body = "",
                   std::map<std::string, std::string> headers = {}) const {
    return service.handle({method, path, body, std::move(headers)});
  }
};

Json parse(const ApiResponse& r) { return Json::parse(r.body); }

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "sovai");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = runCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string writeFile(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST(Errors, StatusMapping) {
  EXPECT_EQ(httpStatus(ApiErrorCode::Validation), 422);
  EXPECT_EQ(httpStatus(ApiErrorCode::NotFound), 404);
  EXPECT_EQ(httpStatus(ApiErrorCode::Conflict), 409);
  EXPECT_EQ(httpStatus(ApiErrorCode::SolverFailure), 500);
  EXPECT_EQ(httpStatus(ApiErrorCode::Internal), 500);
  EXPECT_EQ(httpStatus(ApiErrorCode::Malformed), 400);
  const auto j = errorJson(ApiError(ApiErrorCode::Validation, "bad", {{"budget", "must be > 0"}}));
  EXPECT_EQ(j["error"]["code"], "validation");
  EXPECT_EQ(j["error"]["details"][0]["path"], "budget");
}

TEST(Codec, RoundingAndCanonicalText) {
  EXPECT_EQ(round12(0.1 + 0.2), 0.3);
  EXPECT_EQ(round12(-0.0), 0.0);
  EXPECT_FALSE(std::signbit(round12(-0.0)));
  EXPECT_EQ(dumpJson(Json{{"a", 1}}), "{\n  \"a\": 1\n}\n");
  const auto j = toJson(solveJoint(builtinScenario("india")->model));
  for (auto key : {"allocation", "openness", "multiplier", "capacities", "welfare", "fundedSet", "kktResiduals", "flags"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_TRUE(j["allocation"].contains("data"));
  EXPECT_TRUE(j["welfare"].contains("W"));
}

TEST(Codec, Matrices) {
  const auto m = matrixFromText("# equal\n1 1 1 1\n1 1 1 1\n1 1 1 1\n1 1 1 1\n");
  EXPECT_EQ(m.size(), 4u);
  const auto f = matrixFromText("1 3\n1/3 1\n");
  EXPECT_NEAR(f(1, 0), 1.0 / 3, 1e-15);
  EXPECT_THROW(matrixFromText("1 2\n3 1\n"), ValidationError);
  EXPECT_EQ(matrixFromJson(Json::parse(R"({"matrix": [[1, 2], [0.5, 1]]})")).size(), 2u);
  EXPECT_THROW(matrixFromJson(Json::parse(R"([[1, "x"], [1, 1]])")), ValidationError);
}

TEST(Store, CreateUpdateConflictDelete) {
  Fixture f("store", false);
  auto s = *builtinScenario("gulf");
  EXPECT_EQ(f.store.put(s, std::nullopt).version, 1);
  EXPECT_THROW(f.store.put(s, std::nullopt), ApiError);
  EXPECT_THROW(f.store.put(s, 3), ApiError);
  s.name = "Gulf v2";
  EXPECT_EQ(f.store.put(s, 1).version, 2);
  EXPECT_EQ(f.store.get("gulf")->name, "Gulf v2");

  ScenarioStore reopened(f.dir);
  EXPECT_EQ(reopened.get("gulf")->version, 2);
  EXPECT_TRUE(reopened.skipped().empty());

  try {
    f.store.remove("gulf", 1);
    FAIL();
  } catch (const ApiError& e) {
    EXPECT_EQ(e.code(), ApiErrorCode::Conflict);
  }
  f.store.remove("gulf", 2);
  EXPECT_FALSE(f.store.get("gulf"));
  EXPECT_FALSE(fs::exists(f.dir / "gulf.json"));
}

TEST(Store, SkipsBrokenFiles) {
  const auto dir = freshDir("broken");
  writeFile(dir / "bad.json", "{ nope");
  writeFile(dir / "other.json", dumpScenario(*builtinScenario("india")));
  ScenarioStore store(dir);
  EXPECT_EQ(store.list().size(), 0u);
  EXPECT_EQ(store.skipped().size(), 2u);
  fs::remove_all(dir);
}

TEST(Store, ConcurrentPutsSameBaseVersion) {
  for (int round = 0; round < 20; ++round) {
    Fixture f("cas");
    std::string body = dumpScenario(*builtinScenario("india"));
    std::atomic<bool> go{false};
    int status[2] = {0, 0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 2; ++t) {
      threads.emplace_back([&, t] {
        while (!go) std::this_thread::yield();
        status[t] = f.call("PUT", "/scenarios/india", body, {{"if-match", "\"1\""}}).status;
      });
    }
    go = true;
    for (auto& th : threads) th.join();
    std::sort(status, status + 2);
    ASSERT_EQ(status[0], 200);
    ASSERT_EQ(status[1], 409);
    EXPECT_EQ(f.store.get("india")->version, 2);
  }
}

TEST(Service, HealthAndListing) {
  Fixture f("health");
  auto r = f.call("GET", "/healthz");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(parse(r)["version"], kVersion);
  r = f.call("GET", "/scenarios");
  EXPECT_EQ(parse(r)["scenarios"].size(), 3u);
  r = f.call("GET", "/scenarios/gulf");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.headers["ETag"], "\"1\"");
  EXPECT_EQ(loadScenarioText(r.body), *builtinScenario("gulf"));
  EXPECT_EQ(f.call("GET", "/scenarios/atlantis").status, 404);
  EXPECT_EQ(f.call("GET", "/nowhere").status, 404);
}

TEST(Service, PutSemantics) {
  Fixture f("put");
  auto doc = serializeScenario(*builtinScenario("india"));
  doc.erase("id");
  doc["name"] = "Copy";
  auto r = f.call("PUT", "/scenarios/copy", doc.dump());
  EXPECT_EQ(r.status, 201);
  EXPECT_EQ(parse(r)["id"], "copy");
  EXPECT_EQ(parse(r)["version"], 1);

  r = f.call("PUT", "/scenarios/copy", doc.dump());  // body version 1 is the base
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.headers["ETag"], "\"2\"");
  r = f.call("PUT", "/scenarios/copy", doc.dump(), {{"if-match", "\"1\""}});
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(parse(r)["error"]["code"], "conflict");
  r = f.call("PUT", "/scenarios/copy", doc.dump(), {{"if-match", "2"}});
  EXPECT_EQ(r.status, 200);

  doc["id"] = "other";
  EXPECT_EQ(f.call("PUT", "/scenarios/copy", doc.dump()).status, 422);
  doc["id"] = "copy";
  doc["pillars"]["compute"]["a"] = -1;
  r = f.call("PUT", "/scenarios/copy", doc.dump(), {{"if-match", "3"}});
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(parse(r)["error"]["details"][0]["path"], "pillars.compute.a");
  EXPECT_EQ(f.call("PUT", "/scenarios/copy", "{ not json").status, 400);

  r = f.call("DELETE", "/scenarios/copy");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(f.call("DELETE", "/scenarios/copy").status, 404);
}

TEST(Service, Solve) {
  Fixture f("solve");
  auto r = f.call("POST", "/solve", R"({"scenarioId": "india"})");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body, dumpJson(toJson(solveJoint(builtinScenario("india")->model))));
  EXPECT_EQ(r.body, f.call("POST", "/solve", R"({"scenarioId": "india"})").body);

  const Json model = serializeModel(builtinScenario("gulf")->model);
  r = f.call("POST", "/solve", Json{{"model", model}, {"options", {{"randomSeed", 7}}}}.dump());
  EXPECT_EQ(r.status, 200);

  Json bad = model;
  bad["budget"] = -2;
  r = f.call("POST", "/solve", Json{{"model", bad}}.dump());
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(parse(r)["error"]["details"][0]["path"], "model.budget");
  r = f.call("POST", "/solve", Json{{"scenarioId", "india"}, {"options", {{"tolerance", 5}}}}.dump());
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(f.call("POST", "/solve", "[1, 2").status, 400);
  EXPECT_EQ(f.call("POST", "/solve", "{}").status, 422);
  EXPECT_EQ(f.call("POST", "/solve", R"({"scenarioId": "atlantis"})").status, 404);
}

TEST(Service, Openness) {
  Fixture f("openness", false);
  auto r = f.call("POST", "/openness", R"({"alpha": 1, "g": 1, "k": 4, "lambda": 1, "p": 0.3})");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(parse(r), Json::parse(R"({"O": 0, "atBound": true})"));
  r = f.call("POST", "/openness", R"({"alpha": 0.7, "g": 1, "k": 4, "lambda": 1, "p": 0.3})");
  EXPECT_EQ(parse(r)["O"], 0.75);
  r = f.call("POST", "/openness", R"({"alpha": 2, "g": 1, "k": 4, "lambda": 1, "p": 0.3})");
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(parse(r)["error"]["details"][0]["path"], "alpha");
}

TEST(Service, Gate) {
  Fixture f("gate");
  auto r = f.call("POST", "/gate", R"({"scenarioId": "india-mcpf-high"})");
  ASSERT_EQ(r.status, 200);
  auto j = parse(r);
  EXPECT_EQ(j["mu"], 2.17);
  EXPECT_EQ(j["verdicts"]["model"], "defer");
  EXPECT_EQ(j["verdicts"]["data"], "fund");
  r = f.call("POST", "/gate", R"({"scenarioId": "india", "mu": 100})");
  EXPECT_EQ(parse(r)["allDeferred"], true);
  EXPECT_EQ(f.call("POST", "/gate", R"({"scenarioId": "india", "mu": 0})").status, 422);
  const Json model = serializeModel(builtinScenario("gulf")->model);
  EXPECT_EQ(f.call("POST", "/gate", Json{{"model", model}}.dump()).status, 422);
}

TEST(Service, Ahp) {
  Fixture f("ahp", false);
  auto r = f.call("POST", "/weights/ahp", R"([[1,1,1,1],[1,1,1,1],[1,1,1,1],[1,1,1,1]])");
  ASSERT_EQ(r.status, 200);
  const auto j = parse(r);
  EXPECT_EQ(j["consistencyRatio"], 0);
  for (auto key : {"data", "compute", "model", "norms"}) EXPECT_EQ(j["weights"][key], 0.25);
  EXPECT_EQ(f.call("POST", "/weights/ahp", R"({"matrix": [[1, 2], [2, 1]]})").status, 422);
}

TEST(Service, Dashboard) {
  Fixture f("dash");
  auto r = f.call("POST", "/scenarios/india/dashboard",
                  R"({"period": "2025-Q3", "observations": [{"metricId": "gpu_utilization", "value": 0.75, "period": "2025-Q3"}]})");
  ASSERT_EQ(r.status, 200);
  const auto j = parse(r);
  EXPECT_EQ(j["period"], "2025-Q3");
  EXPECT_EQ(j["guardrailResults"][0]["status"], "fail");
  EXPECT_EQ(j["guardrailResults"][1]["status"], "no_data");
  EXPECT_EQ(f.call("POST", "/scenarios/atlantis/dashboard", "{}").status, 404);
  EXPECT_EQ(f.call("POST", "/scenarios/india/dashboard", R"({"period": 3})").status, 422);
}

TEST(Service, SensitivityChecklistOracleCompare) {
  Fixture f("misc");
  auto r = f.call("POST", "/sensitivity", R"({"scenarioId": "gulf", "parameter": "lambda", "values": [0.5, 1, 2]})");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(parse(r)["rows"].size(), 3u);
  r = f.call("POST", "/sensitivity", R"({"scenarioId": "gulf", "parameter": "beta", "values": [1]})");
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(parse(r)["error"]["details"][0]["path"], "parameter");

  r = f.call("POST", "/checklist", R"({"scenarioId": "india"})");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(parse(r).size(), 4u);

  r = f.call("POST", "/oracle", R"({"scenarioId": "india", "resolution": 12})");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(parse(r)["gridResolution"], 12);
  EXPECT_EQ(f.call("POST", "/oracle", R"({"scenarioId": "india", "resolution": 1})").status, 422);

  r = f.call("POST", "/compare", R"({"a": {"scenarioId": "india"}, "b": {"scenarioId": "india"}})");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(parse(r)["welfareGap"], 0);
  EXPECT_EQ(f.call("POST", "/compare", R"({"a": {"scenarioId": "india"}})").status, 422);
}

TEST(Http, RealServer) {
  const auto dir = freshDir("http");
  {
    ScenarioStore store(dir);
    store.seed(builtinScenarios());
    Service service(store);
    ServiceConfig config;
    config.port = 0;
    std::ostringstream log;
    HttpServer server(service, config, log);
    const int port = server.bind();
    ASSERT_GT(port, 0);
    std::thread th([&] { server.listen(); });

    httplib::Client client("127.0.0.1", port);
    auto res = client.Get("/healthz");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
    res = client.Post("/solve", R"({"scenarioId": "gulf"})", "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->body, dumpJson(toJson(solveJoint(builtinScenario("gulf")->model))));
    res = client.Put("/scenarios/gulf", dumpScenario(*builtinScenario("gulf")), "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 200);
    EXPECT_EQ(res->get_header_value("ETag"), "\"2\"");
    res = client.Post("/solve", "{", "application/json");
    ASSERT_TRUE(res);
    EXPECT_EQ(res->status, 400);

    server.stop();
    th.join();
    EXPECT_NE(log.str().find("POST /solve 200"), std::string::npos);
    EXPECT_NE(log.str().find("GET /healthz 200"), std::string::npos);
  }
  fs::remove_all(dir);
}

TEST(Cli, Openness) {
  auto r = cli({"openness", "--alpha", "0.7", "--g", "1", "--k", "4", "--lambda", "1", "--p", "0.3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "0.75\n");
  r = cli({"openness", "--alpha", "1", "--g", "1", "--k", "4", "--lambda", "1", "--p", "0.3", "--json"});
  EXPECT_EQ(Json::parse(r.out), Json::parse(R"({"O": 0, "atBound": true})"));
}

TEST(Cli, UsageErrors) {
  auto r = cli({"solve", "builtin:india", "--frobnicate"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
  r = cli({"nonsense"});
  EXPECT_EQ(r.code, 1);
  r = cli({"solve", "/nonexistent/x.json"});
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, ValidationExitCode) {
  const auto dir = freshDir("cli-bad");
  auto doc = serializeScenario(*builtinScenario("india"));
  doc["pillars"]["compute"]["a"] = -1;
  const auto file = writeFile(dir / "bad.json", doc.dump());
  const auto r = cli({"solve", file});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("pillars.compute.a"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, AhpFromText) {
  const auto dir = freshDir("cli-ahp");
  const auto file = writeFile(dir / "equal.matrix", "1 1 1 1\n1 1 1 1\n1 1 1 1\n1 1 1 1\n");
  const auto r = cli({"ahp", file, "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  for (auto key : {"data", "compute", "model", "norms"}) EXPECT_EQ(j["weights"][key], 0.25);
  EXPECT_EQ(j["consistencyRatio"], 0);
  const auto plain = cli({"ahp", file});
  EXPECT_EQ(plain.code, 0);
  EXPECT_NE(plain.out.find("0.25"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, SubcommandsMatchEndpoints) {
  Fixture f("parity");
  const auto file = writeFile(f.dir / "in" / "gulf.json", dumpScenario(*builtinScenario("gulf")));
  const std::string inlineBody = Json{{"scenario", serializeScenario(*builtinScenario("gulf"))}}.dump();

  auto r = cli({"solve", file, "--json", "--seed", "42"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, f.call("POST", "/solve", R"({"scenarioId": "gulf", "options": {"randomSeed": 42}})").body);

  r = cli({"gate", file, "--json"});
  EXPECT_EQ(r.out, f.call("POST", "/gate", inlineBody).body);

  r = cli({"checklist", file, "--json"});
  EXPECT_EQ(r.out, f.call("POST", "/checklist", inlineBody).body);

  r = cli({"sweep", file, "--param", "lambda", "--values", "0.5,1,2", "--json"});
  EXPECT_EQ(r.out, f.call("POST", "/sensitivity", R"({"scenarioId": "gulf", "parameter": "lambda", "values": [0.5, 1, 2]})").body);

  r = cli({"oracle", file, "--resolution", "12", "--json"});
  EXPECT_EQ(r.out, f.call("POST", "/oracle", R"({"scenarioId": "gulf", "resolution": 12})").body);

  r = cli({"dashboard", file, "--period", "2025-Q3", "--json"});
  EXPECT_EQ(r.out, f.call("POST", "/scenarios/gulf/dashboard", R"({"period": "2025-Q3"})").body);

  r = cli({"compare", file, "builtin:india", "--json"});
  EXPECT_EQ(r.out, f.call("POST", "/compare", R"({"a": {"scenarioId": "gulf"}, "b": {"scenarioId": "india"}})").body);
}

TEST(Cli, CompareWithItselfHasZeroDeltas) {
  const auto r = cli({"compare", "builtin:india", "builtin:india", "--json"});
  ASSERT_EQ(r.code, 0);
  const auto j = Json::parse(r.out);
  for (const auto& d : j["deltas"]) EXPECT_EQ(d["delta"], 0);
  EXPECT_EQ(j["welfareGap"], 0);
}

TEST(Cli, TextFormats) {
  auto r = cli({"dashboard", "builtin:india", "--csv", "--period", "2025-Q3"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), kDashboardCsvHeader);
  r = cli({"sweep", "builtin:india", "--param", "budget", "--values", "0.1,0.2"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), kSweepCsvHeader);
  r = cli({"solve", "builtin:gulf"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("Compute"), std::string::npos);
}

TEST(Cli, BuiltinExport) {
  const auto dir = freshDir("cli-builtin");
  const auto r = cli({"builtin", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (auto id : {"india", "india-mcpf-high", "gulf"})
    EXPECT_EQ(loadScenarioFile((dir / (std::string(id) + ".json")).string()), *builtinScenario(id));
  fs::remove_all(dir);
}
