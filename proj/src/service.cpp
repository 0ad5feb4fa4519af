#include "sovai/api.hpp"

#include <charconv>
#include <regex>

namespace sovai {

std::string_view apiErrorCodeName(ApiErrorCode code) {
  switch (code) {
    case ApiErrorCode::Validation: return "validation";
    case ApiErrorCode::NotFound: return "not_found";
    case ApiErrorCode::Conflict: return "conflict";
    case ApiErrorCode::SolverFailure: return "solver_failure";
    case ApiErrorCode::Internal: return "internal";
    case ApiErrorCode::Malformed: return "malformed";
  }
  return "internal";
}

int httpStatus(ApiErrorCode code) {
  switch (code) {
    case ApiErrorCode::Validation: return 422;
    case ApiErrorCode::NotFound: return 404;
    case ApiErrorCode::Conflict: return 409;
    case ApiErrorCode::SolverFailure: return 500;
    case ApiErrorCode::Internal: return 500;
    case ApiErrorCode::Malformed: return 400;
  }
  return 500;
}

Json errorJson(const ApiError& e) {
  Json details = Json::array();
  for (const auto& d : e.details()) details.push_back(Json{{"path", d.path}, {"reason", d.reason}});
  return Json{{"error",
               {{"code", std::string(apiErrorCodeName(e.code()))},
                {"message", e.what()},
                {"details", details}}}};
}

namespace {

ApiResponse jsonResponse(int status, const Json& body) {
  return {status, dumpJson(body), {{"Content-Type", "application/json"}}};
}

Json parseBody(const std::string& body) {
  if (body.empty()) return Json::object();
  try {
    return Json::parse(body);
  } catch (const Json::parse_error& e) {
    throw ApiError(ApiErrorCode::Malformed, std::string("malformed JSON: ") + e.what());
  }
}

void requireObject(const Json& body) {
  if (!body.is_object()) {
    throw ApiError(ApiErrorCode::Validation, "request body must be a JSON object",
                   {{"$", "must be an object"}});
  }
}

std::vector<ValidationIssue> prefixed(std::vector<ValidationIssue> issues, const std::string& prefix) {
  for (auto& i : issues) i.path = i.path == "$" ? prefix : prefix + "." + i.path;
  return issues;
}

std::optional<int> parseVersion(std::string text) {
  if (text.rfind("W/", 0) == 0) text.erase(0, 2);
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') text = text.substr(1, text.size() - 2);
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v < 0) return std::nullopt;
  return v;
}

std::optional<int> ifMatch(const ApiRequest& req) {
  auto it = req.headers.find("if-match");
  if (it == req.headers.end()) return std::nullopt;
  auto v = parseVersion(it->second);
  if (!v) {
    throw ApiError(ApiErrorCode::Validation, "If-Match must carry a scenario version",
                   {{"If-Match", "not a version number"}});
  }
  return v;
}

}  // namespace

Service::Service(ScenarioStore& store, SolveOptions solverDefaults)
    : store_(store), defaults_(solverDefaults) {
  defaults_.validate();
}

ApiResponse Service::handle(const ApiRequest& req) const {
  // Returns the scenario named by "scenarioId" or given inline as "scenario".
  auto scenarioFrom = [&](const Json& body) -> Scenario {
    const bool byId = body.contains("scenarioId");
    const bool inlineDoc = body.contains("scenario");
    if (byId == inlineDoc) {
      throw ApiError(ApiErrorCode::Validation, "give exactly one of scenarioId or scenario",
                     {{"scenarioId", "exactly one of scenarioId, scenario is required"}});
    }
    if (byId) {
      if (!body["scenarioId"].is_string()) {
        throw ApiError(ApiErrorCode::Validation, "scenarioId must be a string",
                       {{"scenarioId", "must be a string"}});
      }
      const std::string id = body["scenarioId"].get<std::string>();
      auto s = store_.get(id);
      if (!s) throw ApiError(ApiErrorCode::NotFound, "no scenario '" + id + "'");
      return *s;
    }
    try {
      return loadScenario(body["scenario"]);
    } catch (const ValidationError& e) {
      throw ApiError(ApiErrorCode::Validation, "invalid scenario", prefixed(e.issues(), "scenario"));
    }
  };
  auto modelFrom = [&](const Json& body) -> EconomyModel {
    if (body.contains("model")) {
      if (body.contains("scenario") || body.contains("scenarioId")) {
        throw ApiError(ApiErrorCode::Validation, "give exactly one of model, scenario or scenarioId",
                       {{"model", "conflicts with scenario/scenarioId"}});
      }
      std::vector<ValidationIssue> issues;
      auto m = loadModel(body["model"], issues, "model");
      if (!m) throw ApiError(ApiErrorCode::Validation, "invalid model", issues);
      return *m;
    }
    return scenarioFrom(body).model;
  };
  auto optionsFrom = [&](const Json& body) {
    std::vector<ValidationIssue> issues;
    auto it = body.find("options");
    SolveOptions o = solveOptionsFromJson(it == body.end() ? nullptr : &*it, defaults_, issues);
    if (!issues.empty()) throw ApiError(ApiErrorCode::Validation, "invalid options", issues);
    return o;
  };

  try {
    static const std::regex scenarioPath(R"(^/scenarios/([^/]+)$)");
    static const std::regex dashboardPath(R"(^/scenarios/([^/]+)/dashboard$)");
    std::smatch m;
    const std::string& path = req.path;
    const std::string& method = req.method;

    if (method == "GET" && path == "/healthz") {
      return jsonResponse(200, Json{{"status", "ok"}, {"version", kVersion}});
    }
    if (method == "GET" && path == "/scenarios") {
      Json list = Json::array();
      for (const auto& e : store_.list()) {
        list.push_back(Json{{"id", e.id}, {"name", e.name}, {"version", e.version}});
      }
      return jsonResponse(200, Json{{"scenarios", list}});
    }
    if (std::regex_match(path, m, scenarioPath)) {
      const std::string id = m[1];
      if (method == "GET") {
        auto s = store_.get(id);
        if (!s) throw ApiError(ApiErrorCode::NotFound, "no scenario '" + id + "'");
        ApiResponse r = jsonResponse(200, serializeScenario(*s));
        r.headers["ETag"] = "\"" + std::to_string(s->version) + "\"";
        return r;
      }
      if (method == "PUT") {
        Json body = parseBody(req.body);
        requireObject(body);
        std::optional<int> expected = ifMatch(req);
        if (!expected && body.contains("version") && store_.get(id)) {
          if (auto v = body["version"]; v.is_number_integer()) expected = v.get<int>();
        }
        if (!body.contains("id")) body["id"] = id;
        std::optional<Scenario> s;
        try {
          s = loadScenario(body);
        } catch (const ValidationError& e) {
          throw ApiError(ApiErrorCode::Validation, "invalid scenario", e.issues());
        }
        if (s->id != id) {
          throw ApiError(ApiErrorCode::Validation, "body id does not match the URL",
                         {{"id", "must equal '" + id + "'"}});
        }
        Scenario stored = store_.put(std::move(*s), expected);
        ApiResponse r = jsonResponse(stored.version > 1 ? 200 : 201, serializeScenario(stored));
        r.headers["ETag"] = "\"" + std::to_string(stored.version) + "\"";
        return r;
      }
      if (method == "DELETE") {
        store_.remove(id, ifMatch(req));
        return jsonResponse(200, Json{{"deleted", id}});
      }
    }
    if (method == "POST" && std::regex_match(path, m, dashboardPath)) {
      const std::string id = m[1];
      auto s = store_.get(id);
      if (!s) throw ApiError(ApiErrorCode::NotFound, "no scenario '" + id + "'");
      const Json body = parseBody(req.body);
      requireObject(body);
      std::vector<MetricObservation> obs;
      if (body.contains("observations")) {
        try {
          obs = loadObservations(body["observations"]);
        } catch (const ValidationError& e) {
          throw ApiError(ApiErrorCode::Validation, "invalid observations", prefixed(e.issues(), "observations"));
        }
      }
      std::string period;
      if (auto it = body.find("period"); it != body.end()) {
        if (!it->is_string()) {
          throw ApiError(ApiErrorCode::Validation, "period must be a string", {{"period", "must be a string"}});
        }
        period = it->get<std::string>();
      }
      const DashboardReport report = marginalReturnsDashboard(*s, obs, optionsFrom(body), period);
      return jsonResponse(report.solverFailure ? 500 : 200, toJson(report));
    }

    if (method == "POST") {
      if (path == "/solve") {
        const Json body = parseBody(req.body);
        requireObject(body);
        const SolveOptions opts = optionsFrom(body);
        return jsonResponse(200, toJson(solveJoint(modelFrom(body), opts)));
      }
      if (path == "/openness") {
        const Json body = parseBody(req.body);
        try {
          return jsonResponse(200, toJson(optimalOpenness(opennessFromJson(body))));
        } catch (const ValidationError& e) {
          throw ApiError(ApiErrorCode::Validation, "invalid openness parameters", e.issues());
        }
      }
      if (path == "/gate") {
        const Json body = parseBody(req.body);
        requireObject(body);
        const SolveOptions opts = optionsFrom(body);
        double mu = 0.0;
        EconomyModel model = modelFrom(body);
        if (auto it = body.find("mu"); it != body.end()) {
          if (!it->is_number() || !(it->get<double>() > 0.0)) {
            throw ApiError(ApiErrorCode::Validation, "mu must be > 0", {{"mu", "must be a number > 0"}});
          }
          mu = it->get<double>();
        } else if (!body.contains("model") && scenarioFrom(body).muMode.isExogenous()) {
          mu = scenarioFrom(body).muMode.mu;
        } else {
          throw ApiError(ApiErrorCode::Validation, "mu is required", {{"mu", "required"}});
        }
        return jsonResponse(200, toJson(gateModeAllocation(model, mu, opts), mu, model.alpha()));
      }
      if (path == "/weights/ahp") {
        const Json body = parseBody(req.body);
        try {
          return jsonResponse(200, toJson(ahpWeights(matrixFromJson(body))));
        } catch (const ValidationError& e) {
          throw ApiError(ApiErrorCode::Validation, "invalid matrix", e.issues());
        }
      }
      if (path == "/sensitivity") {
        const Json body = parseBody(req.body);
        requireObject(body);
        const Scenario s = scenarioFrom(body);
        const SolveOptions opts = optionsFrom(body);
        std::vector<ValidationIssue> issues;
        std::string parameter;
        std::vector<double> values;
        if (auto it = body.find("parameter"); it != body.end() && it->is_string()) {
          parameter = it->get<std::string>();
        } else {
          issues.push_back({"parameter", "required string"});
        }
        if (auto it = body.find("values"); it != body.end() && it->is_array()) {
          for (std::size_t i = 0; i < it->size(); ++i) {
            if ((*it)[i].is_number()) {
              values.push_back((*it)[i].get<double>());
            } else {
              issues.push_back({"values[" + std::to_string(i) + "]", "must be a number"});
            }
          }
        } else {
          issues.push_back({"values", "required array of numbers"});
        }
        if (!issues.empty()) throw ApiError(ApiErrorCode::Validation, "invalid sweep", issues);
        try {
          return jsonResponse(200, toJson(sensitivity(s, parameter, values, opts)));
        } catch (const ValidationError& e) {
          throw ApiError(ApiErrorCode::Validation, "invalid sweep", e.issues());
        }
      }
      if (path == "/checklist") {
        const Json body = parseBody(req.body);
        requireObject(body);
        return jsonResponse(200, toJson(evaluateChecklist(scenarioFrom(body).checklist)));
      }
      if (path == "/oracle") {
        const Json body = parseBody(req.body);
        requireObject(body);
        int resolution = defaults_.oracleResolution;
        if (auto it = body.find("resolution"); it != body.end()) {
          if (!it->is_number_integer()) {
            throw ApiError(ApiErrorCode::Validation, "resolution must be an integer",
                           {{"resolution", "must be an integer"}});
          }
          resolution = it->get<int>();
        }
        return jsonResponse(200, toJson(gridOracle(modelFrom(body), resolution)));
      }
      if (path == "/compare") {
        const Json body = parseBody(req.body);
        requireObject(body);
        auto side = [&](const char* name) {
          auto it = body.find(name);
          if (it == body.end() || !it->is_object()) {
            throw ApiError(ApiErrorCode::Validation, std::string(name) + " is required",
                           {{name, "required object { scenarioId } or { scenario }"}});
          }
          try {
            return scenarioFrom(*it);
          } catch (ApiError& e) {
            if (e.code() != ApiErrorCode::Validation) throw;
            throw ApiError(e.code(), e.what(), prefixed(e.details(), name));
          }
        };
        const Scenario a = side("a");
        const Scenario b = side("b");
        return jsonResponse(200, toJson(compareScenarios(a, b, optionsFrom(body))));
      }
    }
    throw ApiError(ApiErrorCode::NotFound, "no route for " + method + " " + path);
  } catch (const ApiError& e) {
    return jsonResponse(httpStatus(e.code()), errorJson(e));
  } catch (const ValidationError& e) {
    return jsonResponse(422, errorJson(ApiError(ApiErrorCode::Validation, e.what(), e.issues())));
  } catch (const DomainError& e) {
    return jsonResponse(422, errorJson(ApiError(ApiErrorCode::Validation, e.what(), {{"$", e.what()}})));
  } catch (const SolverFailure& e) {
    Json j = errorJson(ApiError(ApiErrorCode::SolverFailure, e.what()));
    j["error"]["bestIterate"] = toJson(e.bestIterate());
    return jsonResponse(500, j);
  } catch (const std::exception& e) {
    return jsonResponse(500, errorJson(ApiError(ApiErrorCode::Internal, e.what())));
  }
}

}  // namespace sovai
