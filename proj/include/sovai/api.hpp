#pragma once

// Service boundary: scenario persistence, request dispatch for the HTTP JSON
// API, and the command-line front end. Both front ends encode results with
// json_codec, so a CLI --json result and the matching endpoint agree byte for
// byte.

#include "sovai/json_codec.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace sovai {

inline constexpr const char* kVersion = SOVAI_VERSION;

enum class ApiErrorCode { Validation, NotFound, Conflict, SolverFailure, Internal, Malformed };

std::string_view apiErrorCodeName(ApiErrorCode code);

/// 422, 404, 409, 500, 500 and 400 (malformed JSON).
int httpStatus(ApiErrorCode code);

class ApiError : public std::runtime_error {
 public:
  ApiError(ApiErrorCode code, const std::string& message, std::vector<ValidationIssue> details = {})
      : std::runtime_error(message), code_(code), details_(std::move(details)) {}

  ApiErrorCode code() const { return code_; }
  const std::vector<ValidationIssue>& details() const { return details_; }

 private:
  ApiErrorCode code_;
  std::vector<ValidationIssue> details_;
};

/// { "error": { code, message, details: [{ path, reason }] } }
Json errorJson(const ApiError& e);

/// One "<id>.json" scenario document per id under a root directory. Writes
/// are serialized and atomic (temp file + rename); readers only ever see
/// committed versions.
class ScenarioStore {
 public:
  struct Entry {
    std::string id;
    std::string name;
    int version = 0;
    std::filesystem::path file;
  };

  /// Creates the directory if needed and indexes the documents found there.
  /// Unreadable documents are skipped and listed in skipped().
  explicit ScenarioStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  const std::vector<std::string>& skipped() const { return skipped_; }

  std::vector<Entry> list() const;
  std::optional<Scenario> get(const std::string& id) const;

  /// Create or compare-and-set update. A new id is stored at version 1 (an
  /// expected version, if given, must be 0). An existing id requires
  /// expectedVersion == current version and is stored at current + 1.
  /// Throws ApiError(Conflict) otherwise.
  Scenario put(Scenario scenario, std::optional<int> expectedVersion);

  /// Throws ApiError(NotFound) or ApiError(Conflict) on a version mismatch.
  void remove(const std::string& id, std::optional<int> expectedVersion);

  /// Stores each scenario whose id is not present yet.
  void seed(const std::vector<Scenario>& scenarios);

 private:
  std::filesystem::path fileFor(const std::string& id) const;
  void writeAtomically(const Scenario& s) const;

  std::filesystem::path root_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, Scenario> scenarios_;
  std::vector<std::string> skipped_;
};

struct ApiRequest {
  std::string method;
  std::string path;
  std::string body;
  std::map<std::string, std::string> headers;  ///< lower-case names
};

struct ApiResponse {
  int status = 200;
  std::string body;
  std::map<std::string, std::string> headers;
};

/// Transport-independent request handling; the HTTP server is a thin adapter.
class Service {
 public:
  Service(ScenarioStore& store, SolveOptions solverDefaults = {});

  ApiResponse handle(const ApiRequest& request) const;

 private:
  ScenarioStore& store_;
  SolveOptions defaults_;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  ///< 0 picks a free port
  std::filesystem::path storePath = "scenarios";
  SolveOptions solverDefaults;
  int timeoutSeconds = 30;
  bool seedBuiltins = true;
};

/// HTTP/1.1 front end over Service. Logs one line per request to `log`:
/// method, path, status, duration.
class HttpServer {
 public:
  HttpServer(const Service& service, const ServiceConfig& config, std::ostream& log);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and returns the port, or -1 on failure.
  int bind();
  /// Blocks until stop().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Command-line entry point. Exit codes: 0 success, 1 validation or usage
/// error, 2 solver failure.
int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sovai
