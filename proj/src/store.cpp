#include "sovai/api.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <system_error>

namespace sovai {

namespace fs = std::filesystem;

ScenarioStore::ScenarioStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    try {
      Scenario s = loadScenarioFile(entry.path().string());
      if (entry.path().stem().string() != s.id) {
        skipped_.push_back(entry.path().string() + ": id '" + s.id + "' does not match file name");
        continue;
      }
      scenarios_.emplace(s.id, std::move(s));
    } catch (const std::exception& e) {
      skipped_.push_back(entry.path().string() + ": " + e.what());
    }
  }
}

fs::path ScenarioStore::fileFor(const std::string& id) const { return root_ / (id + ".json"); }

void ScenarioStore::writeAtomically(const Scenario& s) const {
  static std::atomic<unsigned long> counter{0};
  const fs::path target = fileFor(s.id);
  const fs::path tmp = root_ / ("." + s.id + ".tmp" + std::to_string(counter++));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << dumpScenario(s);
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw ApiError(ApiErrorCode::Internal, "cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw ApiError(ApiErrorCode::Internal, "cannot replace " + target.string());
  }
}

std::vector<ScenarioStore::Entry> ScenarioStore::list() const {
  std::shared_lock lock(mutex_);
  std::vector<Entry> out;
  for (const auto& [id, s] : scenarios_) out.push_back({id, s.name, s.version, fileFor(id)});
  return out;
}

std::optional<Scenario> ScenarioStore::get(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = scenarios_.find(id);
  if (it == scenarios_.end()) return std::nullopt;
  return it->second;
}

Scenario ScenarioStore::put(Scenario scenario, std::optional<int> expectedVersion) {
  std::unique_lock lock(mutex_);
  auto it = scenarios_.find(scenario.id);
  if (it == scenarios_.end()) {
    if (expectedVersion && *expectedVersion != 0) {
      throw ApiError(ApiErrorCode::Conflict, "scenario '" + scenario.id + "' does not exist; expected version " +
                                                 std::to_string(*expectedVersion));
    }
    scenario.version = 1;
  } else {
    const int current = it->second.version;
    if (!expectedVersion) {
      throw ApiError(ApiErrorCode::Conflict, "scenario '" + scenario.id +
                                                 "' exists; an update must name its base version (current " +
                                                 std::to_string(current) + ")");
    }
    if (*expectedVersion != current) {
      throw ApiError(ApiErrorCode::Conflict, "stale version " + std::to_string(*expectedVersion) +
                                                 " for scenario '" + scenario.id + "' (current " +
                                                 std::to_string(current) + ")");
    }
    scenario.version = current + 1;
  }
  writeAtomically(scenario);
  scenarios_.insert_or_assign(scenario.id, scenario);
  return scenario;
}

void ScenarioStore::remove(const std::string& id, std::optional<int> expectedVersion) {
  std::unique_lock lock(mutex_);
  auto it = scenarios_.find(id);
  if (it == scenarios_.end()) throw ApiError(ApiErrorCode::NotFound, "no scenario '" + id + "'");
  if (expectedVersion && *expectedVersion != it->second.version) {
    throw ApiError(ApiErrorCode::Conflict, "stale version " + std::to_string(*expectedVersion) +
                                               " for scenario '" + id + "' (current " +
                                               std::to_string(it->second.version) + ")");
  }
  std::error_code ec;
  fs::remove(fileFor(id), ec);
  if (ec) throw ApiError(ApiErrorCode::Internal, "cannot delete " + fileFor(id).string());
  scenarios_.erase(it);
}

void ScenarioStore::seed(const std::vector<Scenario>& scenarios) {
  for (const auto& s : scenarios) {
    if (get(s.id)) continue;
    try {
      put(s, std::nullopt);
    } catch (const ApiError& e) {
      if (e.code() != ApiErrorCode::Conflict) throw;
    }
  }
}

}  // namespace sovai
