#include "sovai/api.hpp"

#include "httplib.h"

#include <algorithm>
#include <chrono>
#include <cctype>
#include <mutex>
#include <ostream>

namespace sovai {

struct HttpServer::Impl {
  const Service& service;
  ServiceConfig config;
  std::ostream& log;
  std::mutex logMutex;
  httplib::Server server;

  Impl(const Service& s, const ServiceConfig& c, std::ostream& l) : service(s), config(c), log(l) {}

  void route(const httplib::Request& req, httplib::Response& res) {
    const auto start = std::chrono::steady_clock::now();
    ApiRequest r{req.method, req.path, req.body, {}};
    for (const auto& [name, value] : req.headers) {
      std::string lower = name;
      std::transform(lower.begin(), lower.end(), lower.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      r.headers[lower] = value;
    }
    const ApiResponse out = service.handle(r);
    res.status = out.status;
    for (const auto& [name, value] : out.headers) {
      if (name != "Content-Type") res.set_header(name, value);
    }
    res.set_content(out.body, "application/json");
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    char line[64];
    std::snprintf(line, sizeof line, "%d %.1fms", out.status, ms);
    std::lock_guard lock(logMutex);
    log << req.method << " " << req.path << " " << line << std::endl;
  }
};

HttpServer::HttpServer(const Service& service, const ServiceConfig& config, std::ostream& log)
    : impl_(std::make_unique<Impl>(service, config, log)) {
  auto& s = impl_->server;
  const auto timeout = std::chrono::seconds(config.timeoutSeconds);
  s.set_read_timeout(timeout);
  s.set_write_timeout(timeout);
  s.set_keep_alive_timeout(5);
  auto handler = [this](const httplib::Request& req, httplib::Response& res) { impl_->route(req, res); };
  s.Get(".*", handler);
  s.Post(".*", handler);
  s.Put(".*", handler);
  s.Delete(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& s = impl_->server;
  if (impl_->config.port == 0) return s.bind_to_any_port(impl_->config.host);
  return s.bind_to_port(impl_->config.host, impl_->config.port) ? impl_->config.port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace sovai
