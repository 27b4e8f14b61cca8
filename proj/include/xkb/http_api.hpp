#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "xkb/session.hpp"

namespace xkb {

struct ApiResponse {
  int status = 200;
  Json body;
};

/// Routes one request of the session API. Never throws: errors become
/// 400 (parse or validation, with line/column/expected for rule text),
/// 404, 405, 409, 422 (limits and logical preconditions) or 500.
ApiResponse handle_request(SessionStore& store, const std::string& method,
                           const std::string& path, const std::string& body);

/// HTTP front end for handle_request.
class HttpServer {
 public:
  explicit HttpServer(SessionStore& store);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds `host:port` (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop() is called.
  void listen();
  /// Blocks until a concurrent listen() accepts connections.
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace xkb
