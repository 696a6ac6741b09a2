#pragma once

#include <memory>
#include <string>

#include "dvf/api.hpp"

namespace dvf {

/// Serves an AnalystApi over HTTP. JSON bodies; CORS open for a local UI.
class HttpServer {
 public:
  explicit HttpServer(AnalystApi& api);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port; throws std::runtime_error on failure.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace dvf
