#include "dvf/http_server.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <stdexcept>

namespace dvf {

struct HttpServer::Impl {
  explicit Impl(AnalystApi& a) : api(a) {}
  AnalystApi& api;
  httplib::Server server;
};

namespace {

void forward(AnalystApi& api, const httplib::Request& req, httplib::Response& res) {
  ApiRequest request;
  request.method = req.method;
  request.path = req.path;
  for (const auto& [key, value] : req.params) request.query.emplace(key, value);
  request.body = req.body;
  const auto response = api.handle(request);
  res.status = response.status;
  res.set_content(response.body, "application/json; charset=utf-8");
}

}  // namespace

HttpServer::HttpServer(AnalystApi& api) : impl_(std::make_unique<Impl>(api)) {
  auto& server = impl_->server;
  // SO_REUSEADDR without SO_REUSEPORT.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    forward(impl_->api, req, res);
  };
  server.Get(R"(/api/.*)", handler);
  server.Post(R"(/api/.*)", handler);
  server.Put(R"(/api/.*)", handler);
  server.Delete(R"(/api/.*)", handler);
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const nlohmann::json body{{"code", "not_found"}, {"message", "no route for " + req.path}};
    res.set_content(body.dump(), "application/json; charset=utf-8");
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

bool HttpServer::running() const { return impl_->server.is_running(); }

}  // namespace dvf
