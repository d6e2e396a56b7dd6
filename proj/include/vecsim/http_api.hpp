#pragma once

#include <memory>
#include <string>
#include <thread>

#include "vecsim/engine.hpp"

namespace httplib {
class Server;
}

namespace vecsim {

// JSON-over-HTTP status/control endpoint. Runs on its own thread; everything
// it does goes through the engine's thread-safe control surface.
class HttpEndpoint {
public:
  explicit HttpEndpoint(Engine& eng);
  ~HttpEndpoint();

  HttpEndpoint(const HttpEndpoint&) = delete;
  HttpEndpoint& operator=(const HttpEndpoint&) = delete;

  // addr is "host:port"; port 0 picks a free one. Returns false on bind failure.
  bool start(const std::string& addr);
  void stop();

  int port() const { return port_; }
  const std::string& host() const { return host_; }

private:
  Engine& eng_;
  std::unique_ptr<httplib::Server> srv_;
  std::thread thread_;
  std::string host_;
  int port_ = -1;
};

}  // namespace vecsim
