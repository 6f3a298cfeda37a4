#pragma once

#include <memory>
#include <string>

#include "graphchain/orchestrator.hpp"

namespace httplib {
class Server;
}

namespace graphchain {

// JSON-over-HTTP front end for an Orchestrator.
//
// Error mapping: parse, validation and planning failures are 400 (parse
// errors carry "line"), unknown ids 404, wrong session status 409.
class HttpService {
 public:
  explicit HttpService(Orchestrator& orchestrator);
  ~HttpService();

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Returns the bound port; port 0 picks a free one.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void serve();
  void stop();

 private:
  void routes();

  Orchestrator& orchestrator_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace graphchain
