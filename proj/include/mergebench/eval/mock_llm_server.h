#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace mergebench {

// Local chat-completions endpoint serving recorded responses. A request for
// model "<name>" is answered with the body of <fixture_dir>/<name>.json;
// unknown names get 404. The first `fail_first` requests get 503.
class MockLlmServer {
 public:
  explicit MockLlmServer(std::filesystem::path fixture_dir, int fail_first = 0);
  ~MockLlmServer();
  MockLlmServer(const MockLlmServer&) = delete;
  MockLlmServer& operator=(const MockLlmServer&) = delete;

  int port() const { return port_; }
  // "http://127.0.0.1:<port>/v1"
  std::string base_url() const;
  int requests() const { return requests_.load(); }
  std::string last_authorization() const;
  std::string last_body() const;

 private:
  std::filesystem::path dir_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> fail_first_;
  std::atomic<int> requests_{0};
  mutable std::mutex mu_;
  std::string last_auth_, last_body_;
};

}  // namespace mergebench
