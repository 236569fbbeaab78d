#include "mergebench/eval/mock_llm_server.h"

#include <httplib.h>
#include <json.hpp>

#include "mergebench/core/errors.h"
#include "mergebench/core/io.h"

namespace mergebench {

MockLlmServer::MockLlmServer(std::filesystem::path fixture_dir, int fail_first)
    : dir_(std::move(fixture_dir)), server_(std::make_unique<httplib::Server>()), fail_first_(fail_first) {
  server_->Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    {
      std::lock_guard<std::mutex> lock(mu_);
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
    }
    if (fail_first_.load() > 0) {
      --fail_first_;
      res.status = 503;
      return;
    }
    std::string model;
    try {
      model = nlohmann::json::parse(req.body).at("model").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      res.status = 400;
      return;
    }
    const auto path = dir_ / (model + ".json");
    if (model.find('/') != std::string::npos || !std::filesystem::exists(path)) {
      res.status = 404;
      return;
    }
    res.set_content(read_file(path), "application/json");
  });
  port_ = server_->bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw TransportError("mock server could not bind");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

MockLlmServer::~MockLlmServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockLlmServer::base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

std::string MockLlmServer::last_authorization() const {
  std::lock_guard<std::mutex> lock(mu_);
  return last_auth_;
}

std::string MockLlmServer::last_body() const {
  std::lock_guard<std::mutex> lock(mu_);
  return last_body_;
}

}  // namespace mergebench
