#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "helm/error.hpp"
#include "helm/session.hpp"

namespace helm::service {

inline constexpr int kDefaultPort = 8642;

struct Response {
  int status = 200;
  std::string body;  // JSON
};

// HTTP status for an engine or session error code.
int http_status(ErrorCode code);
// {"error": {"code", "message"}}
Response error_response(int status, std::string_view code, std::string_view message);

// Session registry plus request routing. Independent of the HTTP transport so
// it can be driven directly in tests.
class Service {
 public:
  // Models are `<name>.json` feature models in `models_dir`, compiled on first use.
  explicit Service(std::filesystem::path models_dir);

  Response handle(std::string_view method, std::string_view path, std::string_view body);

  std::vector<std::string> model_names() const;
  // One `<id>.json` journal per session plus `sessions.json` naming each
  // session's model and engine.
  void persist(const std::filesystem::path& dir) const;
  std::size_t session_count() const;

 private:
  struct Slot {
    Slot(std::string m, session::Session s) : model(std::move(m)), session(std::move(s)) {}
    std::mutex mutex;
    std::string model;
    session::Session session;
  };

  Response create_session(std::string_view body);
  Response session_request(const std::string& id, std::string_view method,
                           std::string_view action, std::string_view body);
  std::shared_ptr<const session::CompiledModel> model(const std::string& name);
  std::shared_ptr<Slot> slot(const std::string& id) const;

  std::filesystem::path models_dir_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<const session::CompiledModel>> models_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

struct ServeConfig {
  std::string host = "127.0.0.1";
  int port = kDefaultPort;  // 0 picks a free port
  std::filesystem::path models_dir = ".";
  std::filesystem::path journal_dir;  // empty: nothing persisted
};

// Blocking HTTP server. `on_listen` receives the bound port; `stop` (set by
// the caller) ends the loop. Journals are written after the loop ends.
class Server {
 public:
  explicit Server(ServeConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds, calls on_listen(port), then serves until stop().
  void run(const std::function<void(int)>& on_listen = {});
  void stop();
  Service& service() { return service_; }

 private:
  struct Impl;
  ServeConfig config_;
  Service service_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace helm::service
