#include "helm/service.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "evidence_json.hpp"
#include "helm/serialize.hpp"
#include "httplib.h"
#include "json_util.hpp"

namespace helm::service {

using detail::Json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kInvalidArgument:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kSessionStopped:
    case ErrorCode::kStaleRead:
      return 409;
    case ErrorCode::kTooLarge:
      return 413;
    case ErrorCode::kNonConvergence:
      return 500;
    case ErrorCode::kValidation:
    case ErrorCode::kUnknownNode:
    case ErrorCode::kUnknownState:
    case ErrorCode::kInvalidEvidence:
    case ErrorCode::kInconsistentEvidence:
    case ErrorCode::kInvalidLink:
    case ErrorCode::kNotAskable:
    case ErrorCode::kAlreadyAnswered:
      return 422;
  }
  return 500;
}

Response error_response(int status, std::string_view code, std::string_view message) {
  Json body{{"error", Json{{"code", std::string(code)}, {"message", std::string(message)}}}};
  return {status, body.dump()};
}

namespace {

Response ok(const Json& body, int status = 200) { return {status, body.dump()}; }

Json parse_body(std::string_view body) {
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos) return Json::object();
  Json doc = detail::parse(body);
  if (!doc.is_object()) detail::schema_error("body", "must be a JSON object");
  return doc;
}

std::vector<std::string> split_path(std::string_view path) {
  if (auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto end = std::min(path.find('/', start), path.size());
    if (end > start) parts.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

Json ranking_json(const session::Session& s) {
  Json rows = Json::array();
  std::size_t rank = 1;
  for (const auto& r : s.ranking()) {
    rows.push_back(Json{{"class", r.id}, {"probability", r.probability}, {"rank", rank++}});
  }
  return rows;
}

Json journal_json(const session::Session& s) {
  Json rows = Json::array();
  for (const auto& e : s.journal()) {
    rows.push_back(Json{{"seq", e.seq},
                        {"node", e.evidence.node},
                        {"form", e.evidence.form_name()},
                        {"value", detail::evidence_value(e.evidence)},
                        {"source", session::source_name(e.source)}});
  }
  return rows;
}

Json session_json(const std::string& model, const session::Session& s) {
  return Json{{"id", s.id()},
              {"model", model},
              {"engine", session::engine_name(s.engine())},
              {"status", s.status().to_string()},
              {"ranking", ranking_json(s)},
              {"journal", journal_json(s)},
              {"unanswered", s.unanswered()}};
}

Json merits_json(const session::Session& s) {
  Json rows = Json::array();
  for (const auto& m : s.merits()) {
    rows.push_back(
        Json{{"question", m.question}, {"delta_p", m.delta_p}, {"cost", m.cost}, {"merit", m.merit}});
  }
  return Json{{"target", s.ranking().front().id}, {"merits", std::move(rows)}};
}

Json question_json(const session::Session& s) {
  if (!s.status().active) return Json{{"question", nullptr}, {"status", s.status().to_string()}};
  const auto question = s.ask();
  if (!question) return Json{{"question", nullptr}, {"status", s.status().to_string()}};
  double value = 0.0;
  for (const auto& m : s.merits()) {
    if (m.question == *question) value = m.merit;
  }
  return Json{{"question", *question}, {"states", s.answers(*question)}, {"merit", value}};
}

Json beliefs_json(const session::Session& s) {
  Json out = Json::object();
  for (const auto& [node, belief] : s.beliefs()) {
    std::vector<std::string> states;
    if (const auto* b = s.bms_state()) {
      states = b->network().node(b->network().require(node)).states;
    } else {
      states = {"true", "false"};
    }
    out[node] = Json{{"states", states}, {"belief", belief}};
  }
  return Json{{"beliefs", std::move(out)}};
}

}  // namespace

Service::Service(std::filesystem::path models_dir) : models_dir_(std::move(models_dir)) {}

std::vector<std::string> Service::model_names() const {
  std::vector<std::string> names;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(models_dir_, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      names.push_back(entry.path().stem().string());
    }
  }
  std::sort(names.begin(), names.end());
  return names;
}

std::shared_ptr<const session::CompiledModel> Service::model(const std::string& name) {
  std::lock_guard lock(registry_mutex_);
  if (auto it = models_.find(name); it != models_.end()) return it->second;
  const auto names = model_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    throw Error(ErrorCode::kNotFound, "model '" + name + "' not found");
  }
  auto features = load_feature_model(read_file((models_dir_ / (name + ".json")).string()));
  auto compiled = session::CompiledModel::compile(name, std::move(features));
  models_.emplace(name, compiled);
  return compiled;
}

std::shared_ptr<Service::Slot> Service::slot(const std::string& id) const {
  std::lock_guard lock(registry_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "session '" + id + "' not found");
  return it->second;
}

std::size_t Service::session_count() const {
  std::lock_guard lock(registry_mutex_);
  return sessions_.size();
}

Response Service::create_session(std::string_view body) {
  const Json doc = parse_body(body);
  const auto name = detail::get<std::string>(detail::field(doc, "model", "body"), "body.model");
  std::string engine = "bms";
  if (const auto* e = detail::optional_field(doc, "engine")) {
    engine = detail::get<std::string>(*e, "body.engine");
  }
  session::Options options;
  if (const auto* t = detail::optional_field(doc, "confidence_threshold")) {
    options.confidence_threshold = detail::get<double>(*t, "body.confidence_threshold");
  }
  const auto kind = session::parse_engine(engine);
  auto s = std::make_shared<Slot>(name, session::Session::start(model(name), kind, {}, options));
  const Json view = session_json(name, s->session);
  {
    std::lock_guard lock(registry_mutex_);
    sessions_.emplace(s->session.id(), s);
  }
  return ok(view, 201);
}

Response Service::session_request(const std::string& id, std::string_view method,
                                  std::string_view action, std::string_view body) {
  auto s = slot(id);
  std::lock_guard lock(s->mutex);
  auto& session = s->session;
  if (method == "GET") {
    if (action.empty()) return ok(session_json(s->model, session));
    if (action == "question") return ok(question_json(session));
    if (action == "ranking") return ok(Json{{"ranking", ranking_json(session)}});
    if (action == "beliefs") return ok(beliefs_json(session));
    if (action == "merits") return ok(merits_json(session));
  } else if (method == "POST") {
    if (action == "evidence") {
      const Json doc = parse_body(body);
      const Evidence evidence = detail::evidence_from_json(doc, "body");
      session::Source source = session::Source::kVolunteered;
      if (const auto* src = detail::optional_field(doc, "source")) {
        source = session::parse_source(detail::get<std::string>(*src, "body.source"));
      }
      session.post(evidence, source);
      return ok(session_json(s->model, session));
    }
    if (action == "stop") {
      const Json doc = parse_body(body);
      // {"threshold": t} or {"check": true} applies the stop criteria;
      // anything else is an operator stop.
      const auto* threshold = detail::optional_field(doc, "threshold");
      const auto* check = detail::optional_field(doc, "check");
      if (threshold) {
        session.stop_check(detail::get<double>(*threshold, "body.threshold"));
      } else if (check && detail::get<bool>(*check, "body.check")) {
        session.stop_check();
      } else {
        session.stop();
      }
      return ok(session_json(s->model, session));
    }
  }
  return error_response(404, "not-found",
                        std::string(method) + " /sessions/" + id + "/" + std::string(action));
}

Response Service::handle(std::string_view method, std::string_view path, std::string_view body) {
  try {
    const auto parts = split_path(path);
    if (parts.size() == 1 && parts[0] == "models" && method == "GET") {
      return ok(Json{{"models", model_names()}});
    }
    if (!parts.empty() && parts[0] == "sessions") {
      if (parts.size() == 1 && method == "POST") return create_session(body);
      if (parts.size() == 2) return session_request(parts[1], method, "", body);
      if (parts.size() == 3) return session_request(parts[1], method, parts[2], body);
    }
    return error_response(404, "not-found", std::string(method) + " " + std::string(path));
  } catch (const Error& e) {
    return error_response(http_status(e.code()), code_name(e.code()), e.what());
  } catch (const std::exception& e) {
    return error_response(500, "internal", e.what());
  }
}

void Service::persist(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::map<std::string, std::shared_ptr<Slot>> sessions;
  {
    std::lock_guard lock(registry_mutex_);
    sessions = sessions_;
  }
  Json index = Json::array();
  for (const auto& [id, s] : sessions) {
    std::lock_guard lock(s->mutex);
    write_file((dir / (id + ".json")).string(), session::export_journal(s->session.journal()));
    index.push_back(Json{{"id", id},
                         {"model", s->model},
                         {"engine", session::engine_name(s->session.engine())},
                         {"status", s->session.status().to_string()},
                         {"journal", id + ".json"}});
  }
  write_file((dir / "sessions.json").string(), index.dump(2) + "\n");
}

struct Server::Impl {
  httplib::Server http;
};

Server::Server(ServeConfig config)
    : config_(std::move(config)), service_(config_.models_dir), impl_(std::make_unique<Impl>()) {
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const Response out = service_.handle(req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json; charset=utf-8");
  };
  impl_->http.Get(".*", route);
  impl_->http.Post(".*", route);
}

Server::~Server() = default;

void Server::run(const std::function<void(int)>& on_listen) {
  int port = config_.port;
  if (port == 0) {
    port = impl_->http.bind_to_any_port(config_.host);
  } else if (!impl_->http.bind_to_port(config_.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "cannot listen on " + config_.host + ":" + std::to_string(config_.port));
  }
  if (on_listen) on_listen(port);
  impl_->http.listen_after_bind();
  if (!config_.journal_dir.empty()) service_.persist(config_.journal_dir);
}

void Server::stop() { impl_->http.stop(); }

}  // namespace helm::service
