#include "quakedrill/http_server.hpp"

#include <httplib.h>

namespace quakedrill::service {

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

Json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    return Json::parse(req.body);
}

using Handler = std::function<Json(const httplib::Request&)>;

// Maps service errors onto status codes with a {code, message} body.
httplib::Server::Handler wrap(Handler handler, int ok_status = 200) {
    return [handler = std::move(handler), ok_status](const httplib::Request& req, httplib::Response& res) {
        try {
            send_json(res, ok_status, handler(req));
        } catch (const ServiceError& e) {
            send_json(res, e.http_status(), {{"code", e.code()}, {"message", e.what()}});
        } catch (const Json::parse_error& e) {
            send_json(res, 422, {{"code", "invalid_json"}, {"message", e.what()}});
        } catch (const std::exception& e) {
            send_json(res, 500, {{"code", "internal_error"}, {"message", e.what()}});
        }
    };
}

std::optional<std::string> query(const httplib::Request& req, const char* key) {
    if (!req.has_param(key)) return std::nullopt;
    auto value = req.get_param_value(key);
    if (value.empty()) return std::nullopt;
    return value;
}

}  // namespace

HttpServer::HttpServer(Service& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
    auto& s = *server_;
    auto& svc = service_;
    s.Post("/participants", wrap([&svc](const auto& req) { return svc.create_participant(parse_body(req)); }, 201));
    s.Post("/sessions", wrap([&svc](const auto& req) { return svc.create_session(parse_body(req)); }, 201));
    s.Get(R"(/sessions/([^/]+)/state)", wrap([&svc](const auto& req) { return svc.get_state(req.matches[1]); }));
    s.Post(R"(/sessions/([^/]+)/choice)",
           wrap([&svc](const auto& req) { return svc.post_choice(req.matches[1], parse_body(req)); }));
    s.Get(R"(/sessions/([^/]+)/assessment)",
          wrap([&svc](const auto& req) { return svc.get_assessment(req.matches[1]); }));
    s.Post(R"(/participants/([^/]+)/questionnaire)",
           wrap([&svc](const auto& req) { return svc.submit_questionnaire(req.matches[1], parse_body(req)); }));
    s.Post(R"(/participants/([^/]+)/knowledge)",
           wrap([&svc](const auto& req) { return svc.submit_knowledge(req.matches[1], parse_body(req)); }));
    s.Get("/analysis/cohort", wrap([&svc](const auto& req) {
              return svc.get_cohort_analysis(query(req, "group"), query(req, "measure"));
          }));
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
        return port_ > 0;
    }
    if (!server_->bind_to_port(host, port)) return false;
    port_ = port;
    return true;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
    if (server_->is_running()) server_->stop();
}

}  // namespace quakedrill::service
