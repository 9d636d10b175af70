#include <httplib.h>
#include <spdlog/spdlog.h>

#include "kimatch/error.hpp"
#include "kimatch/gateway.hpp"

namespace kimatch::gateway {

using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownSS:
    case ErrorCode::UnknownSP: return 404;
    case ErrorCode::SPBusy:
    case ErrorCode::NotRecommended: return 409;
    case ErrorCode::FormatError: return 400;
    case ErrorCode::BadConfidence:
    case ErrorCode::RejectedNotSS:
    case ErrorCode::InvalidArgument:
    case ErrorCode::EmptyText:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::MissingComponent: return 422;
    case ErrorCode::NoModel:
    case ErrorCode::NoIdleSP:
    case ErrorCode::BackendUnavailable:
    case ErrorCode::EmbedderUnavailable: return 503;
    default: return 500;
  }
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"code", code}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
  try {
    auto j = json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorCode::FormatError, "request body must be a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::FormatError, std::string("malformed JSON: ") + e.what());
  }
}

std::string required_string(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) throw Error(ErrorCode::FormatError, std::string("missing field: ") + key);
  return j[key].get<std::string>();
}

}  // namespace

struct HttpServer::Impl {
  MatchService& service;
  HttpOptions options;
  httplib::Server server;

  Impl(MatchService& s, HttpOptions o) : service(s), options(std::move(o)) {}

  // Wraps a handler with authentication and error mapping.
  httplib::Server::Handler guarded(std::function<void(const httplib::Request&, httplib::Response&)> fn,
                                   bool open = false) {
    return [this, fn = std::move(fn), open](const httplib::Request& req, httplib::Response& res) {
      if (!open && !options.moderator_token.empty() &&
          req.get_header_value("Authorization") != "Bearer " + options.moderator_token) {
        send_error(res, 401, "Unauthorized", "missing or invalid moderator token");
        return;
      }
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, http_status(e.code()), to_string(e.code()), e.what());
      } catch (const json::exception& e) {
        send_error(res, 400, "FormatError", e.what());
      } catch (const std::exception& e) {
        spdlog::error("{} {} failed: {}", req.method, req.path, e.what());
        send_error(res, 500, "Internal", e.what());
      }
    };
  }

  void routes() {
    server.Get("/healthz", guarded(
                               [this](const httplib::Request&, httplib::Response& res) {
                                 send_json(res, 200,
                                           {{"status", "ok"},
                                            {"model_loaded", service.has_model()},
                                            {"providers", service.providers().size()},
                                            {"last_seq", service.last_seq()}});
                               },
                               true));

    server.Get("/queue", guarded([this](const httplib::Request&, httplib::Response& res) {
                 json items = json::array();
                 for (const auto& r : service.queue()) items.push_back(to_json(r));
                 send_json(res, 200, {{"queue", std::move(items)}});
               }));

    server.Post("/queue", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  const auto pos = service.enqueue_ss(required_string(body, "id"), body.value("user_id", std::string()),
                                                      required_string(body, "text"));
                  send_json(res, 200, {{"id", body["id"]}, {"position", pos}});
                }));

    server.Get(R"(/ss/([^/]+)/recommendations)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 int k = 0;
                 if (req.has_param("k")) {
                   try {
                     k = std::stoi(req.get_param_value("k"));
                   } catch (const std::exception&) {
                     throw Error(ErrorCode::FormatError, "k must be an integer");
                   }
                   if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be at least 1");
                 }
                 send_json(res, 200, to_json(service.recommend(req.matches[1].str(), k)));
               }));

    server.Get(R"(/ss/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 200, to_json(service.ss(req.matches[1].str())));
               }));

    server.Post("/matches/confirm", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto body = parse_body(req);
                  const auto ss_id = required_string(body, "ss_id");
                  const auto sp_id = required_string(body, "sp_id");
                  service.confirm_match(ss_id, sp_id, body.value("moderator", std::string()));
                  send_json(res, 200, {{"ss_id", ss_id}, {"sp_id", sp_id}, {"status", "confirmed"}});
                }));

    server.Post(R"(/sps/([^/]+)/release)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto sp_id = req.matches[1].str();
                  send_json(res, 200, {{"sp_id", sp_id}, {"released", service.release(sp_id)}});
                }));

    server.Get("/stats/idle", guarded([this](const httplib::Request&, httplib::Response& res) {
                 send_json(res, 200, to_json(service.idle_stats()));
               }));

    server.Post("/feedback", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const auto seq = service.record_feedback(feedback_from_json(parse_body(req)));
                  send_json(res, 200, {{"seq", seq}});
                }));

    server.Get("/feedback/aggregate", guarded([this](const httplib::Request&, httplib::Response& res) {
                 send_json(res, 200, {{"cohorts", to_json(service.aggregate_feedback())}});
               }));

    if (!options.console_dir.empty() && !server.set_mount_point("/", options.console_dir))
      spdlog::warn("console directory not found: {}", options.console_dir);

    server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
      spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
    });
  }
};

HttpServer::HttpServer(MatchService& service, HttpOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

int HttpServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool HttpServer::listen_after_bind() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace kimatch::gateway
