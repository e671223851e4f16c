// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The surveysim Authors
#include "surveysim/http_api.hpp"

#include <httplib.h>

#include <thread>

#include "surveysim/errors.hpp"

namespace surveysim {

namespace {

using nlohmann::json;

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view kind, const std::string& message,
                 json issues = json::array()) {
  reply(res, status, {{"error", kind}, {"message", message}, {"issues", std::move(issues)}});
}

json handle_json(const RunHandle& h) {
  return {{"run_id", h.run_id},
          {"state", to_string(h.state)},
          {"created_at_ms", h.created_at_ms},
          {"failure", h.failure}};
}

std::string sse_event(const MetricsSnapshot& s) {
  return "event: snapshot\ndata: " + json(s).dump() + "\n\n";
}

// Runs a handler and translates domain errors into status codes.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const AuthDenied& e) {
    reply_error(res, 401, "unauthenticated", e.what());
  } catch (const AccessDenied& e) {
    reply_error(res, 403, "forbidden", e.what());
  } catch (const NotFound& e) {
    reply_error(res, 404, "not-found", e.what());
  } catch (const StateConflict& e) {
    reply_error(res, 409, "state-conflict", e.what());
  } catch (const DuplicateLogin& e) {
    reply_error(res, 409, "duplicate-login", e.what());
  } catch (const ValidationError& e) {
    json issues = json::array();
    for (const auto& i : e.report().issues) issues.push_back({{"subject", i.subject}, {"message", i.message}});
    reply_error(res, 422, "validation", e.what(), std::move(issues));
  } catch (const ParseError& e) {
    reply_error(res, 422, "validation", e.what());
  } catch (const json::exception& e) {
    reply_error(res, 422, "validation", std::string("malformed request body: ") + e.what());
  } catch (const std::exception& e) {
    reply_error(res, 500, "internal", e.what());
  }
}

json parse_body(const httplib::Request& req) {
  json body = json::parse(req.body.empty() ? std::string("{}") : req.body);
  if (!body.is_object()) {
    ValidationReport r;
    r.add("body", "must be a JSON object");
    throw ValidationError(r);
  }
  return body;
}

}  // namespace

struct HttpApi::Impl {
  RunService& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(RunService& s) : service(s) { routes(); }

  UserId caller(const httplib::Request& req) {
    const std::string header = req.get_header_value("Authorization");
    constexpr std::string_view prefix = "Bearer ";
    if (header.rfind(prefix, 0) != 0) throw AuthDenied();
    return service.user_for_token(header.substr(prefix.size()));
  }

  void routes() {
    server.Post("/auth/register", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        const UserId id = service.register_user(body.at("login").get<std::string>(), body.at("secret").get<std::string>());
        reply(res, 201, {{"user_id", id}});
      });
    });

    server.Post("/auth/login", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const json body = parse_body(req);
        const std::string token = service.login(body.value("login", ""), body.value("secret", ""));
        reply(res, 200, {{"token", token}});
      });
    });

    server.Post("/uploads", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const UserId user = caller(req);
        if (!req.has_file("file")) {
          ValidationReport r;
          r.add("file", "multipart field is required");
          throw ValidationError(r);
        }
        const auto file = req.get_file_value("file");
        std::string format = req.has_file("format") ? req.get_file_value("format").content : "";
        if (format.empty()) {
          format = survey_format_for_path(file.filename) == SurveyFormat::delimited_table ? "csv" : "json";
        }
        const std::string id = service.upload(user, format, file.filename, file.content);
        reply(res, 201, {{"upload_id", id}, {"format", format}});
      });
    });

    server.Get("/runs", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const UserId user = caller(req);
        json runs = json::array();
        for (const auto& row : service.store().list_runs(user)) {
          runs.push_back({{"run_id", row.run_id}, {"state", row.state}, {"created_at_ms", row.created_at_ms}});
        }
        reply(res, 200, {{"runs", std::move(runs)}});
      });
    });

    server.Post("/runs", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const UserId user = caller(req);
        const json body = parse_body(req);
        StartRequest start;
        try {
          start.config = body.at("config").get<SimulationConfig>();
        } catch (const ValidationError&) {
          throw;
        } catch (const std::exception& e) {
          ValidationReport r;
          r.add("config", e.what());
          throw ValidationError(r);
        }
        start.survey_upload_id = body.value("survey_upload_id", "");
        start.population_upload_id = body.value("population_upload_id", "");
        start.run_key = body.value("run_key", "");
        if (auto it = body.find("mock_script"); it != body.end() && !it->is_null()) start.mock_script_json = it->dump();
        reply(res, 202, handle_json(service.start_run(user, start)));
      });
    });

    server.Get(R"(/runs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const UserId user = caller(req);
        const RunHandle h = service.get_run(user, req.matches[1]);
        json body = handle_json(h);
        body["metrics"] = service.metrics(user, h.run_id)->snapshot();
        reply(res, 200, body);
      });
    });

    server.Post(R"(/runs/([^/]+)/cancel)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const UserId user = caller(req);
        service.cancel_run(user, req.matches[1]);
        reply(res, 202, handle_json(service.get_run(user, req.matches[1])));
      });
    });

    server.Post(R"(/runs/([^/]+)/resume)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const UserId user = caller(req);
        reply(res, 202, handle_json(service.resume_run(user, req.matches[1])));
      });
    });

    server.Get(R"(/runs/([^/]+)/metrics)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const UserId user = caller(req);
        auto recorder = service.metrics(user, req.matches[1]);
        std::shared_ptr<MetricsSubscription> sub = recorder->subscribe(service.metrics_interval());
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider("text/event-stream", [sub](std::size_t, httplib::DataSink& sink) {
          auto snapshot = sub->next(std::chrono::seconds(5));
          if (!snapshot) {
            sink.done();
            return true;
          }
          const std::string event = sse_event(*snapshot);
          if (!sink.write(event.data(), event.size())) return false;
          if (snapshot->final) sink.done();
          return true;
        });
      });
    });

    server.Get(R"(/runs/([^/]+)/results)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const UserId user = caller(req);
        const std::string format = req.has_param("format") ? req.get_param_value("format") : "csv";
        const std::string body = service.download(user, req.matches[1], format);
        const char* type = format == "csv"     ? "text/csv"
                           : format == "jsonl" ? "application/x-ndjson"
                                               : "application/json";
        res.status = 200;
        res.set_content(body, type);
      });
    });

    server.Delete("/me/data", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const UserId user = caller(req);
        const PurgeReport r = service.delete_user_data(user);
        reply(res, 200,
              {{"runs", r.runs},
               {"populations", r.populations},
               {"uploads", r.uploads},
               {"answers", r.answers},
               {"manifests", r.manifests}});
      });
    });
  }
};

HttpApi::HttpApi(RunService& service) : impl_(std::make_unique<Impl>(service)) {}

HttpApi::~HttpApi() { stop(); }

int HttpApi::start(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

bool HttpApi::listen(const std::string& host, int port) { return impl_->server.listen(host, port); }

void HttpApi::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace surveysim
