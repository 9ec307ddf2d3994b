// Copyright 2026 The Surprise Potential Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Eigen must be parsed before httplib pulls in <resolv.h>, whose _res macro
// collides with Eigen parameter names.
#include "surprise/annotation.hpp"
#include "json_io.hpp"

#include <httplib.h>

namespace surprise {

namespace {

void send_json(httplib::Response& res, int status, const std::string& body) {
  res.status = status;
  res.set_content(body, "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, detail::json{{"error", message}}.dump());
}

}  // namespace

struct AnnotationServer::Impl {
  AnnotationService& service;
  httplib::Server server;

  explicit Impl(AnnotationService& s) : service(s) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.status = 204;
    });

    server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200,
                detail::json{{"status", "ok"}, {"scenarios", service.num_scenarios()}, {"labels", service.num_labels()}}
                    .dump());
    });

    server.Get("/api/pair", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string annotator = req.get_param_value("annotator");
      if (annotator.empty()) return send_error(res, 400, "query parameter 'annotator' is required");
      try {
        std::optional<PairStrategy> strategy;
        if (req.has_param("strategy")) strategy = parse_pair_strategy(req.get_param_value("strategy"));
        const auto pair = service.next_pair(annotator, strategy);
        send_json(res, 200, service.pair_response(pair));
      } catch (const ExhaustedError& e) {
        send_error(res, 409, e.what());
      } catch (const ArgumentError& e) {
        send_error(res, 400, e.what());
      } catch (const Error& e) {
        send_error(res, 500, e.what());
      }
    });

    server.Post("/api/label", [this](const httplib::Request& req, httplib::Response& res) {
      detail::json body;
      try {
        body = detail::json::parse(req.body);
      } catch (const detail::json::exception&) {
        return send_error(res, 400, "request body must be JSON {pair_id, choice}");
      }
      if (!body.is_object() || !body.contains("pair_id") || !body["pair_id"].is_string() || !body.contains("choice") ||
          !body["choice"].is_string())
        return send_error(res, 400, "request body must be JSON {pair_id, choice}");
      try {
        const auto r = service.submit_label(body["pair_id"].get<std::string>(), body["choice"].get<std::string>());
        send_json(res, 200,
                  detail::json{{"status", r.accepted ? "recorded" : "superseded"},
                               {"pair_id", body["pair_id"]},
                               {"choice", std::string(to_string(r.effective.choice))}}
                      .dump());
      } catch (const UnknownPairError& e) {
        send_error(res, 404, e.what());
      } catch (const ArgumentError& e) {
        send_error(res, 400, e.what());
      } catch (const Error& e) {
        send_error(res, 500, e.what());
      }
    });

    server.Get("/api/export", [this](const httplib::Request&, httplib::Response& res) {
      res.status = 200;
      res.set_content(service.export_text(), "application/x-ndjson");
    });
  }
};

AnnotationServer::AnnotationServer(AnnotationService& service) : impl_(std::make_unique<Impl>(service)) {}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw IoError("cannot bind to " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) throw IoError("cannot bind to " + host + ":" + std::to_string(port));
  return port;
}

void AnnotationServer::run() { impl_->server.listen_after_bind(); }

void AnnotationServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace surprise
