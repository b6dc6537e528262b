/*
 * Copyright 2026 The Clime Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "clime/http_server.hpp"

#include <mutex>
#include <thread>

#include <httplib.h>

namespace clime {

using json = nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kFormat:
    case ErrorCode::kNumeric: return 400;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kIo:
    case ErrorCode::kInternal: return 500;
  }
  return 500;
}

namespace {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kInternal: return "internal";
  }
  return "internal";
}

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code,
                const std::string& message) {
  send(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    fail(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  return j;
}

template <typename T>
T field(const json& body, const char* name) {
  const auto it = body.find(name);
  if (it == body.end()) fail(ErrorCode::kInvalidArgument, std::string("missing field ") + name);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kInvalidArgument, std::string("bad type for field ") + name);
  }
}

template <typename T>
T field_or(const json& body, const char* name, T fallback) {
  return body.contains(name) ? field<T>(body, name) : fallback;
}

std::size_t count_param(const std::string& raw, const char* name) {
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(raw, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != raw.size() || v < 0)
    fail(ErrorCode::kInvalidArgument, std::string(name) + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Maps thrown errors onto the status contract.
Handler guarded(Handler fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), code_name(e.code()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "invalid_argument", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

}  // namespace

struct HttpServer::Impl {
  SessionService& service;
  FinalizeOptions defaults;
  httplib::Server server;
  std::thread thread;
  std::mutex join_mu;

  Impl(SessionService& s, FinalizeOptions d) : service(s), defaults(std::move(d)) {}
  void routes();
  std::string workspace_param(const httplib::Request& req) const;
};

std::string HttpServer::Impl::workspace_param(const httplib::Request& req) const {
  if (req.has_param("workspace")) return req.get_param_value("workspace");
  const auto ids = service.workspace_ids();
  if (ids.size() == 1) return ids.front();
  fail(ErrorCode::kInvalidArgument,
       ids.empty() ? "no workspace is open" : "workspace parameter required");
}

void HttpServer::Impl::routes() {
  auto& svc = service;

  server.Post("/workspaces", guarded([&](const auto& req, auto& res) {
    const json body = body_of(req);
    const std::string id = svc.open_workspace(field<std::string>(body, "dir"));
    send(res, 201, svc.workspace_info(id));
  }));

  server.Get("/workspaces", guarded([&](const auto&, auto& res) {
    json list = json::array();
    for (const auto& id : svc.workspace_ids()) list.push_back(svc.workspace_info(id));
    send(res, 200, {{"workspaces", list}});
  }));

  server.Get(R"(/workspaces/([^/]+))", guarded([&](const auto& req, auto& res) {
    send(res, 200, svc.workspace_info(req.matches[1]));
  }));

  server.Post(R"(/workspaces/([^/]+)/sessions)", guarded([&](const auto& req, auto& res) {
    const json body = body_of(req);
    const auto s = field_or<std::size_t>(body, "s", kDefaultKeywordCount);
    const auto k = field_or<std::size_t>(body, "k", 5);
    const std::string id = svc.create_session(req.matches[1], s, k);
    json out = svc.session_json(id);
    out["card"] = svc.card_json(id, 0);
    send(res, 201, out);
  }));

  server.Get(R"(/sessions/([^/]+))", guarded([&](const auto& req, auto& res) {
    send(res, 200, svc.session_json(req.matches[1]));
  }));

  server.Get(R"(/sessions/([^/]+)/cards/([^/]+))", guarded([&](const auto& req, auto& res) {
    send(res, 200, svc.card_json(req.matches[1], count_param(req.matches[2], "card index")));
  }));

  server.Get(R"(/sessions/([^/]+)/feedback)", guarded([&](const auto& req, auto& res) {
    send(res, 200, svc.feedback_json(req.matches[1]));
  }));

  server.Get(R"(/sessions/([^/]+)/events)", guarded([&](const auto& req, auto& res) {
    json list = json::array();
    for (const auto& e : svc.events(req.matches[1])) list.push_back(e.to_json());
    send(res, 200, {{"events", list}});
  }));

  server.Post(R"(/sessions/([^/]+)/marks)", guarded([&](const auto& req, auto& res) {
    const json body = body_of(req);
    send(res, 200,
         svc.submit_mark(req.matches[1], field<std::string>(body, "keyword"),
                         field<std::string>(body, "word"), field<std::string>(body, "lang"),
                         parse_mark(field<std::string>(body, "mark"))));
  }));

  server.Post(R"(/sessions/([^/]+)/words)", guarded([&](const auto& req, auto& res) {
    const json body = body_of(req);
    send(res, 200,
         svc.add_word(req.matches[1], field<std::string>(body, "keyword"),
                      field<std::string>(body, "surface"), field<std::string>(body, "lang"),
                      parse_mark(field_or<std::string>(body, "mark", "clear"))));
  }));

  server.Get("/concordance", guarded([&](const auto& req, auto& res) {
    if (!req.has_param("word") || !req.has_param("lang"))
      fail(ErrorCode::kInvalidArgument, "word and lang are required");
    const std::size_t limit =
        req.has_param("limit") ? count_param(req.get_param_value("limit"), "limit") : 10;
    const auto hits = svc.concordance(workspace_param(req), req.get_param_value("word"),
                                      req.get_param_value("lang"), limit);
    send(res, 200, {{"word", req.get_param_value("word")},
                    {"lang", req.get_param_value("lang")},
                    {"snippets", hits}});
  }));

  server.Post(R"(/sessions/([^/]+)/finalize)", guarded([&](const auto& req, auto& res) {
    const json body = body_of(req);
    FinalizeOptions opts = defaults;
    opts.refine.lambda = field_or<double>(body, "lambda", opts.refine.lambda);
    opts.refine.steps = field_or<int>(body, "steps", opts.refine.steps);
    opts.seeds = field_or<std::size_t>(body, "seeds", opts.seeds);
    if (opts.refine.steps < 1) fail(ErrorCode::kInvalidArgument, "steps must be >= 1");
    if (!(opts.refine.lambda >= 0.0)) fail(ErrorCode::kInvalidArgument, "lambda must be >= 0");
    if (opts.seeds < 1) fail(ErrorCode::kInvalidArgument, "seeds must be >= 1");
    const std::string job = svc.finalize_async(req.matches[1], opts);
    send(res, 202, {{"job", job}, {"session", std::string(req.matches[1])}});
  }));

  server.Get(R"(/jobs/([^/]+))", guarded([&](const auto& req, auto& res) {
    const JobStatus st = svc.job(req.matches[1]);
    json out = {{"id", st.id}, {"session", st.session}, {"state", st.state}};
    if (!st.error.empty()) out["error"] = st.error;
    if (!st.result.is_null()) out["result"] = st.result;
    send(res, 200, out);
  }));

  server.Get(R"(/sessions/([^/]+)/report)", guarded([&](const auto& req, auto& res) {
    send(res, 200, svc.report(req.matches[1]));
  }));

  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (res.status == 404 && res.body.empty())
      send_error(res, 404, "not_found", "no route for " + req.method + " " + req.path);
  });
}

HttpServer::HttpServer(SessionService& service, FinalizeOptions defaults)
    : impl_(std::make_unique<Impl>(service, std::move(defaults))) {
  impl_->routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  if (impl_->thread.joinable()) fail(ErrorCode::kConflict, "server already started");
  if (port < 0 || port > 65535) fail(ErrorCode::kInvalidArgument, "port out of range");
  if (port == 0) {
    port_ = impl_->server.bind_to_any_port(host);
  } else {
    port_ = impl_->server.bind_to_port(host, port) ? port : -1;
  }
  if (port_ < 0)
    fail(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

void HttpServer::wait() {
  std::lock_guard lock(impl_->join_mu);
  if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpServer::stop() {
  impl_->server.stop();
  wait();
}

}  // namespace clime
