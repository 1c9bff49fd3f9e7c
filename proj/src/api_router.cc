/* Copyright 2026 The ct Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "ct/api_router.h"

#include <charconv>

#include "ct/relaxed_json.h"

namespace ct {
namespace {

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos < path.size()) {
    size_t slash = path.find('/', pos);
    if (slash == std::string_view::npos) slash = path.size();
    if (slash > pos) out.emplace_back(path.substr(pos, slash - pos));
    pos = slash + 1;
  }
  return out;
}

struct Match {
  const RouteInfo* route = nullptr;
  std::vector<std::string> captures;
};

Match find_route(std::string_view method, std::string_view path) {
  const auto segments = split_path(path);
  Match best;
  // Literal segments, earlier ones weighing more: "from-template/{name}"
  // beats "{id}/kill" even for a template named "kill".
  std::vector<bool> best_shape;
  for (const auto& route : ApiRouter::routes()) {
    if (route.method != method) continue;
    const auto pattern = split_path(route.pattern);
    if (pattern.size() != segments.size()) continue;
    std::vector<std::string> captures;
    std::vector<bool> shape;
    bool ok = true;
    for (size_t i = 0; i < pattern.size() && ok; ++i) {
      if (pattern[i].front() == '{') {
        captures.push_back(segments[i]);
        shape.push_back(false);
      } else if (pattern[i] == segments[i]) {
        shape.push_back(true);
      } else {
        ok = false;
      }
    }
    if (ok && (!best.route || shape > best_shape)) {
      best = {&route, std::move(captures)};
      best_shape = std::move(shape);
    }
  }
  return best;
}

HttpResponse json_response(int status, const Json& body) {
  return {status, "application/json", canonical_json(body)};
}

Json parse_body(const HttpRequest& request) {
  if (request.body.empty()) return Json::object();
  try {
    return Json::parse(request.body);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("request body is not JSON: ") + e.what());
  }
}

std::map<std::string, std::string> string_map(const Json& j, const char* what) {
  std::map<std::string, std::string> out;
  if (j.is_null()) return out;
  if (!j.is_object()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (v.is_string()) {
      out[k] = v.get<std::string>();
    } else if (v.is_number() || v.is_boolean()) {
      out[k] = v.dump();
    } else {
      throw Error(ErrorCode::ParseError, std::string(what) + " values must be scalars");
    }
  }
  return out;
}

bool is_yaml(const HttpRequest& request) {
  auto it = request.headers.find("content-type");
  return it != request.headers.end() &&
         (it->second.find("yaml") != std::string::npos);
}

SimSubmitter& require_sim(ControlPlane& plane) {
  if (!plane.sim()) {
    throw Error(ErrorCode::BackendUnavailable, "no simulated cluster is configured");
  }
  return *plane.sim();
}

Json telemetry_ack(const TelemetryAck& ack) { return {{"late", ack.late}}; }

}  // namespace

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptySpec:
    case ErrorCode::UnknownKey:
    case ErrorCode::MalformedPair:
    case ErrorCode::UnknownUnit:
    case ErrorCode::NegativeValue:
    case ErrorCode::DuplicateKey:
    case ErrorCode::ArithmeticOverflow:
    case ErrorCode::ParseError:
    case ErrorCode::ValidationFailed:
    case ErrorCode::MissingRequiredParameter:
    case ErrorCode::UnknownParameter:
    case ErrorCode::ResultInvalid:
    case ErrorCode::YamlSyntax:
    case ErrorCode::MissingField:
    case ErrorCode::UnknownField:
    case ErrorCode::NonFiniteMetric:
    case ErrorCode::ResourceSpecUnsupported:
      return 400;
    case ErrorCode::Unauthenticated:
      return 401;
    case ErrorCode::NotFound:
    case ErrorCode::EnvironmentNotFound:
    case ErrorCode::UnknownHandle:
      return 404;
    case ErrorCode::Conflict:
    case ErrorCode::IllegalTransition:
    case ErrorCode::AlreadyTerminal:
    case ErrorCode::InUse:
    case ErrorCode::Refused:
    case ErrorCode::DuplicateNodeId:
      return 409;
    case ErrorCode::StoreCorrupt:
    case ErrorCode::BackendUnavailable:
    case ErrorCode::SpawnFailure:
    case ErrorCode::Internal:
      return 500;
  }
  return 500;
}

HttpResponse error_response(const Error& e) {
  Json body = {{"code", e.code_name()}, {"message", e.what()}};
  if (!e.details().is_null()) body["details"] = e.details();
  return json_response(http_status_for(e.code()), body);
}

const std::vector<RouteInfo>& ApiRouter::routes() {
  static const std::vector<RouteInfo> kRoutes = {
      {"POST", "/api/v1/experiment", "create_experiment"},
      {"GET", "/api/v1/experiment", "list_experiments"},
      {"GET", "/api/v1/experiment/{id}", "get_experiment"},
      {"GET", "/api/v1/experiment/{id}/logs", "get_experiment_logs"},
      {"POST", "/api/v1/experiment/{id}/kill", "kill_experiment"},
      {"POST", "/api/v1/experiment/{id}/telemetry", "append_telemetry"},
      {"POST", "/api/v1/experiment/from-template/{name}", "create_from_template"},
      {"POST", "/api/v1/template", "register_template"},
      {"GET", "/api/v1/template", "list_templates"},
      {"GET", "/api/v1/template/{name}", "get_template"},
      {"DELETE", "/api/v1/template/{name}", "delete_template"},
      {"POST", "/api/v1/environment", "register_environment"},
      {"GET", "/api/v1/environment", "list_environments"},
      {"GET", "/api/v1/environment/{name}", "get_environment"},
      {"DELETE", "/api/v1/environment/{name}", "delete_environment"},
      {"GET", "/api/v1/cluster", "cluster_snapshot"},
      {"POST", "/api/v1/cluster/node", "add_node"},
      {"DELETE", "/api/v1/cluster/node/{id}", "remove_node"},
  };
  return kRoutes;
}

std::optional<RouteInfo> ApiRouter::match(std::string_view method, std::string_view path) {
  Match m = find_route(method, path);
  if (!m.route) return std::nullopt;
  return *m.route;
}

ApiRouter::ApiRouter(ControlPlane& plane, Config config)
    : plane_(plane), config_(std::move(config)) {}

bool ApiRouter::authenticated(const HttpRequest& request) const {
  if (config_.insecure) return true;
  if (!config_.token || config_.token->empty()) return false;
  auto it = request.headers.find("authorization");
  return it != request.headers.end() && it->second == "Bearer " + *config_.token;
}

HttpResponse ApiRouter::handle(const HttpRequest& request) const {
  if (!authenticated(request)) {
    return error_response(Error(ErrorCode::Unauthenticated, "missing or invalid bearer token"));
  }
  Match m = find_route(request.method, request.path);
  if (!m.route) {
    return error_response(
        Error(ErrorCode::NotFound, "no route for " + request.method + " " + request.path));
  }
  try {
    return dispatch(*m.route, m.captures, request);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const Json::exception& e) {
    return error_response(Error(ErrorCode::ParseError, e.what()));
  } catch (const std::exception& e) {
    return error_response(Error(ErrorCode::Internal, e.what()));
  }
}

HttpResponse ApiRouter::dispatch(const RouteInfo& route, const std::vector<std::string>& captures,
                                 const HttpRequest& request) const {
  const std::string& op = route.operation;
  ExperimentService& experiments = plane_.experiments();

  if (op == "create_experiment") {
    ExperimentSpec spec = experiment_spec_from_json(parse_body(request));
    return json_response(201, to_json(experiments.create_experiment(spec)));
  }
  if (op == "list_experiments") {
    std::optional<std::string> ns;
    std::optional<size_t> limit;
    if (auto it = request.query.find("namespace"); it != request.query.end()) ns = it->second;
    if (auto it = request.query.find("limit"); it != request.query.end()) {
      size_t n = 0;
      const std::string& s = it->second;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::ParseError, "limit must be a non-negative integer");
      }
      limit = n;
    }
    Json out = Json::array();
    for (const auto& s : experiments.list(ns, limit)) out.push_back(to_json(s));
    return json_response(200, out);
  }
  if (op == "get_experiment") {
    return json_response(200, to_json(experiments.get(captures[0])));
  }
  if (op == "get_experiment_logs") {
    return {200, "text/plain; charset=utf-8", experiments.logs_text(captures[0])};
  }
  if (op == "kill_experiment") {
    return json_response(200, to_json(experiments.kill(captures[0])));
  }
  if (op == "append_telemetry") {
    Json body = parse_body(request);
    const std::string type = body.value("type", std::string());
    const std::string& id = captures[0];
    if (type == "metric") {
      body.erase("type");
      return json_response(200, telemetry_ack(experiments.append_metric(id, metric_from_json(body))));
    }
    if (type == "event") {
      auto kind = parse_event_kind(body.value("kind", std::string()));
      if (!kind) throw Error(ErrorCode::ParseError, "unknown event kind");
      return json_response(
          200, telemetry_ack(experiments.append_event(id, *kind, body.value("detail", std::string()))));
    }
    if (type == "log") {
      return json_response(200, telemetry_ack(experiments.append_log(
                                    id, body.at("task").get<std::string>(),
                                    body.at("line").get<std::string>())));
    }
    throw Error(ErrorCode::ParseError, "telemetry type must be metric, event or log");
  }
  if (op == "create_from_template") {
    Json body = parse_body(request);
    auto params = string_map(body.contains("params") ? body["params"] : Json(nullptr), "params");
    return json_response(201, to_json(experiments.create_from_template(captures[0], params)));
  }

  if (op == "register_template") {
    TemplateSpec t = template_from_text(request.body);
    plane_.templates().register_template(t);
    return json_response(201, to_json(t));
  }
  if (op == "list_templates") {
    Json out = Json::array();
    for (const auto& s : plane_.templates().list()) {
      out.push_back({{"name", s.name}, {"description", s.description}});
    }
    return json_response(200, out);
  }
  if (op == "get_template") {
    return json_response(200, to_json(plane_.templates().get(captures[0])));
  }
  if (op == "delete_template") {
    plane_.templates().remove(captures[0]);
    return json_response(200, {{"deleted", captures[0]}});
  }

  if (op == "register_environment") {
    EnvironmentSpec e = is_yaml(request) ? parse_environment_yaml(request.body)
                                         : environment_from_json(parse_body(request));
    plane_.environments().register_environment(e);
    return json_response(201, to_json(e));
  }
  if (op == "list_environments") {
    Json out = Json::array();
    for (const auto& e : plane_.environments().list()) out.push_back(to_json(e));
    return json_response(200, out);
  }
  if (op == "get_environment") {
    return json_response(200, to_json(plane_.environments().get(captures[0])));
  }
  if (op == "delete_environment") {
    plane_.environments().remove(captures[0]);
    return json_response(200, {{"deleted", captures[0]}});
  }

  if (op == "cluster_snapshot") {
    return json_response(200, to_json(require_sim(plane_).snapshot()));
  }
  if (op == "add_node") {
    Json body = parse_body(request);
    SimSubmitter& sim = require_sim(plane_);
    sim.add_node(body.at("id").get<std::string>(),
                 parse_resource_string(body.at("resources").get<std::string>()).resources);
    return json_response(201, to_json(sim.snapshot()));
  }
  if (op == "remove_node") {
    SimSubmitter& sim = require_sim(plane_);
    sim.remove_node(captures[0]);
    return json_response(200, to_json(sim.snapshot()));
  }
  throw Error(ErrorCode::Internal, "route " + route.pattern + " has no handler");
}

}  // namespace ct
