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

#include "ct/http_transport.h"

#include <httplib.h>

#include <algorithm>
#include <cctype>

#include "ct/error.h"

namespace ct {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

struct HttpServer::Impl {
  httplib::Server server;
  Handler handler;
};

HttpServer::HttpServer(Handler handler) : impl_(std::make_unique<Impl>()) {
  impl_->handler = std::move(handler);
  auto serve = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest request;
    request.method = req.method;
    request.path = req.path;
    for (const auto& [k, v] : req.headers) request.headers[lower(k)] = v;
    for (const auto& [k, v] : req.params) request.query[k] = v;
    request.body = req.body;
    HttpResponse response = impl_->handler(request);
    res.status = response.status;
    res.set_content(response.body, response.content_type);
  };
  const std::string pattern = "/api/.*";
  impl_->server.Get(pattern, serve);
  impl_->server.Post(pattern, serve);
  impl_->server.Delete(pattern, serve);
  impl_->server.Put(pattern, serve);
  impl_->server.Patch(pattern, serve);
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::mount(const std::string& prefix, const std::string& dir) {
  return impl_->server.set_mount_point(prefix, dir);
}

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

struct HttpClientTransport::Impl {
  explicit Impl(const std::string& url) : client(url) {}
  httplib::Client client;
};

HttpClientTransport::HttpClientTransport(const std::string& base_url)
    : impl_(std::make_unique<Impl>(base_url)) {
  impl_->client.set_connection_timeout(5);
  impl_->client.set_read_timeout(30);
}

HttpClientTransport::~HttpClientTransport() = default;

HttpResponse HttpClientTransport::send(const HttpRequest& request) {
  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [k, v] : request.headers) {
    if (k == "content-type") {
      content_type = v;
    } else {
      headers.emplace(k, v);
    }
  }
  httplib::Params params(request.query.begin(), request.query.end());
  std::string path = request.path;
  if (!params.empty()) path = httplib::append_query_params(path, params);

  httplib::Result result;
  if (request.method == "GET") {
    result = impl_->client.Get(path, headers);
  } else if (request.method == "POST") {
    result = impl_->client.Post(path, headers, request.body, content_type);
  } else if (request.method == "DELETE") {
    result = impl_->client.Delete(path, headers, request.body, content_type);
  } else if (request.method == "PUT") {
    result = impl_->client.Put(path, headers, request.body, content_type);
  } else {
    throw Error(ErrorCode::Internal, "unsupported method " + request.method);
  }
  if (!result) {
    throw Error(ErrorCode::BackendUnavailable,
                "cannot reach server: " + httplib::to_string(result.error()));
  }
  HttpResponse response;
  response.status = result->status;
  response.content_type = result->get_header_value("Content-Type");
  response.body = result->body;
  return response;
}

}  // namespace ct
