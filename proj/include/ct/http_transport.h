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

#ifndef CT_HTTP_TRANSPORT_H_
#define CT_HTTP_TRANSPORT_H_

#include <functional>
#include <memory>
#include <string>

#include "ct/http_types.h"

namespace ct {

// Thin HTTP/1.1 server around a request handler.
class HttpServer {
 public:
  using Handler = std::function<HttpResponse(const HttpRequest&)>;

  explicit HttpServer(Handler handler);
  ~HttpServer();

  // Serves the files under `dir` at `prefix` (e.g. the workbench at /ui).
  bool mount(const std::string& prefix, const std::string& dir);
  // Port 0 picks a free port. Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  // Returns once a listen() running on another thread accepts connections.
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Sends requests to a server at e.g. "http://127.0.0.1:8080".
class HttpClientTransport : public Transport {
 public:
  explicit HttpClientTransport(const std::string& base_url);
  ~HttpClientTransport() override;

  // Throws BackendUnavailable when the server cannot be reached.
  HttpResponse send(const HttpRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ct

#endif  // CT_HTTP_TRANSPORT_H_
