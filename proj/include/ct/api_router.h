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

#ifndef CT_API_ROUTER_H_
#define CT_API_ROUTER_H_

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ct/control_plane.h"
#include "ct/error.h"
#include "ct/http_types.h"

namespace ct {

// Fixed error-code -> HTTP status table.
int http_status_for(ErrorCode code);

struct RouteInfo {
  std::string method;
  std::string pattern;    // e.g. "/api/v1/experiment/{id}/kill"
  std::string operation;  // service operation it dispatches to
};

// Transport-independent REST surface. handle() is safe to call
// concurrently; all locking lives in the services.
class ApiRouter {
 public:
  struct Config {
    // Expected bearer token; ignored in insecure mode.
    std::optional<std::string> token;
    bool insecure = false;
  };

  ApiRouter(ControlPlane& plane, Config config);

  HttpResponse handle(const HttpRequest& request) const;

  static const std::vector<RouteInfo>& routes();
  // Which route a (method, path) pair resolves to, if any.
  static std::optional<RouteInfo> match(std::string_view method, std::string_view path);

 private:
  bool authenticated(const HttpRequest& request) const;
  HttpResponse dispatch(const RouteInfo& route, const std::vector<std::string>& captures,
                        const HttpRequest& request) const;

  ControlPlane& plane_;
  Config config_;
};

HttpResponse error_response(const Error& e);

}  // namespace ct

#endif  // CT_API_ROUTER_H_
