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

#include <iostream>

#include "ct/cli.h"
#include "ct/http_transport.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  auto transport = [](const std::string& server) -> std::unique_ptr<ct::Transport> {
    return std::make_unique<ct::HttpClientTransport>(server);
  };
  return ct::run_cli(args, transport, std::cout, std::cerr, ct::cli_env_from_process());
}
