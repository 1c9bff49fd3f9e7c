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

#ifndef CT_CLI_H_
#define CT_CLI_H_

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ct/experiment_spec.h"
#include "ct/http_types.h"

namespace ct {

// Flags of `job run`.
struct JobRunArgs {
  std::string name;
  std::string ns = "default";
  std::string framework;
  std::string cmd;
  std::string image;
  std::string env;  // registered environment name; wins over image
  int64_t num_workers = 1;
  std::string worker_resources;
  std::string worker_launch_cmd;
  int64_t num_ps = 0;
  std::string ps_resources;
  std::string ps_launch_cmd;
  std::vector<std::string> conf;  // "key=value"
};

// Throws Error with a resource-grammar code, or ParseError for a bad --conf.
ExperimentSpec spec_from_job_run(const JobRunArgs& args);

using CliEnv = std::map<std::string, std::string>;
using TransportFactory = std::function<std::unique_ptr<Transport>(const std::string& server)>;

inline constexpr const char* kDefaultServer = "http://127.0.0.1:8080";
inline constexpr const char* kDefaultImage = "ct-base:latest";

// `args` excludes the program name. Exit codes: 0 ok, 1 API error, 2 usage.
int run_cli(const std::vector<std::string>& args, const TransportFactory& transport,
            std::ostream& out, std::ostream& err, const CliEnv& env);

// CT_* variables of the current process.
CliEnv cli_env_from_process();

}  // namespace ct

#endif  // CT_CLI_H_
