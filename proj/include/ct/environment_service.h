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

#ifndef CT_ENVIRONMENT_SERVICE_H_
#define CT_ENVIRONMENT_SERVICE_H_

#include <functional>
#include <map>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "ct/experiment_spec.h"
#include "ct/store.h"

namespace ct {

struct EnvironmentSpec {
  std::string name;
  std::string image;
  std::vector<std::string> channels;
  std::vector<std::string> dependencies;

  friend bool operator==(const EnvironmentSpec&, const EnvironmentSpec&) = default;
};

Json to_json(const EnvironmentSpec& e);
EnvironmentSpec environment_from_json(const Json& j);

// Conda-style environment file:
//
//   name: tf-env
//   image: tf-mnist:latest
//   channels: [defaults]
//   dependencies: [python=3.8, tensorflow]
//
// Throws YamlSyntax, MissingField (name/image) or UnknownField.
EnvironmentSpec parse_environment_yaml(std::string_view text);

class EnvironmentRegistry {
 public:
  // Answers whether some non-terminal experiment references an environment.
  using InUseCheck = std::function<bool(const std::string& name)>;

  explicit EnvironmentRegistry(Store& store);

  void set_in_use_check(InUseCheck check);

  void register_environment(const EnvironmentSpec& e);
  EnvironmentSpec get(const std::string& name) const;
  std::vector<EnvironmentSpec> list() const;
  // Throws InUse while a live experiment references `name`.
  void remove(const std::string& name);

 private:
  Store& store_;
  std::map<std::string, EnvironmentSpec> environments_;
  InUseCheck in_use_;
  mutable std::shared_mutex mu_;
};

}  // namespace ct

#endif  // CT_ENVIRONMENT_SERVICE_H_
