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

#include "ct/environment_service.h"

#include <yaml-cpp/yaml.h>

#include <mutex>

#include "ct/error.h"

namespace ct {
namespace {

const std::string kKeyPrefix = "environment/";

std::vector<std::string> yaml_string_list(const YAML::Node& node, const std::string& key) {
  std::vector<std::string> out;
  if (!node || node.IsNull()) return out;
  if (!node.IsSequence()) {
    throw Error(ErrorCode::YamlSyntax, "'" + key + "' must be a list");
  }
  for (const auto& item : node) {
    if (!item.IsScalar()) {
      throw Error(ErrorCode::YamlSyntax, "entries of '" + key + "' must be strings");
    }
    out.push_back(item.Scalar());
  }
  return out;
}

std::vector<std::string> json_string_list(const Json& j, const char* key) {
  std::vector<std::string> out;
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return out;
  if (!it->is_array()) throw Error(ErrorCode::ParseError, std::string(key) + " must be an array");
  for (const auto& item : *it) {
    if (!item.is_string()) {
      throw Error(ErrorCode::ParseError, std::string(key) + " entries must be strings");
    }
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

Json to_json(const EnvironmentSpec& e) {
  return {{"name", e.name},
          {"image", e.image},
          {"channels", e.channels},
          {"dependencies", e.dependencies}};
}

EnvironmentSpec environment_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "environment must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "name" && key != "image" && key != "channels" && key != "dependencies") {
      throw Error(ErrorCode::UnknownField, "unknown environment field '" + key + "'");
    }
  }
  EnvironmentSpec e;
  for (const char* key : {"name", "image"}) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      throw Error(ErrorCode::MissingField, std::string("missing field '") + key + "'",
                  {{"field", key}});
    }
    if (!it->is_string()) {
      throw Error(ErrorCode::ParseError, std::string(key) + " must be a string");
    }
  }
  e.name = j["name"].get<std::string>();
  e.image = j["image"].get<std::string>();
  e.channels = json_string_list(j, "channels");
  e.dependencies = json_string_list(j, "dependencies");
  return e;
}

EnvironmentSpec parse_environment_yaml(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::YamlSyntax, e.what());
  }
  if (!root.IsMap()) {
    throw Error(ErrorCode::YamlSyntax, "environment file must be a mapping");
  }
  EnvironmentSpec e;
  bool has_name = false;
  bool has_image = false;
  try {
    for (const auto& kv : root) {
      const std::string key = kv.first.as<std::string>();
      if (key == "name" || key == "image") {
        if (!kv.second.IsScalar()) {
          throw Error(ErrorCode::YamlSyntax, "'" + key + "' must be a string");
        }
        (key == "name" ? e.name : e.image) = kv.second.Scalar();
        (key == "name" ? has_name : has_image) = true;
      } else if (key == "channels") {
        e.channels = yaml_string_list(kv.second, key);
      } else if (key == "dependencies") {
        e.dependencies = yaml_string_list(kv.second, key);
      } else {
        throw Error(ErrorCode::UnknownField, "unknown environment field '" + key + "'",
                    {{"field", key}});
      }
    }
  } catch (const YAML::Exception& ex) {
    throw Error(ErrorCode::YamlSyntax, ex.what());
  }
  if (!has_name || e.name.empty()) {
    throw Error(ErrorCode::MissingField, "missing field 'name'", {{"field", "name"}});
  }
  if (!has_image || e.image.empty()) {
    throw Error(ErrorCode::MissingField, "missing field 'image'", {{"field", "image"}});
  }
  return e;
}

EnvironmentRegistry::EnvironmentRegistry(Store& store) : store_(store) {
  for (const auto& [key, value] : store_.scan(kKeyPrefix)) {
    EnvironmentSpec e = environment_from_json(value);
    environments_.emplace(e.name, std::move(e));
  }
}

void EnvironmentRegistry::set_in_use_check(InUseCheck check) {
  std::unique_lock lock(mu_);
  in_use_ = std::move(check);
}

void EnvironmentRegistry::register_environment(const EnvironmentSpec& e) {
  if (e.name.empty()) {
    throw Error(ErrorCode::MissingField, "missing field 'name'", {{"field", "name"}});
  }
  if (e.image.empty()) {
    throw Error(ErrorCode::MissingField, "missing field 'image'", {{"field", "image"}});
  }
  std::unique_lock lock(mu_);
  if (environments_.count(e.name)) {
    throw Error(ErrorCode::Conflict, "environment '" + e.name + "' already registered");
  }
  store_.put(kKeyPrefix + e.name, to_json(e));
  environments_.emplace(e.name, e);
}

EnvironmentSpec EnvironmentRegistry::get(const std::string& name) const {
  std::shared_lock lock(mu_);
  auto it = environments_.find(name);
  if (it == environments_.end()) {
    throw Error(ErrorCode::NotFound, "environment '" + name + "' not found");
  }
  return it->second;
}

std::vector<EnvironmentSpec> EnvironmentRegistry::list() const {
  std::shared_lock lock(mu_);
  std::vector<EnvironmentSpec> out;
  for (const auto& [_, e] : environments_) out.push_back(e);
  return out;
}

void EnvironmentRegistry::remove(const std::string& name) {
  std::unique_lock lock(mu_);
  if (!environments_.count(name)) {
    throw Error(ErrorCode::NotFound, "environment '" + name + "' not found");
  }
  if (in_use_ && in_use_(name)) {
    throw Error(ErrorCode::InUse,
                "environment '" + name + "' is referenced by a live experiment");
  }
  store_.erase(kKeyPrefix + name);
  environments_.erase(name);
}

}  // namespace ct
