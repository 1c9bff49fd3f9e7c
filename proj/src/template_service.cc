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

#include "ct/template_service.h"

#include <mutex>
#include <set>

#include "ct/error.h"
#include "ct/relaxed_json.h"

namespace ct {
namespace {

const std::string kKeyPrefix = "template/";

bool is_parameter_name(std::string_view s) {
  if (s.empty()) return false;
  auto head = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  if (!head(s.front())) return false;
  for (char c : s) {
    if (!head(c) && !(c >= '0' && c <= '9')) return false;
  }
  return true;
}

void collect_tokens(const Json& j, std::vector<std::string>& out, bool& unterminated) {
  if (j.is_string()) {
    bool u = false;
    for (auto& t : find_tokens(j.get_ref<const std::string&>(), &u)) out.push_back(std::move(t));
    unterminated = unterminated || u;
  } else if (j.is_structured()) {
    for (const auto& item : j) collect_tokens(item, out, unterminated);
  }
}

std::string substitute_string(std::string_view s,
                              const std::map<std::string, std::string>& values,
                              size_t& replacements) {
  std::string out;
  size_t pos = 0;
  while (pos < s.size()) {
    size_t open = s.find("{{", pos);
    if (open == std::string_view::npos) break;
    size_t close = s.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    out.append(s.substr(pos, open - pos));
    std::string name(s.substr(open + 2, close - open - 2));
    if (auto it = values.find(name); it != values.end()) {
      out += it->second;
      ++replacements;
    } else {
      out.append(s.substr(open, close + 2 - open));
    }
    pos = close + 2;
  }
  out.append(s.substr(pos));
  return out;
}

Json substitute_json(const Json& j, const std::map<std::string, std::string>& values,
                     size_t& replacements) {
  if (j.is_string()) {
    return substitute_string(j.get_ref<const std::string&>(), values, replacements);
  }
  if (j.is_object()) {
    Json out = Json::object();
    for (const auto& [key, item] : j.items()) {
      out[key] = substitute_json(item, values, replacements);
    }
    return out;
  }
  if (j.is_array()) {
    Json out = Json::array();
    for (const auto& item : j) out.push_back(substitute_json(item, values, replacements));
    return out;
  }
  return j;
}

// Template bodies may omit meta.name; the experiment is then named after
// the template.
Json with_default_name(Json body, const std::string& template_name) {
  if (!body.is_object()) return body;
  Json& meta = body["meta"];
  if (meta.is_null()) meta = Json::object();
  if (meta.is_object() && !meta.contains("name")) meta["name"] = template_name;
  return body;
}

}  // namespace

Json to_json(const TemplateSpec& t) {
  Json params = Json::array();
  for (const auto& p : t.parameters) {
    Json item = {{"name", p.name}, {"required", p.required}};
    if (p.value) item["value"] = *p.value;
    params.push_back(std::move(item));
  }
  return {{"name", t.name},
          {"author", t.author},
          {"description", t.description},
          {"parameters", std::move(params)},
          {"experimentSpec", t.experiment_spec_body}};
}

TemplateSpec template_from_json(const Json& j) {
  auto fail = [](const std::string& m) -> void { throw Error(ErrorCode::ParseError, m); };
  if (!j.is_object()) fail("template must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "name" && key != "author" && key != "description" &&
        key != "parameters" && key != "experimentSpec") {
      fail("unknown template field '" + key + "'");
    }
  }
  auto str = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_string()) fail(std::string("template field '") + key + "' must be a string");
    return it->get<std::string>();
  };
  TemplateSpec t;
  t.name = str("name");
  t.author = str("author");
  t.description = str("description");
  if (auto it = j.find("parameters"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) fail("parameters must be an array");
    for (const auto& p : *it) {
      if (!p.is_object()) fail("each parameter must be an object");
      TemplateParameter param;
      auto name = p.find("name");
      if (name == p.end() || !name->is_string()) fail("parameter name must be a string");
      param.name = name->get<std::string>();
      if (auto v = p.find("value"); v != p.end() && !v->is_null()) {
        if (v->is_string()) {
          param.value = v->get<std::string>();
        } else if (v->is_primitive()) {
          param.value = v->dump();
        } else {
          fail("parameter value must be a scalar");
        }
      }
      if (auto r = p.find("required"); r != p.end() && !r->is_null()) {
        if (!r->is_boolean()) fail("parameter 'required' must be a boolean");
        param.required = r->get<bool>();
      }
      t.parameters.push_back(std::move(param));
    }
  }
  if (auto it = j.find("experimentSpec"); it != j.end()) {
    if (!it->is_object()) fail("experimentSpec must be an object");
    t.experiment_spec_body = *it;
  }
  return t;
}

TemplateSpec template_from_text(std::string_view text) {
  return template_from_json(parse_relaxed_json(text));
}

std::vector<std::string> find_tokens(std::string_view s, bool* unterminated) {
  std::vector<std::string> out;
  if (unterminated) *unterminated = false;
  size_t pos = 0;
  while (true) {
    size_t open = s.find("{{", pos);
    if (open == std::string_view::npos) break;
    size_t close = s.find("}}", open + 2);
    if (close == std::string_view::npos) {
      if (unterminated) *unterminated = true;
      break;
    }
    out.emplace_back(s.substr(open + 2, close - open - 2));
    pos = close + 2;
  }
  return out;
}

Substitution substitute_tokens(const Json& body,
                               const std::map<std::string, std::string>& values) {
  Substitution out;
  out.body = substitute_json(body, values, out.replacements);
  return out;
}

std::vector<Violation> validate_template(const TemplateSpec& t) {
  std::vector<Violation> out;
  if (!is_valid_name(t.name)) {
    out.push_back({"name", "template name must match [a-z0-9]([-a-z0-9]*[a-z0-9])?",
                   "InvalidName"});
  }
  std::set<std::string> declared;
  for (size_t i = 0; i < t.parameters.size(); ++i) {
    const auto& p = t.parameters[i];
    const std::string path = "parameters[" + std::to_string(i) + "].name";
    if (!is_parameter_name(p.name)) {
      out.push_back({path, "parameter name '" + p.name + "' must match [A-Za-z_][A-Za-z0-9_]*",
                     "InvalidParameterName"});
    }
    if (!declared.insert(p.name).second) {
      out.push_back({path, "parameter '" + p.name + "' declared twice", "DuplicateParameter"});
    }
  }

  std::vector<std::string> tokens;
  bool unterminated = false;
  collect_tokens(t.experiment_spec_body, tokens, unterminated);
  if (unterminated) {
    out.push_back({"experimentSpec", "'{{' without closing '}}'", "UnterminatedToken"});
  }
  std::set<std::string> used;
  for (const auto& token : tokens) {
    if (!declared.count(token) && used.insert(token).second) {
      out.push_back({"experimentSpec", token, "UndeclaredToken"});
    }
    used.insert(token);
  }
  for (const auto& p : t.parameters) {
    if (!used.count(p.name)) {
      out.push_back({"parameters", p.name, "UnusedParameter"});
    }
  }

  std::map<std::string, std::string> fill;
  for (const auto& p : t.parameters) fill[p.name] = p.value.value_or("0");
  Json body = with_default_name(substitute_tokens(t.experiment_spec_body, fill).body, t.name);
  try {
    for (auto v : validate_experiment_spec(experiment_spec_from_json(body))) {
      v.path = "experimentSpec." + v.path;
      out.push_back(std::move(v));
    }
  } catch (const Error& e) {
    out.push_back({"experimentSpec", e.what(), std::string(e.code_name())});
  }
  return out;
}

Instantiation instantiate_template(const TemplateSpec& t,
                                   const std::map<std::string, std::string>& params) {
  std::map<std::string, const TemplateParameter*> declared;
  for (const auto& p : t.parameters) declared[p.name] = &p;
  for (const auto& [key, _] : params) {
    if (!declared.count(key)) {
      throw Error(ErrorCode::UnknownParameter, "unknown parameter '" + key + "'",
                  {{"parameter", key}});
    }
  }
  std::map<std::string, std::string> values;
  for (const auto& p : t.parameters) {
    if (auto it = params.find(p.name); it != params.end()) {
      values[p.name] = it->second;
    } else if (p.required) {
      throw Error(ErrorCode::MissingRequiredParameter,
                  "missing required parameter '" + p.name + "'", {{"parameter", p.name}});
    } else {
      values[p.name] = p.value.value_or("");
    }
  }
  Substitution sub = substitute_tokens(t.experiment_spec_body, values);
  Json body = with_default_name(std::move(sub.body), t.name);
  if (canonical_json(body).find("{{") != std::string::npos) {
    throw Error(ErrorCode::ResultInvalid, "instantiated spec still contains '{{'");
  }
  Instantiation out;
  out.replacements = sub.replacements;
  try {
    out.spec = experiment_spec_from_json(body);
  } catch (const Error& e) {
    throw Error(ErrorCode::ResultInvalid, std::string("instantiated spec: ") + e.what());
  }
  if (auto violations = validate_experiment_spec(out.spec); !violations.empty()) {
    throw Error(ErrorCode::ResultInvalid, "instantiated spec fails validation",
                to_json(violations));
  }
  return out;
}

TemplateRegistry::TemplateRegistry(Store& store) : store_(store) {
  for (const auto& [key, value] : store_.scan(kKeyPrefix)) {
    TemplateSpec t = template_from_json(value);
    templates_.emplace(t.name, std::move(t));
  }
}

void TemplateRegistry::register_template(const TemplateSpec& t) {
  if (auto violations = validate_template(t); !violations.empty()) {
    throw Error(ErrorCode::ValidationFailed, "template '" + t.name + "' is invalid",
                to_json(violations));
  }
  std::unique_lock lock(mu_);
  if (templates_.count(t.name)) {
    throw Error(ErrorCode::Conflict, "template '" + t.name + "' already registered");
  }
  store_.put(kKeyPrefix + t.name, to_json(t));
  templates_.emplace(t.name, t);
}

TemplateSpec TemplateRegistry::get(const std::string& name) const {
  std::shared_lock lock(mu_);
  auto it = templates_.find(name);
  if (it == templates_.end()) {
    throw Error(ErrorCode::NotFound, "template '" + name + "' not found");
  }
  return it->second;
}

std::vector<TemplateSummary> TemplateRegistry::list() const {
  std::shared_lock lock(mu_);
  std::vector<TemplateSummary> out;
  for (const auto& [name, t] : templates_) out.push_back({name, t.description});
  return out;
}

void TemplateRegistry::remove(const std::string& name) {
  std::unique_lock lock(mu_);
  if (!templates_.count(name)) {
    throw Error(ErrorCode::NotFound, "template '" + name + "' not found");
  }
  store_.erase(kKeyPrefix + name);
  templates_.erase(name);
}

Instantiation TemplateRegistry::instantiate(
    const std::string& name, const std::map<std::string, std::string>& params) const {
  return instantiate_template(get(name), params);
}

}  // namespace ct
