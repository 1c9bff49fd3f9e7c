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

#ifndef CT_TEMPLATE_SERVICE_H_
#define CT_TEMPLATE_SERVICE_H_

#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "ct/experiment_spec.h"
#include "ct/store.h"

namespace ct {

struct TemplateParameter {
  std::string name;
  // UI prefill only; it never satisfies required=true.
  std::optional<std::string> value;
  bool required = false;

  friend bool operator==(const TemplateParameter&, const TemplateParameter&) = default;
};

struct TemplateSpec {
  std::string name;
  std::string author;
  std::string description;
  std::vector<TemplateParameter> parameters;
  // Raw experimentSpec skeleton; any string in it may hold {{param}} tokens.
  Json experiment_spec_body = Json::object();

  friend bool operator==(const TemplateSpec&, const TemplateSpec&) = default;
};

Json to_json(const TemplateSpec& t);
// Accepts the template file layout. Numeric/bool parameter values are kept as
// their JSON text. Throws Error{ParseError}.
TemplateSpec template_from_json(const Json& j);
// Reads a template file, tolerating trailing commas and multi-line strings.
TemplateSpec template_from_text(std::string_view text);

// Every {{name}} token in `s`, in order of appearance. Sets `unterminated`
// when a "{{" has no closing "}}".
std::vector<std::string> find_tokens(std::string_view s, bool* unterminated = nullptr);

struct Substitution {
  Json body;
  size_t replacements = 0;
};

// Literal, single-pass replacement of {{name}} in every string value of
// `body`. Tokens without a binding are left as-is.
Substitution substitute_tokens(const Json& body,
                               const std::map<std::string, std::string>& values);

std::vector<Violation> validate_template(const TemplateSpec& t);

struct Instantiation {
  ExperimentSpec spec;
  size_t replacements = 0;
};

// Pure instantiation against an in-hand template.
Instantiation instantiate_template(const TemplateSpec& t,
                                   const std::map<std::string, std::string>& params);

struct TemplateSummary {
  std::string name;
  std::string description;
};

// The template manager: a persisted registry keyed by template name.
class TemplateRegistry {
 public:
  explicit TemplateRegistry(Store& store);

  // Throws ValidationFailed (details = violations) or Conflict.
  void register_template(const TemplateSpec& t);
  // Throws NotFound.
  TemplateSpec get(const std::string& name) const;
  std::vector<TemplateSummary> list() const;
  void remove(const std::string& name);

  Instantiation instantiate(const std::string& name,
                            const std::map<std::string, std::string>& params) const;

 private:
  Store& store_;
  std::map<std::string, TemplateSpec> templates_;
  mutable std::shared_mutex mu_;
};

}  // namespace ct

#endif  // CT_TEMPLATE_SERVICE_H_
