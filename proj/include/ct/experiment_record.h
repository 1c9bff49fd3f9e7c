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

#ifndef CT_EXPERIMENT_RECORD_H_
#define CT_EXPERIMENT_RECORD_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ct/environment_service.h"
#include "ct/experiment_spec.h"

namespace ct {

struct TemplateProvenance {
  std::string template_name;
  std::map<std::string, std::string> params;

  friend bool operator==(const TemplateProvenance&, const TemplateProvenance&) = default;
};

struct ExperimentRecord {
  std::string id;
  ExperimentSpec spec;
  std::string resolved_image;
  // Snapshot of the registry entry when the spec referenced one by name.
  std::optional<EnvironmentSpec> resolved_environment;
  ExperimentStatus status = ExperimentStatus::Accepted;
  std::vector<Event> events;
  std::vector<MetricPoint> metrics;
  // task instance -> captured text
  std::map<std::string, std::string> logs;
  // task instance -> node id
  std::map<std::string, std::string> placement;
  int64_t created_at_ms = 0;
  std::optional<int64_t> finished_at_ms;
  std::vector<std::string> artifact_uris;
  std::optional<TemplateProvenance> provenance;

  friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

// Full canonical form (what GET returns and golden tests compare).
Json to_json(const ExperimentRecord& r);

// The persisted "core" of a record: everything except the append-only
// events, metrics and logs, which are stored as separate lists.
Json core_to_json(const ExperimentRecord& r);
ExperimentRecord record_from_core_json(const Json& j);

// Status named by a StatusChange event ("Failed: reason" -> Failed).
std::optional<ExperimentStatus> status_of_event(const Event& e);

}  // namespace ct

#endif  // CT_EXPERIMENT_RECORD_H_
