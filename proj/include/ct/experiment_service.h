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

#ifndef CT_EXPERIMENT_SERVICE_H_
#define CT_EXPERIMENT_SERVICE_H_

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "ct/environment_service.h"
#include "ct/experiment_record.h"
#include "ct/store.h"
#include "ct/submitter.h"
#include "ct/template_service.h"

namespace ct {

struct ExperimentSummary {
  std::string id;
  std::string name;
  std::string ns;
  ExperimentStatus status = ExperimentStatus::Accepted;
  int64_t created_at_ms = 0;
};
Json to_json(const ExperimentSummary& s);

struct TelemetryAck {
  // Accepted after the experiment reached a terminal status.
  bool late = false;
};

// Manager + monitor + stable store for experiments.
//
// Records live in memory and in the Store. Mutations on one experiment are
// serialized by a per-record mutex and persisted before they return; the
// submitter is always invoked without any record lock held, so backends may
// report synchronously from inside submit()/stop().
class ExperimentService : public Monitor {
 public:
  using Clock = std::function<int64_t()>;

  static int64_t system_now_ms();

  // Loads every persisted record. Non-terminal records have lost their
  // backend and are moved to Failed("orphaned at restart").
  ExperimentService(Store& store, EnvironmentRegistry& environments,
                    TemplateRegistry& templates, Submitter* submitter,
                    Clock clock = &ExperimentService::system_now_ms);
  ~ExperimentService() override;

  ExperimentService(const ExperimentService&) = delete;
  ExperimentService& operator=(const ExperimentService&) = delete;

  // Throws ValidationFailed (details = violations) or EnvironmentNotFound.
  // Returns the record as persisted, before the submitter ran.
  ExperimentRecord create_experiment(const ExperimentSpec& spec);
  ExperimentRecord create_from_template(const std::string& name,
                                        const std::map<std::string, std::string>& params);

  // Throws NotFound or IllegalTransition.
  ExperimentRecord transition_status(const std::string& id, ExperimentStatus next,
                                     const std::string& reason);

  // StatusChange events are refused here; status only moves through
  // transition_status. Throws NotFound / ParseError.
  TelemetryAck append_event(const std::string& id, EventKind kind, const std::string& detail);
  // Throws NotFound / NonFiniteMetric.
  TelemetryAck append_metric(const std::string& id, MetricPoint point);
  TelemetryAck append_log(const std::string& id, const std::string& task,
                          const std::string& line);

  ExperimentRecord get(const std::string& id) const;
  // Newest first.
  std::vector<ExperimentSummary> list(const std::optional<std::string>& ns = std::nullopt,
                                      std::optional<size_t> limit = std::nullopt) const;
  // Throws NotFound or AlreadyTerminal.
  ExperimentRecord kill(const std::string& id);
  // One "=== <task> ===" section per task instance.
  std::string logs_text(const std::string& id) const;

  std::optional<SubmissionHandle> handle_of(const std::string& id) const;
  bool environment_in_use(const std::string& name) const;

  // Monitor
  void report_status(const std::string& id, ExperimentStatus status,
                     const std::string& reason) override;
  void report_event(const std::string& id, EventKind kind, const std::string& detail) override;
  void report_log(const std::string& id, const std::string& task,
                  const std::string& line) override;
  void report_placement(const std::string& id,
                        const std::map<std::string, std::string>& placement) override;
  void report_artifact(const std::string& id, const std::string& uri) override;

 private:
  struct Entry {
    mutable std::mutex mu;
    ExperimentRecord record;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  std::string fresh_id() const;
  // Appends an event stamped no earlier than the record's last event.
  // Caller holds entry->mu.
  Event& push_event(ExperimentRecord& r, EventKind kind, std::string detail);
  ExperimentRecord transition_locked(Entry& entry, ExperimentStatus next,
                                     const std::string& reason);
  ExperimentRecord create(ExperimentSpec spec, std::optional<TemplateProvenance> provenance);
  void load();

  Store& store_;
  EnvironmentRegistry& environments_;
  TemplateRegistry& templates_;
  Submitter* submitter_;
  Clock clock_;

  mutable std::shared_mutex map_mu_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;
  std::map<std::string, SubmissionHandle> handles_;
  int64_t last_created_ms_ = 0;
};

}  // namespace ct

#endif  // CT_EXPERIMENT_SERVICE_H_
