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

#include "ct/experiment_service.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <random>

#include "ct/error.h"

namespace ct {
namespace {

const std::string kCorePrefix = "experiment/";
const std::string kEventsPrefix = "experiment-events/";
const std::string kMetricsPrefix = "experiment-metrics/";
const std::string kLogsPrefix = "experiment-logs/";

std::string status_detail(ExperimentStatus s, const std::string& reason) {
  std::string out(to_string(s));
  if (!reason.empty()) out += ": " + reason;
  return out;
}

}  // namespace

std::string_view to_string(BackendKind k) {
  return k == BackendKind::Local ? "local" : "simulated";
}

std::string_view to_string(BackendView::State s) {
  switch (s) {
    case BackendView::State::Pending: return "Pending";
    case BackendView::State::Running: return "Running";
    case BackendView::State::Exited: return "Exited";
  }
  return "Pending";
}

// ---------------------------------------------------------------------------
// Record encoding

Json core_to_json(const ExperimentRecord& r) {
  Json out = {{"id", r.id},
              {"spec", to_json(r.spec)},
              {"resolvedImage", r.resolved_image},
              {"status", to_string(r.status)},
              {"placement", r.placement},
              {"createdAt", r.created_at_ms},
              {"finishedAt", r.finished_at_ms ? Json(*r.finished_at_ms) : Json(nullptr)},
              {"artifactUris", r.artifact_uris}};
  if (r.resolved_environment) out["environment"] = to_json(*r.resolved_environment);
  if (r.provenance) {
    out["provenance"] = {{"template", r.provenance->template_name},
                         {"params", r.provenance->params}};
  }
  return out;
}

Json to_json(const ExperimentRecord& r) {
  Json out = core_to_json(r);
  Json events = Json::array();
  for (const auto& e : r.events) events.push_back(to_json(e));
  Json metrics = Json::array();
  for (const auto& m : r.metrics) metrics.push_back(to_json(m));
  out["events"] = std::move(events);
  out["metrics"] = std::move(metrics);
  out["logs"] = r.logs;
  return out;
}

ExperimentRecord record_from_core_json(const Json& j) {
  ExperimentRecord r;
  r.id = j.at("id").get<std::string>();
  r.spec = experiment_spec_from_json(j.at("spec"));
  r.resolved_image = j.at("resolvedImage").get<std::string>();
  auto status = parse_status(j.at("status").get<std::string>());
  if (!status) throw Error(ErrorCode::StoreCorrupt, "record " + r.id + " has an unknown status");
  r.status = *status;
  r.placement = j.at("placement").get<std::map<std::string, std::string>>();
  r.created_at_ms = j.at("createdAt").get<int64_t>();
  if (!j.at("finishedAt").is_null()) r.finished_at_ms = j.at("finishedAt").get<int64_t>();
  r.artifact_uris = j.at("artifactUris").get<std::vector<std::string>>();
  if (auto it = j.find("environment"); it != j.end()) {
    r.resolved_environment = environment_from_json(*it);
  }
  if (auto it = j.find("provenance"); it != j.end()) {
    r.provenance = TemplateProvenance{
        it->at("template").get<std::string>(),
        it->at("params").get<std::map<std::string, std::string>>()};
  }
  return r;
}

std::optional<ExperimentStatus> status_of_event(const Event& e) {
  if (e.kind != EventKind::StatusChange) return std::nullopt;
  return parse_status(std::string_view(e.detail).substr(0, e.detail.find(':')));
}

Json to_json(const ExperimentSummary& s) {
  return {{"id", s.id},
          {"name", s.name},
          {"namespace", s.ns},
          {"status", to_string(s.status)},
          {"createdAt", s.created_at_ms}};
}

// ---------------------------------------------------------------------------
// Service

int64_t ExperimentService::system_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

ExperimentService::ExperimentService(Store& store, EnvironmentRegistry& environments,
                                     TemplateRegistry& templates, Submitter* submitter,
                                     Clock clock)
    : store_(store),
      environments_(environments),
      templates_(templates),
      submitter_(submitter),
      clock_(std::move(clock)) {
  load();
  if (submitter_) submitter_->attach(this);
  environments_.set_in_use_check(
      [this](const std::string& name) { return environment_in_use(name); });
}

// The submitter may already be gone here (ControlPlane tears it down
// first), so it is not touched.
ExperimentService::~ExperimentService() { environments_.set_in_use_check(nullptr); }

void ExperimentService::load() {
  for (const auto& [key, core] : store_.scan(kCorePrefix)) {
    auto entry = std::make_shared<Entry>();
    ExperimentRecord& r = entry->record;
    r = record_from_core_json(core);
    if (auto events = store_.get(kEventsPrefix + r.id)) {
      for (const auto& e : *events) r.events.push_back(event_from_json(e));
    }
    if (auto metrics = store_.get(kMetricsPrefix + r.id)) {
      for (const auto& m : *metrics) r.metrics.push_back(metric_from_json(m));
    }
    if (auto logs = store_.get(kLogsPrefix + r.id)) {
      for (const auto& l : *logs) {
        r.logs[l.at("task").get<std::string>()] += l.at("line").get<std::string>() + "\n";
      }
    }
    last_created_ms_ = std::max(last_created_ms_, r.created_at_ms);
    entries_.emplace(r.id, std::move(entry));
  }
  for (auto& [id, entry] : entries_) {
    std::lock_guard<std::mutex> lock(entry->mu);
    if (!is_terminal(entry->record.status)) {
      transition_locked(*entry, ExperimentStatus::Failed, "orphaned at restart");
    }
  }
}

std::shared_ptr<ExperimentService::Entry> ExperimentService::find(const std::string& id) const {
  std::shared_lock lock(map_mu_);
  auto it = entries_.find(id);
  if (it == entries_.end()) {
    throw Error(ErrorCode::NotFound, "experiment '" + id + "' not found");
  }
  return it->second;
}

std::string ExperimentService::fresh_id() const {
  static constexpr char kHex[] = "0123456789abcdef";
  std::random_device rd;
  while (true) {
    std::string id = "exp-";
    for (int i = 0; i < 12; ++i) id += kHex[rd() & 0xf];
    if (!entries_.count(id)) return id;
  }
}

Event& ExperimentService::push_event(ExperimentRecord& r, EventKind kind, std::string detail) {
  Event e;
  e.timestamp_ms = clock_();
  if (!r.events.empty()) {
    e.timestamp_ms = std::max(e.timestamp_ms, r.events.back().timestamp_ms);
    e.seq = r.events.back().seq + 1;
  }
  e.kind = kind;
  e.detail = std::move(detail);
  e.late = is_terminal(r.status) && kind != EventKind::StatusChange;
  r.events.push_back(std::move(e));
  return r.events.back();
}

ExperimentRecord ExperimentService::transition_locked(Entry& entry, ExperimentStatus next,
                                                      const std::string& reason) {
  ExperimentRecord& r = entry.record;
  if (!is_legal_transition(r.status, next)) {
    throw Error(ErrorCode::IllegalTransition,
                "illegal transition " + std::string(to_string(r.status)) + " -> " +
                    std::string(to_string(next)) + " for " + r.id);
  }
  ExperimentRecord before = r;
  r.status = next;
  const Event& e = push_event(r, EventKind::StatusChange, status_detail(next, reason));
  if (is_terminal(next)) r.finished_at_ms = e.timestamp_ms;
  try {
    store_.commit({Store::Op::put(kCorePrefix + r.id, core_to_json(r)),
                   Store::Op::append(kEventsPrefix + r.id, to_json(e))});
  } catch (...) {
    r = std::move(before);
    throw;
  }
  return r;
}

ExperimentRecord ExperimentService::create(ExperimentSpec spec,
                                           std::optional<TemplateProvenance> provenance) {
  if (auto violations = validate_experiment_spec(spec); !violations.empty()) {
    throw Error(ErrorCode::ValidationFailed, "experiment spec is invalid", to_json(violations));
  }
  aggregate_demand(spec);  // surfaces ArithmeticOverflow before anything is stored

  auto entry = std::make_shared<Entry>();
  ExperimentRecord& r = entry->record;
  if (spec.environment.is_registered()) {
    try {
      r.resolved_environment = environments_.get(spec.environment.name);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotFound) throw;
      throw Error(ErrorCode::EnvironmentNotFound,
                  "environment '" + spec.environment.name + "' is not registered");
    }
    r.resolved_image = r.resolved_environment->image;
  } else {
    r.resolved_image = spec.environment.image;
  }
  r.spec = std::move(spec);
  r.provenance = std::move(provenance);
  r.status = ExperimentStatus::Accepted;

  ExperimentRecord snapshot;
  {
    std::unique_lock map_lock(map_mu_);
    r.id = fresh_id();
    // Strictly increasing so that newest-first listing is total.
    r.created_at_ms = std::max(clock_(), last_created_ms_ + 1);
    last_created_ms_ = r.created_at_ms;
    const Event& e = push_event(r, EventKind::StatusChange, status_detail(r.status, "created"));
    store_.commit({Store::Op::put(kCorePrefix + r.id, core_to_json(r)),
                   Store::Op::append(kEventsPrefix + r.id, to_json(e))});
    entries_.emplace(r.id, entry);
    snapshot = r;
  }

  if (submitter_) {
    try {
      SubmissionHandle handle = submitter_->submit(snapshot);
      std::unique_lock map_lock(map_mu_);
      handles_[snapshot.id] = std::move(handle);
    } catch (const Error& e) {
      std::lock_guard<std::mutex> lock(entry->mu);
      push_event(entry->record, EventKind::Error,
                 std::string(e.code_name()) + ": " + e.what());
      store_.append(kEventsPrefix + snapshot.id, to_json(entry->record.events.back()));
      if (!is_terminal(entry->record.status)) {
        transition_locked(*entry, ExperimentStatus::Failed, e.what());
      }
    }
  }
  return snapshot;
}

ExperimentRecord ExperimentService::create_experiment(const ExperimentSpec& spec) {
  return create(spec, std::nullopt);
}

ExperimentRecord ExperimentService::create_from_template(
    const std::string& name, const std::map<std::string, std::string>& params) {
  Instantiation inst = templates_.instantiate(name, params);
  return create(std::move(inst.spec), TemplateProvenance{name, params});
}

ExperimentRecord ExperimentService::transition_status(const std::string& id,
                                                      ExperimentStatus next,
                                                      const std::string& reason) {
  auto entry = find(id);
  std::lock_guard<std::mutex> lock(entry->mu);
  return transition_locked(*entry, next, reason);
}

TelemetryAck ExperimentService::append_event(const std::string& id, EventKind kind,
                                             const std::string& detail) {
  if (kind == EventKind::StatusChange) {
    throw Error(ErrorCode::ParseError, "status changes are not accepted as telemetry");
  }
  auto entry = find(id);
  std::lock_guard<std::mutex> lock(entry->mu);
  const Event& e = push_event(entry->record, kind, detail);
  store_.append(kEventsPrefix + id, to_json(e));
  return {e.late};
}

TelemetryAck ExperimentService::append_metric(const std::string& id, MetricPoint point) {
  if (!std::isfinite(point.value)) {
    throw Error(ErrorCode::NonFiniteMetric, "metric '" + point.key + "' is not finite");
  }
  auto entry = find(id);
  std::lock_guard<std::mutex> lock(entry->mu);
  ExperimentRecord& r = entry->record;
  point.timestamp_ms = clock_();
  point.late = is_terminal(r.status);
  store_.append(kMetricsPrefix + id, to_json(point));
  r.metrics.push_back(std::move(point));
  return {r.metrics.back().late};
}

TelemetryAck ExperimentService::append_log(const std::string& id, const std::string& task,
                                           const std::string& line) {
  auto entry = find(id);
  std::lock_guard<std::mutex> lock(entry->mu);
  ExperimentRecord& r = entry->record;
  const Event& e = push_event(r, EventKind::LogLine, task + ": " + line);
  store_.commit({Store::Op::append(kLogsPrefix + id, {{"task", task}, {"line", line}}),
                 Store::Op::append(kEventsPrefix + id, to_json(e))});
  r.logs[task] += line + "\n";
  return {e.late};
}

ExperimentRecord ExperimentService::get(const std::string& id) const {
  auto entry = find(id);
  std::lock_guard<std::mutex> lock(entry->mu);
  return entry->record;
}

std::vector<ExperimentSummary> ExperimentService::list(const std::optional<std::string>& ns,
                                                       std::optional<size_t> limit) const {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::shared_lock lock(map_mu_);
    for (const auto& [_, e] : entries_) entries.push_back(e);
  }
  std::vector<ExperimentSummary> out;
  for (const auto& entry : entries) {
    std::lock_guard<std::mutex> lock(entry->mu);
    const ExperimentRecord& r = entry->record;
    if (ns && r.spec.meta.ns != *ns) continue;
    out.push_back({r.id, r.spec.meta.name, r.spec.meta.ns, r.status, r.created_at_ms});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.created_at_ms != b.created_at_ms) return a.created_at_ms > b.created_at_ms;
    return a.id < b.id;
  });
  if (limit && out.size() > *limit) out.resize(*limit);
  return out;
}

ExperimentRecord ExperimentService::kill(const std::string& id) {
  auto entry = find(id);
  {
    std::lock_guard<std::mutex> lock(entry->mu);
    if (is_terminal(entry->record.status)) {
      throw Error(ErrorCode::AlreadyTerminal,
                  "experiment '" + id + "' is already " +
                      std::string(to_string(entry->record.status)));
    }
    transition_locked(*entry, ExperimentStatus::Killed, "killed by user");
  }
  if (submitter_) submitter_->stop(id);
  return get(id);
}

std::string ExperimentService::logs_text(const std::string& id) const {
  ExperimentRecord r = get(id);
  std::string out;
  for (const auto& [task, text] : r.logs) {
    out += "=== " + task + " ===\n" + text;
  }
  return out;
}

std::optional<SubmissionHandle> ExperimentService::handle_of(const std::string& id) const {
  std::shared_lock lock(map_mu_);
  auto it = handles_.find(id);
  if (it == handles_.end()) return std::nullopt;
  return it->second;
}

bool ExperimentService::environment_in_use(const std::string& name) const {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::shared_lock lock(map_mu_);
    for (const auto& [_, e] : entries_) entries.push_back(e);
  }
  for (const auto& entry : entries) {
    std::lock_guard<std::mutex> lock(entry->mu);
    const ExperimentRecord& r = entry->record;
    if (r.spec.environment.name == name && !is_terminal(r.status)) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Monitor

void ExperimentService::report_status(const std::string& id, ExperimentStatus status,
                                      const std::string& reason) {
  try {
    auto entry = find(id);
    std::lock_guard<std::mutex> lock(entry->mu);
    if (!is_legal_transition(entry->record.status, status)) return;
    transition_locked(*entry, status, reason);
  } catch (const Error& e) {
    std::cerr << "monitor: dropped status report for " << id << ": " << e.what() << "\n";
  }
}

void ExperimentService::report_event(const std::string& id, EventKind kind,
                                     const std::string& detail) {
  try {
    append_event(id, kind, detail);
  } catch (const Error& e) {
    std::cerr << "monitor: dropped event for " << id << ": " << e.what() << "\n";
  }
}

void ExperimentService::report_log(const std::string& id, const std::string& task,
                                   const std::string& line) {
  try {
    append_log(id, task, line);
  } catch (const Error& e) {
    std::cerr << "monitor: dropped log line for " << id << ": " << e.what() << "\n";
  }
}

void ExperimentService::report_placement(const std::string& id,
                                         const std::map<std::string, std::string>& placement) {
  try {
    auto entry = find(id);
    std::lock_guard<std::mutex> lock(entry->mu);
    entry->record.placement = placement;
    store_.put(kCorePrefix + id, core_to_json(entry->record));
  } catch (const Error& e) {
    std::cerr << "monitor: dropped placement for " << id << ": " << e.what() << "\n";
  }
}

void ExperimentService::report_artifact(const std::string& id, const std::string& uri) {
  try {
    auto entry = find(id);
    std::lock_guard<std::mutex> lock(entry->mu);
    entry->record.artifact_uris.push_back(uri);
    store_.put(kCorePrefix + id, core_to_json(entry->record));
  } catch (const Error& e) {
    std::cerr << "monitor: dropped artifact for " << id << ": " << e.what() << "\n";
  }
}

}  // namespace ct
