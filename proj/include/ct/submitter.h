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

#ifndef CT_SUBMITTER_H_
#define CT_SUBMITTER_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ct/experiment_record.h"

namespace ct {

// Backend -> control plane reporting. Implemented by the experiment service;
// every call is serialized per experiment id there. Reports that no longer
// apply (e.g. a Succeeded report racing a kill) are dropped silently.
class Monitor {
 public:
  virtual ~Monitor() = default;
  virtual void report_status(const std::string& id, ExperimentStatus status,
                             const std::string& reason) = 0;
  virtual void report_event(const std::string& id, EventKind kind,
                            const std::string& detail) = 0;
  virtual void report_log(const std::string& id, const std::string& task,
                          const std::string& line) = 0;
  virtual void report_placement(const std::string& id,
                                const std::map<std::string, std::string>& placement) = 0;
  virtual void report_artifact(const std::string& id, const std::string& uri) = 0;
};

enum class BackendKind { Local, Simulated };
std::string_view to_string(BackendKind k);

struct SubmissionHandle {
  std::string experiment_id;
  BackendKind backend = BackendKind::Local;
  std::string backend_token;
};

// What the backend itself believes, independent of the record's status.
struct BackendView {
  enum class State { Pending, Running, Exited };
  State state = State::Pending;
  // Exit code per task instance once Exited (simulated tasks report 0).
  std::map<std::string, int> exit_codes;

  bool all_zero() const {
    for (const auto& [_, code] : exit_codes) {
      if (code != 0) return false;
    }
    return true;
  }
};
std::string_view to_string(BackendView::State s);

// A pluggable execution backend. Implementations must return from submit()
// promptly and report the rest of the lifecycle through the Monitor.
class Submitter {
 public:
  virtual ~Submitter() = default;

  virtual BackendKind kind() const = 0;
  void attach(Monitor* monitor) { monitor_ = monitor; }

  // Pre: record.status == Accepted. Throws ResourceSpecUnsupported,
  // BackendUnavailable or Conflict (live handle exists).
  virtual SubmissionHandle submit(const ExperimentRecord& record) = 0;
  // Throws UnknownHandle.
  virtual BackendView poll(const SubmissionHandle& handle) const = 0;
  // Stops everything belonging to the experiment and returns once it is
  // gone. No-op for unknown ids.
  virtual void stop(const std::string& experiment_id) = 0;

 protected:
  Monitor* monitor_ = nullptr;
};

}  // namespace ct

#endif  // CT_SUBMITTER_H_
