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

#ifndef CT_LOCAL_SUBMITTER_H_
#define CT_LOCAL_SUBMITTER_H_

#include <sys/types.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ct/submitter.h"

namespace ct {

// Runs every task instance as a local OS process (`/bin/sh -c <cmd>`), one
// process group each, with EXPERIMENT_ID / ROLE / RANK / NUM_WORKERS in the
// environment and a per-experiment scratch directory as working directory.
//
// Gang semantics: the experiment succeeds iff every process exits 0; the
// first nonzero exit stops the rest and fails the experiment.
class LocalSubmitter : public Submitter {
 public:
  struct Options {
    std::filesystem::path scratch_root = std::filesystem::temp_directory_path() / "ct-scratch";
    int64_t max_replicas = 16;
    std::chrono::milliseconds kill_grace{2000};
  };

  explicit LocalSubmitter(Options options);
  LocalSubmitter() : LocalSubmitter(Options{}) {}
  ~LocalSubmitter() override;

  BackendKind kind() const override { return BackendKind::Local; }
  SubmissionHandle submit(const ExperimentRecord& record) override;
  BackendView poll(const SubmissionHandle& handle) const override;
  void stop(const std::string& experiment_id) override;

  // Pids of children that have not been reaped yet (all experiments).
  std::vector<pid_t> live_pids() const;

 private:
  struct Process {
    std::string task;  // e.g. "Worker-1"
    pid_t pid = -1;
    int out_fd = -1;
    int err_fd = -1;
    std::string out_buf;
    std::string err_buf;
    bool exited = false;
    int exit_code = 0;
  };

  struct Run {
    std::string experiment_id;
    std::string token;
    std::vector<Process> processes;
    std::atomic<bool> stop_requested{false};
    std::atomic<bool> started{false};
    std::atomic<bool> finished{false};
    mutable std::mutex mu;  // guards processes' exit state for poll()
    std::thread supervisor;
  };

  void supervise(Run& run);
  void spawn_all(Run& run, const ExperimentRecord& record);
  void terminate_all(Run& run);
  void drain(Run& run, Process& p, bool flush);

  Options options_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Run>> runs_by_token_;
  std::map<std::string, std::shared_ptr<Run>> runs_by_experiment_;
  uint64_t next_token_ = 0;
};

}  // namespace ct

#endif  // CT_LOCAL_SUBMITTER_H_
