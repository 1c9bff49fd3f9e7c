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

#ifndef CT_SIM_SUBMITTER_H_
#define CT_SIM_SUBMITTER_H_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <mutex>
#include <thread>

#include "ct/cluster_sim.h"
#include "ct/submitter.h"

namespace ct {

// Submitter backed by ClusterSim. Simulated time only moves through
// advance(), or through the optional wall-clock driver started with
// start_clock().
class SimSubmitter : public Submitter {
 public:
  static constexpr int64_t kDefaultDurationMs = 1000;
  static constexpr const char* kDurationConfKey = "sim.duration_ms";

  explicit SimSubmitter(ClusterSim cluster);
  ~SimSubmitter() override;

  BackendKind kind() const override { return BackendKind::Simulated; }
  SubmissionHandle submit(const ExperimentRecord& record) override;
  BackendView poll(const SubmissionHandle& handle) const override;
  void stop(const std::string& experiment_id) override;

  void advance(int64_t dt_ms);
  void add_node(const std::string& id, const ResourceSpec& capacity);
  void remove_node(const std::string& id);
  ClusterState snapshot() const;

  // Advances simulated time by elapsed wall time every `period`.
  void start_clock(std::chrono::milliseconds period);
  void stop_clock();

 private:
  // Caller holds mu_.
  void dispatch(const std::vector<SimNotice>& notices);

  ClusterSim cluster_;
  // Held across dispatch so that notices reach the monitor in order.
  mutable std::mutex mu_;

  std::thread clock_thread_;
  std::mutex clock_mu_;
  std::condition_variable clock_cv_;
  bool clock_running_ = false;
};

}  // namespace ct

#endif  // CT_SIM_SUBMITTER_H_
