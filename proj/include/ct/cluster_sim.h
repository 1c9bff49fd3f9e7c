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

#ifndef CT_CLUSTER_SIM_H_
#define CT_CLUSTER_SIM_H_

#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ct/gang_scheduler.h"

namespace ct {

struct ClusterState {
  std::vector<NodeState> nodes;
  std::deque<std::string> wait_queue;
  int64_t clock_ms = 0;
  // experiment id -> its gang placement, for every running experiment
  std::map<std::string, Placement> placed;
};
Json to_json(const ClusterState& s);

// Something the control plane must hear about.
struct SimNotice {
  enum class Kind { Scheduled, Queued, Completed, Failed };
  Kind kind;
  std::string experiment_id;
  Placement placement;  // Scheduled / Completed
  std::string reason;   // Failed
};

// Cluster config YAML:
//   nodes:
//     - id: n0
//       resources: "cpu=16,gpu=4,memory=32G"
std::vector<NodeState> parse_cluster_yaml(std::string_view text);

// Deterministic simulated cluster with FIFO gang scheduling. Not
// thread-safe; SimSubmitter serializes access.
class ClusterSim {
 public:
  ClusterSim() = default;
  explicit ClusterSim(std::vector<NodeState> nodes);

  // Throws DuplicateNodeId.
  std::vector<SimNotice> add_node(const std::string& id, const ResourceSpec& capacity);
  // Throws NotFound or Refused (node has running tasks).
  std::vector<SimNotice> remove_node(const std::string& id);
  ClusterState snapshot() const;

  // Runs now if the queue is empty and the gang fits; queues it if it would
  // fit an empty cluster; otherwise fails it. Throws Conflict for an id that
  // is already queued or running.
  std::vector<SimNotice> submit(const std::string& experiment_id, const Demand& demand,
                                int64_t duration_ms);
  // Advances simulated time, completing experiments in end-time order and
  // draining the queue head after each completion instant.
  std::vector<SimNotice> tick(int64_t dt_ms);
  // Drops a queued experiment or releases a running one.
  std::vector<SimNotice> cancel(const std::string& experiment_id);

  enum class Phase { Unknown, Queued, Running, Completed };
  Phase phase(const std::string& experiment_id) const;
  int64_t clock_ms() const { return clock_ms_; }

 private:
  struct Pending {
    std::vector<TaskInstance> instances;
    int64_t duration_ms = 0;
  };
  struct Running {
    Placement placement;
    int64_t end_ms = 0;
    uint64_t start_seq = 0;
  };

  bool fits_empty_cluster(const std::vector<TaskInstance>& instances) const;
  void allocate(const std::string& id, const Placement& placement, int64_t duration_ms);
  void release(const std::string& id);
  void drain_queue(std::vector<SimNotice>& out);
  NodeState* node(const std::string& id);

  std::vector<NodeState> nodes_;
  std::deque<std::string> queue_;
  std::map<std::string, Pending> pending_;
  std::map<std::string, Running> running_;
  std::set<std::string> completed_;
  int64_t clock_ms_ = 0;
  uint64_t start_seq_ = 0;
};

}  // namespace ct

#endif  // CT_CLUSTER_SIM_H_
