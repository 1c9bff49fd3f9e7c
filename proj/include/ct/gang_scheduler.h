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

#ifndef CT_GANG_SCHEDULER_H_
#define CT_GANG_SCHEDULER_H_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ct/experiment_spec.h"
#include "ct/resources.h"

namespace ct {

struct NodeState {
  std::string node_id;
  ResourceSpec capacity;
  ResourceSpec allocated;
  std::set<std::string> running_tasks;

  ResourceSpec free() const { return capacity - allocated; }
  friend bool operator==(const NodeState&, const NodeState&) = default;
};

struct TaskInstance {
  std::string id;  // "<role>-<rank>"
  ResourceSpec resources;
};

// Instances of a demand, roles in key order, ranks ascending.
std::vector<TaskInstance> expand_instances(const Demand& demand);

struct Placement {
  // instance id -> node id
  std::map<std::string, std::string> node_of;
  std::map<std::string, ResourceSpec> resources_of;

  friend bool operator==(const Placement&, const Placement&) = default;
};

// Below these sizes an Infeasible heuristic verdict is double-checked by
// exhaustive search, so the verdict is exact.
inline constexpr size_t kExactMaxInstances = 12;
inline constexpr size_t kExactMaxNodes = 8;

// All-or-nothing placement of every instance against the nodes' free
// capacity. Best-fit: instances by gpu desc then memory desc; each goes to
// the feasible node with the least leftover gpu, then least leftover memory,
// then lowest node id. `nodes` is not modified. nullopt means Infeasible.
std::optional<Placement> gang_schedule(const std::vector<TaskInstance>& instances,
                                       const std::vector<NodeState>& nodes);
std::optional<Placement> gang_schedule(const Demand& demand, const std::vector<NodeState>& nodes);

// Backtracking search for any assignment; exponential, used for small cases.
std::optional<Placement> exhaustive_schedule(const std::vector<TaskInstance>& instances,
                                             const std::vector<NodeState>& nodes);

}  // namespace ct

#endif  // CT_GANG_SCHEDULER_H_
