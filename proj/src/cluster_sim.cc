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

#include "ct/cluster_sim.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <limits>

#include "ct/error.h"

namespace ct {

Json to_json(const ClusterState& s) {
  Json nodes = Json::array();
  for (const auto& n : s.nodes) {
    nodes.push_back({{"id", n.node_id},
                     {"capacity", format_resource_string(n.capacity)},
                     {"allocated", format_resource_string(n.allocated)},
                     {"runningTasks", n.running_tasks}});
  }
  Json placed = Json::object();
  for (const auto& [id, p] : s.placed) placed[id] = p.node_of;
  return {{"nodes", std::move(nodes)},
          {"waitQueue", s.wait_queue},
          {"clockMs", s.clock_ms},
          {"placed", std::move(placed)}};
}

std::vector<NodeState> parse_cluster_yaml(std::string_view text) {
  std::vector<NodeState> out;
  try {
    YAML::Node root = YAML::Load(std::string(text));
    YAML::Node nodes = root["nodes"];
    if (!nodes || !nodes.IsSequence()) {
      throw Error(ErrorCode::YamlSyntax, "cluster config needs a 'nodes' list");
    }
    std::set<std::string> seen;
    for (const auto& n : nodes) {
      if (!n["id"] || !n["resources"]) {
        throw Error(ErrorCode::MissingField, "each node needs 'id' and 'resources'");
      }
      NodeState state;
      state.node_id = n["id"].as<std::string>();
      state.capacity = parse_resource_string(n["resources"].as<std::string>()).resources;
      if (!seen.insert(state.node_id).second) {
        throw Error(ErrorCode::DuplicateNodeId, "duplicate node id '" + state.node_id + "'");
      }
      out.push_back(std::move(state));
    }
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::YamlSyntax, e.what());
  }
  return out;
}

ClusterSim::ClusterSim(std::vector<NodeState> nodes) {
  for (auto& n : nodes) add_node(n.node_id, n.capacity);
}

NodeState* ClusterSim::node(const std::string& id) {
  for (auto& n : nodes_) {
    if (n.node_id == id) return &n;
  }
  return nullptr;
}

std::vector<SimNotice> ClusterSim::add_node(const std::string& id, const ResourceSpec& capacity) {
  if (node(id)) throw Error(ErrorCode::DuplicateNodeId, "node '" + id + "' already exists");
  if (!capacity.non_negative()) {
    throw Error(ErrorCode::NegativeValue, "node '" + id + "' has negative capacity");
  }
  nodes_.push_back({id, capacity, {}, {}});
  std::vector<SimNotice> out;
  drain_queue(out);
  return out;
}

std::vector<SimNotice> ClusterSim::remove_node(const std::string& id) {
  auto it = std::find_if(nodes_.begin(), nodes_.end(),
                         [&](const NodeState& n) { return n.node_id == id; });
  if (it == nodes_.end()) throw Error(ErrorCode::NotFound, "node '" + id + "' not found");
  if (!it->running_tasks.empty()) {
    throw Error(ErrorCode::Refused, "node '" + id + "' has running tasks");
  }
  nodes_.erase(it);
  std::vector<SimNotice> out;
  drain_queue(out);
  return out;
}

ClusterState ClusterSim::snapshot() const {
  ClusterState s;
  s.nodes = nodes_;
  s.wait_queue = queue_;
  s.clock_ms = clock_ms_;
  for (const auto& [id, r] : running_) s.placed[id] = r.placement;
  return s;
}

bool ClusterSim::fits_empty_cluster(const std::vector<TaskInstance>& instances) const {
  std::vector<NodeState> empty = nodes_;
  for (auto& n : empty) {
    n.allocated = {};
    n.running_tasks.clear();
  }
  return gang_schedule(instances, empty).has_value();
}

void ClusterSim::allocate(const std::string& id, const Placement& placement, int64_t duration_ms) {
  for (const auto& [inst, node_id] : placement.node_of) {
    NodeState* n = node(node_id);
    n->allocated = n->allocated + placement.resources_of.at(inst);
    n->running_tasks.insert(id + "/" + inst);
  }
  int64_t end = duration_ms > std::numeric_limits<int64_t>::max() - clock_ms_
                    ? std::numeric_limits<int64_t>::max()
                    : clock_ms_ + duration_ms;
  running_[id] = {placement, end, start_seq_++};
}

void ClusterSim::release(const std::string& id) {
  auto it = running_.find(id);
  for (const auto& [inst, node_id] : it->second.placement.node_of) {
    NodeState* n = node(node_id);
    n->allocated = n->allocated - it->second.placement.resources_of.at(inst);
    n->running_tasks.erase(id + "/" + inst);
  }
  running_.erase(it);
}

void ClusterSim::drain_queue(std::vector<SimNotice>& out) {
  while (!queue_.empty()) {
    const std::string id = queue_.front();
    Pending& p = pending_.at(id);
    if (!fits_empty_cluster(p.instances)) {
      queue_.pop_front();
      pending_.erase(id);
      out.push_back({SimNotice::Kind::Failed, id, {}, "exceeds cluster capacity"});
      continue;
    }
    auto placement = gang_schedule(p.instances, nodes_);
    if (!placement) break;  // FIFO: nobody overtakes the head
    allocate(id, *placement, p.duration_ms);
    queue_.pop_front();
    pending_.erase(id);
    out.push_back({SimNotice::Kind::Scheduled, id, *placement, {}});
  }
}

std::vector<SimNotice> ClusterSim::submit(const std::string& experiment_id, const Demand& demand,
                                          int64_t duration_ms) {
  if (pending_.count(experiment_id) || running_.count(experiment_id)) {
    throw Error(ErrorCode::Conflict, "experiment '" + experiment_id + "' already submitted");
  }
  completed_.erase(experiment_id);
  std::vector<TaskInstance> instances = expand_instances(demand);
  std::vector<SimNotice> out;
  if (queue_.empty()) {
    if (auto placement = gang_schedule(instances, nodes_)) {
      allocate(experiment_id, *placement, duration_ms);
      out.push_back({SimNotice::Kind::Scheduled, experiment_id, *placement, {}});
      return out;
    }
  }
  if (!fits_empty_cluster(instances)) {
    out.push_back({SimNotice::Kind::Failed, experiment_id, {}, "exceeds cluster capacity"});
    return out;
  }
  pending_[experiment_id] = {std::move(instances), duration_ms};
  queue_.push_back(experiment_id);
  out.push_back({SimNotice::Kind::Queued, experiment_id, {}, {}});
  return out;
}

std::vector<SimNotice> ClusterSim::tick(int64_t dt_ms) {
  std::vector<SimNotice> out;
  if (dt_ms <= 0) return out;
  const int64_t target = clock_ms_ + dt_ms;
  while (true) {
    int64_t next = std::numeric_limits<int64_t>::max();
    for (const auto& [_, r] : running_) next = std::min(next, r.end_ms);
    if (running_.empty() || next > target) break;
    clock_ms_ = std::max(clock_ms_, next);
    std::vector<std::pair<uint64_t, std::string>> done;
    for (const auto& [id, r] : running_) {
      if (r.end_ms <= clock_ms_) done.emplace_back(r.start_seq, id);
    }
    std::sort(done.begin(), done.end());
    for (const auto& [_, id] : done) {
      Placement placement = running_.at(id).placement;
      release(id);
      completed_.insert(id);
      out.push_back({SimNotice::Kind::Completed, id, std::move(placement), {}});
    }
    drain_queue(out);
  }
  clock_ms_ = target;
  return out;
}

std::vector<SimNotice> ClusterSim::cancel(const std::string& experiment_id) {
  std::vector<SimNotice> out;
  if (auto it = std::find(queue_.begin(), queue_.end(), experiment_id); it != queue_.end()) {
    bool was_head = it == queue_.begin();
    queue_.erase(it);
    pending_.erase(experiment_id);
    if (was_head) drain_queue(out);
  } else if (running_.count(experiment_id)) {
    release(experiment_id);
    drain_queue(out);
  }
  return out;
}

ClusterSim::Phase ClusterSim::phase(const std::string& experiment_id) const {
  if (pending_.count(experiment_id)) return Phase::Queued;
  if (running_.count(experiment_id)) return Phase::Running;
  if (completed_.count(experiment_id)) return Phase::Completed;
  return Phase::Unknown;
}

}  // namespace ct
