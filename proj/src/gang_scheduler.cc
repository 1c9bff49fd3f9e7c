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

#include "ct/gang_scheduler.h"

#include <algorithm>
#include <numeric>
#include <tuple>

namespace ct {
namespace {

// Largest first: the hardest instances fail fastest.
std::vector<size_t> placement_order(const std::vector<TaskInstance>& instances) {
  std::vector<size_t> order(instances.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto& ra = instances[a].resources;
    const auto& rb = instances[b].resources;
    return std::tie(ra.gpu, ra.memory_mib) > std::tie(rb.gpu, rb.memory_mib);
  });
  return order;
}

Placement to_placement(const std::vector<TaskInstance>& instances,
                       const std::vector<NodeState>& nodes,
                       const std::vector<size_t>& node_of_instance) {
  Placement out;
  for (size_t i = 0; i < instances.size(); ++i) {
    out.node_of[instances[i].id] = nodes[node_of_instance[i]].node_id;
    out.resources_of[instances[i].id] = instances[i].resources;
  }
  return out;
}

class ExhaustiveSearch {
 public:
  ExhaustiveSearch(const std::vector<TaskInstance>& instances, const std::vector<NodeState>& nodes)
      : instances_(instances), order_(placement_order(instances)) {
    for (const auto& n : nodes) free_.push_back(n.free());
    assignment_.assign(instances.size(), 0);
    // suffix_[k] = total demand of order_[k..]
    suffix_.assign(order_.size() + 1, ResourceSpec{});
    for (size_t k = order_.size(); k-- > 0;) {
      suffix_[k] = suffix_[k + 1] + instances_[order_[k]].resources;
    }
  }

  bool run() { return place(0); }
  const std::vector<size_t>& assignment() const { return assignment_; }

 private:
  using Key = std::pair<size_t, std::vector<std::tuple<int64_t, int64_t, int64_t>>>;

  // The rest of the problem only depends on the multiset of free capacities.
  Key memo_key(size_t k) const {
    Key key{k, {}};
    for (const auto& f : free_) key.second.emplace_back(f.vcores, f.gpu, f.memory_mib);
    std::sort(key.second.begin(), key.second.end());
    return key;
  }

  bool place(size_t k) {
    if (k == order_.size()) return true;
    ResourceSpec total_free;
    for (const auto& f : free_) {
      total_free = total_free + ResourceSpec{std::max<int64_t>(f.vcores, 0),
                                             std::max<int64_t>(f.gpu, 0),
                                             std::max<int64_t>(f.memory_mib, 0)};
    }
    if (!suffix_[k].fits_within(total_free)) return false;
    Key key = memo_key(k);
    if (failed_.count(key)) return false;

    const ResourceSpec& need = instances_[order_[k]].resources;
    for (size_t n = 0; n < free_.size(); ++n) {
      if (!need.fits_within(free_[n])) continue;
      // Nodes with identical free capacity are interchangeable.
      bool duplicate = false;
      for (size_t m = 0; m < n && !duplicate; ++m) duplicate = free_[m] == free_[n];
      if (duplicate) continue;
      free_[n] = free_[n] - need;
      assignment_[order_[k]] = n;
      bool ok = place(k + 1);
      free_[n] = free_[n] + need;
      if (ok) return true;
    }
    failed_.insert(std::move(key));
    return false;
  }

  const std::vector<TaskInstance>& instances_;
  std::vector<size_t> order_;
  std::vector<ResourceSpec> free_;
  std::vector<size_t> assignment_;
  std::vector<ResourceSpec> suffix_;
  std::set<Key> failed_;
};

}  // namespace

std::vector<TaskInstance> expand_instances(const Demand& demand) {
  std::vector<TaskInstance> out;
  for (const auto& [role, rd] : demand.roles) {
    for (int64_t rank = 0; rank < rd.replicas; ++rank) {
      out.push_back({role + "-" + std::to_string(rank), rd.per_replica});
    }
  }
  return out;
}

std::optional<Placement> exhaustive_schedule(const std::vector<TaskInstance>& instances,
                                             const std::vector<NodeState>& nodes) {
  ExhaustiveSearch search(instances, nodes);
  if (!search.run()) return std::nullopt;
  return to_placement(instances, nodes, search.assignment());
}

std::optional<Placement> gang_schedule(const std::vector<TaskInstance>& instances,
                                       const std::vector<NodeState>& nodes) {
  if (instances.empty()) return Placement{};

  std::vector<size_t> by_id(nodes.size());
  std::iota(by_id.begin(), by_id.end(), 0);
  std::sort(by_id.begin(), by_id.end(),
            [&](size_t a, size_t b) { return nodes[a].node_id < nodes[b].node_id; });

  std::vector<ResourceSpec> free;
  free.reserve(nodes.size());
  for (const auto& n : nodes) free.push_back(n.free());

  std::vector<size_t> chosen(instances.size(), 0);
  bool feasible = true;
  for (size_t i : placement_order(instances)) {
    const ResourceSpec& need = instances[i].resources;
    std::optional<size_t> best;
    std::pair<int64_t, int64_t> best_leftover;
    for (size_t n : by_id) {
      if (!need.fits_within(free[n])) continue;
      std::pair<int64_t, int64_t> leftover{free[n].gpu - need.gpu,
                                           free[n].memory_mib - need.memory_mib};
      // Strict < keeps the lowest node id on ties.
      if (!best || leftover < best_leftover) {
        best = n;
        best_leftover = leftover;
      }
    }
    if (!best) {
      feasible = false;
      break;
    }
    free[*best] = free[*best] - need;
    chosen[i] = *best;
  }
  if (feasible) return to_placement(instances, nodes, chosen);

  if (instances.size() <= kExactMaxInstances && nodes.size() <= kExactMaxNodes) {
    return exhaustive_schedule(instances, nodes);
  }
  return std::nullopt;
}

std::optional<Placement> gang_schedule(const Demand& demand, const std::vector<NodeState>& nodes) {
  return gang_schedule(expand_instances(demand), nodes);
}

}  // namespace ct
