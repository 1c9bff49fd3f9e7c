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

#include <gtest/gtest.h>

#include <random>

#include "ct/error.h"
#include "scheduler_oracles.h"

namespace ct {
namespace {

using Kind = SimNotice::Kind;

Demand workers(int64_t n, ResourceSpec each) {
  ExperimentSpec spec;
  spec.tasks["Worker"] = {n, each, std::nullopt};
  return aggregate_demand(spec);
}

ClusterSim two_nodes() {
  ClusterSim sim;
  sim.add_node("n0", {8, 4, 8192});
  sim.add_node("n1", {8, 4, 8192});
  return sim;
}

std::vector<Kind> kinds(const std::vector<SimNotice>& ns) {
  std::vector<Kind> out;
  for (const auto& n : ns) out.push_back(n.kind);
  return out;
}

TEST(ClusterSim, WholeClusterJobsQueueFifo) {
  ClusterSim sim = two_nodes();
  auto a = sim.submit("a", workers(2, {8, 4, 8192}), 100);
  EXPECT_EQ(kinds(a), std::vector<Kind>{Kind::Scheduled});
  auto b = sim.submit("b", workers(2, {8, 4, 8192}), 100);
  EXPECT_EQ(kinds(b), std::vector<Kind>{Kind::Queued});
  EXPECT_EQ(sim.phase("b"), ClusterSim::Phase::Queued);

  EXPECT_TRUE(sim.tick(99).empty());
  auto t = sim.tick(1);
  ASSERT_EQ(kinds(t), (std::vector<Kind>{Kind::Completed, Kind::Scheduled}));
  EXPECT_EQ(t[0].experiment_id, "a");
  EXPECT_EQ(t[1].experiment_id, "b");
  EXPECT_EQ(sim.phase("a"), ClusterSim::Phase::Completed);
  EXPECT_EQ(sim.phase("b"), ClusterSim::Phase::Running);
  EXPECT_EQ(sim.clock_ms(), 100);
}

TEST(ClusterSim, TooBigFailsImmediately) {
  ClusterSim sim = two_nodes();
  auto n = sim.submit("big", workers(4, {1, 4, 1}), 100);
  ASSERT_EQ(kinds(n), std::vector<Kind>{Kind::Failed});
  EXPECT_EQ(n[0].reason, "exceeds cluster capacity");
  EXPECT_EQ(sim.phase("big"), ClusterSim::Phase::Unknown);
}

TEST(ClusterSim, TickZeroChangesNothing) {
  ClusterSim sim = two_nodes();
  sim.submit("a", workers(1, {1, 1, 1}), 0);
  auto before = to_json(sim.snapshot());
  EXPECT_TRUE(sim.tick(0).empty());
  EXPECT_EQ(to_json(sim.snapshot()), before);
  EXPECT_EQ(kinds(sim.tick(1)), std::vector<Kind>{Kind::Completed});
}

TEST(ClusterSim, NoOvertaking) {
  ClusterSim sim = two_nodes();
  sim.submit("a", workers(1, {8, 4, 8192}), 100);
  sim.submit("b", workers(2, {8, 4, 8192}), 100);  // must wait for a
  // c would fit beside a right now, but b is ahead of it.
  EXPECT_EQ(kinds(sim.submit("c", workers(1, {1, 1, 1}), 100)), std::vector<Kind>{Kind::Queued});
  auto t = sim.tick(100);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[1].experiment_id, "b");
  EXPECT_EQ(sim.phase("c"), ClusterSim::Phase::Queued);
}

TEST(ClusterSim, CancelHeadStartsNext) {
  ClusterSim sim = two_nodes();
  sim.submit("a", workers(2, {8, 4, 8192}), 100);
  sim.submit("b", workers(2, {8, 4, 8192}), 100);
  auto n = sim.cancel("a");
  ASSERT_EQ(kinds(n), std::vector<Kind>{Kind::Scheduled});
  EXPECT_EQ(n[0].experiment_id, "b");
  EXPECT_EQ(sim.phase("a"), ClusterSim::Phase::Unknown);
  EXPECT_TRUE(sim.cancel("nobody").empty());
}

TEST(ClusterSim, DuplicateSubmitConflicts) {
  ClusterSim sim = two_nodes();
  sim.submit("a", workers(1, {1, 1, 1}), 100);
  try {
    sim.submit("a", workers(1, {1, 1, 1}), 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Conflict);
  }
}

TEST(ClusterAdmin, AddRemove) {
  ClusterSim sim = two_nodes();
  try {
    sim.add_node("n0", {1, 1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateNodeId);
  }
  sim.submit("a", workers(1, {8, 4, 8192}), 100);
  const std::string busy = sim.snapshot().placed.at("a").node_of.at("Worker-0");
  try {
    sim.remove_node(busy);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Refused);
  }
  try {
    sim.remove_node("zz");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotFound);
  }
  const std::string idle = busy == "n0" ? "n1" : "n0";
  sim.remove_node(idle);
  // Needs both nodes now that only one is left: fails outright.
  EXPECT_EQ(kinds(sim.submit("b", workers(2, {8, 4, 8192}), 100)),
            std::vector<Kind>{Kind::Failed});
  // Fits the remaining node once it frees up: queued.
  EXPECT_EQ(kinds(sim.submit("c", workers(1, {8, 4, 8192}), 100)),
            std::vector<Kind>{Kind::Queued});
  // New capacity lets the queue head start.
  EXPECT_EQ(kinds(sim.add_node("n9", {8, 4, 8192})), std::vector<Kind>{Kind::Scheduled});
}

TEST(ClusterAdmin, ParseYaml) {
  auto nodes = parse_cluster_yaml(R"(
nodes:
  - id: n0
    resources: "cpu=16,gpu=4,memory=32G"
  - id: n1
    resources: "cpu=8,memory=16G"
)");
  ASSERT_EQ(nodes.size(), 2u);
  EXPECT_EQ(nodes[0].capacity, (ResourceSpec{16, 4, 32768}));
  EXPECT_EQ(nodes[1].node_id, "n1");
  EXPECT_THROW(parse_cluster_yaml("nodes: 3"), Error);
  EXPECT_THROW(parse_cluster_yaml("nodes:\n  - id: a\n    resources: cpu=1\n  - id: a\n"
                                  "    resources: cpu=1\n"),
               Error);
}

TEST(ClusterSnapshot, JsonShape) {
  ClusterSim sim = two_nodes();
  sim.submit("a", workers(1, {1, 1, 1}), 100);
  Json j = to_json(sim.snapshot());
  EXPECT_EQ(j["nodes"].size(), 2u);
  EXPECT_EQ(j["clockMs"], 0);
  EXPECT_EQ(j["placed"]["a"]["Worker-0"], "n0");
  EXPECT_TRUE(j["waitQueue"].empty());
}

// Random sequences of submit / tick / cancel / add / remove, checking the
// invariants after every step and FIFO start order throughout.
TEST(ClusterSimProperties, ConservationAtomicityFifo) {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    ClusterSim sim;
    for (int i = 0; i < 3; ++i) {
      sim.add_node("n" + std::to_string(i), {8, 4, 64});
    }
    std::map<std::string, int64_t> gang_sizes;
    std::vector<std::string> enqueued;   // queue entry order
    std::vector<std::string> started;    // of those, in start order
    std::set<std::string> queued_ids;
    int next_id = 0, next_node = 3;
    auto withdraw = [&](const std::string& id) {
      enqueued.erase(std::find(enqueued.begin(), enqueued.end(), id));
    };
    auto absorb = [&](const std::vector<SimNotice>& ns) {
      for (const auto& n : ns) {
        if (n.kind == Kind::Queued) {
          enqueued.push_back(n.experiment_id);
          queued_ids.insert(n.experiment_id);
        } else if (n.kind == Kind::Scheduled && queued_ids.erase(n.experiment_id)) {
          started.push_back(n.experiment_id);
        } else if (n.kind == Kind::Failed && queued_ids.erase(n.experiment_id)) {
          withdraw(n.experiment_id);
        }
      }
    };
    for (int step = 0; step < 1000; ++step) {
      switch (rng() % 6) {
        case 0:
        case 1: {
          const std::string id = "e" + std::to_string(next_id++);
          int64_t n = 1 + rng() % 4;
          gang_sizes[id] = n;
          absorb(sim.submit(id, workers(n, {int64_t(1 + rng() % 6), int64_t(rng() % 3),
                                            int64_t(1 + rng() % 40)}),
                            int64_t(rng() % 50)));
          break;
        }
        case 2:
        case 3:
          absorb(sim.tick(rng() % 30));
          break;
        case 4: {
          auto s = sim.snapshot();
          std::vector<std::string> ids;
          for (const auto& [id, _] : s.placed) ids.push_back(id);
          for (const auto& id : s.wait_queue) ids.push_back(id);
          if (!ids.empty()) {
            const std::string id = ids[rng() % ids.size()];
            if (queued_ids.erase(id)) withdraw(id);
            absorb(sim.cancel(id));
          }
          break;
        }
        default: {
          auto s = sim.snapshot();
          if (rng() % 2 || s.nodes.size() <= 1) {
            absorb(sim.add_node("n" + std::to_string(next_node++), {8, 4, 64}));
          } else {
            const std::string id = s.nodes[rng() % s.nodes.size()].node_id;
            try {
              absorb(sim.remove_node(id));
            } catch (const Error& e) {
              ASSERT_EQ(e.code(), ErrorCode::Refused);
            }
          }
        }
      }
      ASSERT_EQ(testing::sim_invariant_violation(sim.snapshot(), gang_sizes), "")
          << "seed " << seed << " step " << step;
      // Started ones are a prefix of the entry order, minus withdrawn ones.
      for (size_t k = 0; k < started.size(); ++k) {
        ASSERT_EQ(started[k], enqueued[k]) << "seed " << seed << " step " << step;
      }
      auto q = sim.snapshot().wait_queue;
      ASSERT_EQ(std::vector<std::string>(q.begin(), q.end()),
                std::vector<std::string>(enqueued.begin() + started.size(), enqueued.end()));
    }
  }
}

}  // namespace
}  // namespace ct
