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

#include "ct/local_submitter.h"

#include <gtest/gtest.h>
#include <signal.h>

#include <cerrno>

#include "ct/control_plane.h"
#include "ct/error.h"
#include "test_util.h"

namespace ct {
namespace {

using testing::TempDir;
using testing::wait_until;

ExperimentSpec shell_spec(const std::string& cmd, int64_t replicas = 1) {
  ExperimentSpec spec;
  spec.meta.name = "local";
  spec.meta.cmd = cmd;
  spec.environment.image = "none";
  spec.tasks["Worker"] = {replicas, {1, 0, 64}, std::nullopt};
  return spec;
}

bool process_exists(pid_t pid) { return ::kill(pid, 0) == 0 || errno != ESRCH; }

class LocalBackendTest : public ::testing::Test {
 protected:
  LocalBackendTest() {
    ControlPlaneOptions o;
    o.store_path = dir / "s.wal";
    o.store_sync = false;
    o.backend = BackendKind::Local;
    o.local.scratch_root = dir / "scratch";
    o.local.kill_grace = std::chrono::milliseconds(500);
    plane = std::make_unique<ControlPlane>(o);
  }

  ExperimentRecord run_to_end(const ExperimentSpec& spec) {
    const std::string id = plane->experiments().create_experiment(spec).id;
    EXPECT_TRUE(wait_until(
        [&] { return is_terminal(plane->experiments().get(id).status); },
        std::chrono::seconds(20)));
    // The supervisor reports the terminal status last; let it finish.
    EXPECT_TRUE(wait_until([&] {
      return plane->local()->poll(*plane->experiments().handle_of(id)).state ==
             BackendView::State::Exited;
    }));
    return plane->experiments().get(id);
  }

  int count(const ExperimentRecord& r, EventKind kind) {
    int n = 0;
    for (const auto& e : r.events) n += e.kind == kind;
    return n;
  }

  TempDir dir;
  std::unique_ptr<ControlPlane> plane;
};

TEST_F(LocalBackendTest, TwoReplicasSucceed) {
  ExperimentRecord r =
      run_to_end(shell_spec("echo rank=$RANK of $NUM_WORKERS role=$ROLE id=$EXPERIMENT_ID", 2));
  EXPECT_EQ(r.status, ExperimentStatus::Succeeded);
  EXPECT_EQ(count(r, EventKind::TaskFinished), 2);
  EXPECT_EQ(count(r, EventKind::TaskStarted), 2);
  EXPECT_EQ(r.logs.at("Worker-0"), "rank=0 of 2 role=Worker id=" + r.id + "\n");
  EXPECT_EQ(r.logs.at("Worker-1"), "rank=1 of 2 role=Worker id=" + r.id + "\n");
  EXPECT_EQ(r.placement.at("Worker-1"), "localhost");
  ASSERT_EQ(r.artifact_uris.size(), 1u);
  EXPECT_EQ(r.artifact_uris[0], "file://" + (dir / "scratch" / r.id).string());

  BackendView v = plane->local()->poll(*plane->experiments().handle_of(r.id));
  EXPECT_EQ(v.state, BackendView::State::Exited);
  EXPECT_TRUE(v.all_zero());
  EXPECT_EQ(v.exit_codes.size(), 2u);
}

TEST_F(LocalBackendTest, RunsInScratchDirAndCapturesStderr) {
  ExperimentRecord r = run_to_end(shell_spec("pwd; echo oops >&2; printf tail"));
  EXPECT_EQ(r.status, ExperimentStatus::Succeeded);
  const std::string& log = r.logs.at("Worker-0");
  EXPECT_NE(log.find((dir / "scratch" / r.id).string() + "\n"), std::string::npos);
  EXPECT_NE(log.find("oops\n"), std::string::npos);
  EXPECT_NE(log.find("tail\n"), std::string::npos);
}

TEST_F(LocalBackendTest, NonzeroExitFails) {
  ExperimentRecord r = run_to_end(shell_spec("exit 3"));
  EXPECT_EQ(r.status, ExperimentStatus::Failed);
  bool found = false;
  for (const auto& e : r.events) {
    if (e.kind == EventKind::Error) found = e.detail.find("code 3") != std::string::npos;
  }
  EXPECT_TRUE(found);
  EXPECT_EQ(r.events.back().detail, "Failed: Worker-0 exited with code 3");
  BackendView v = plane->local()->poll(*plane->experiments().handle_of(r.id));
  EXPECT_FALSE(v.all_zero());
  EXPECT_EQ(v.exit_codes.at("Worker-0"), 3);
}

TEST_F(LocalBackendTest, FirstFailureStopsTheGang) {
  auto start = std::chrono::steady_clock::now();
  ExperimentRecord r = run_to_end(shell_spec("if [ $RANK = 1 ]; then exit 5; fi; sleep 30", 3));
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(10));
  EXPECT_EQ(r.status, ExperimentStatus::Failed);
  EXPECT_EQ(count(r, EventKind::TaskFinished), 3);
  EXPECT_TRUE(plane->local()->live_pids().empty());
}

TEST_F(LocalBackendTest, MissingCommandIsSpawnFailure) {
  ExperimentRecord r = run_to_end(shell_spec("/definitely/not/here"));
  EXPECT_EQ(r.status, ExperimentStatus::Failed);
  EXPECT_NE(r.events.back().detail.find("SpawnFailure"), std::string::npos);
}

TEST_F(LocalBackendTest, KillReapsEverything) {
  // The inner sleep is a grandchild; it must die with its process group.
  const std::string id =
      plane->experiments().create_experiment(shell_spec("sleep 60 & sleep 60; wait", 2)).id;
  ASSERT_TRUE(wait_until(
      [&] { return plane->experiments().get(id).status == ExperimentStatus::Running; }));
  std::vector<pid_t> pids = plane->local()->live_pids();
  ASSERT_EQ(pids.size(), 2u);
  auto start = std::chrono::steady_clock::now();
  ExperimentRecord r = plane->experiments().kill(id);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
  EXPECT_EQ(r.status, ExperimentStatus::Killed);
  EXPECT_TRUE(plane->local()->live_pids().empty());
  for (pid_t pid : pids) {
    EXPECT_FALSE(process_exists(pid));
    EXPECT_NE(::kill(-pid, 0), 0) << "process group " << pid << " still has members";
  }
  // Nothing reported after the kill moves the record.
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  EXPECT_EQ(plane->experiments().get(id).status, ExperimentStatus::Killed);
}

TEST_F(LocalBackendTest, RoleCommandOverride) {
  auto spec = shell_spec("echo default");
  spec.tasks["Ps"] = {1, {}, std::string("echo ps")};
  ExperimentRecord r = run_to_end(spec);
  EXPECT_EQ(r.status, ExperimentStatus::Succeeded);
  EXPECT_EQ(r.logs.at("Ps-0"), "ps\n");
  EXPECT_EQ(r.logs.at("Worker-0"), "default\n");
}

TEST_F(LocalBackendTest, GpuDemandIsRefused) {
  auto spec = shell_spec("true");
  spec.tasks["Worker"].resources.gpu = 4;
  ExperimentRecord rec;
  rec.id = "exp-direct";
  rec.spec = spec;
  try {
    plane->local()->submit(rec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ResourceSpecUnsupported);
  }
  const std::string id = plane->experiments().create_experiment(spec).id;
  EXPECT_EQ(plane->experiments().get(id).status, ExperimentStatus::Failed);
}

TEST_F(LocalBackendTest, PollStaleHandle) {
  try {
    plane->local()->poll({"exp-x", BackendKind::Local, "local-999"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownHandle);
  }
  const std::string id = plane->experiments().create_experiment(shell_spec("sleep 0.2")).id;
  auto state = plane->local()->poll(*plane->experiments().handle_of(id)).state;
  EXPECT_TRUE(state == BackendView::State::Pending || state == BackendView::State::Running);
}

}  // namespace
}  // namespace ct
