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

#include "ct/cli.h"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "ct/error.h"
#include "test_util.h"
#include "transports.h"

namespace ct {
namespace {

using testing::data_file;
using testing::TempDir;

std::string trimmed(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == ' ')) s.pop_back();
  return s;
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args, const TransportFactory& factory,
             const CliEnv& env = {}) {
  std::ostringstream out, err;
  int code = run_cli(args, factory, out, err, env);
  return {code, out.str(), err.str()};
}

TEST(JobRun, MnistArgvMatchesDirectConstruction) {
  auto log = std::make_shared<std::vector<HttpRequest>>();
  CliResult r = run(testing::mnist_job_argv(), testing::recording_factory(log));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "exp-1 Accepted\n");
  ASSERT_EQ(log->size(), 1u);
  const HttpRequest& req = log->front();
  EXPECT_EQ(req.method, "POST");
  EXPECT_EQ(req.path, "/api/v1/experiment");
  EXPECT_FALSE(req.headers.count("authorization"));

  ExperimentSpec direct;
  direct.meta.name = "mnist";
  direct.meta.framework = "TensorFlow";
  direct.environment.image = kDefaultImage;
  direct.tasks["Worker"] = {4, {4, 4, 4096}, std::string("python mnist.py")};
  direct.tasks["Ps"] = {1, {2, 0, 2048}, std::string("python mnist.py")};
  direct.conf["tony.containers.resources"] = "mnist.py";
  EXPECT_EQ(req.body, canonical_json(to_json(direct)));
  EXPECT_EQ(req.body, trimmed(data_file("mnist-job-run.json")));
}

TEST(JobRun, SpecFromArgs) {
  JobRunArgs a;
  a.name = "x";
  a.cmd = "python train.py";
  a.env = "tf-env";
  a.image = "ignored";
  ExperimentSpec s = spec_from_job_run(a);
  EXPECT_EQ(s.environment.name, "tf-env");
  EXPECT_TRUE(s.environment.image.empty());
  EXPECT_EQ(s.tasks.size(), 1u);
  EXPECT_EQ(s.tasks.at("Worker").replicas, 1);
  EXPECT_EQ(s.tasks.at("Worker").resources, ResourceSpec{});
  a.worker_resources = "memory=4Q";
  EXPECT_THROW(spec_from_job_run(a), Error);
  a.worker_resources.clear();
  a.conf = {"novalue"};
  EXPECT_THROW(spec_from_job_run(a), Error);
}

TEST(JobRun, TokenServerAndImageFromEnv) {
  auto log = std::make_shared<std::vector<HttpRequest>>();
  auto servers = std::make_shared<std::vector<std::string>>();
  CliEnv env = {{"CT_TOKEN", "abc"}, {"CT_SERVER", "http://h:1"}, {"CT_IMAGE", "img:2"}};
  CliResult r = run({"job", "run", "--name", "a"}, testing::recording_factory(log, servers), env);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(log->back().headers.at("authorization"), "Bearer abc");
  EXPECT_EQ(servers->back(), "http://h:1");
  EXPECT_EQ(Json::parse(log->back().body)["environment"]["image"], "img:2");

  r = run({"--server", "http://o:2", "--token", "t2", "job", "run", "--name", "a", "--image",
           "mine:1"},
          testing::recording_factory(log, servers), env);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(log->back().headers.at("authorization"), "Bearer t2");
  EXPECT_EQ(servers->back(), "http://o:2");
  EXPECT_EQ(Json::parse(log->back().body)["environment"]["image"], "mine:1");

  // No token and not insecure: an empty bearer, which a secure server refuses.
  run({"job", "run", "--name", "a"}, testing::recording_factory(log, servers));
  EXPECT_EQ(log->back().headers.at("authorization"), "Bearer ");
  EXPECT_EQ(servers->back(), kDefaultServer);
}

TEST(JobRun, UsageErrors) {
  auto log = std::make_shared<std::vector<HttpRequest>>();
  auto factory = testing::recording_factory(log);
  EXPECT_EQ(run({}, factory).code, 2);
  EXPECT_EQ(run({"job"}, factory).code, 2);
  EXPECT_EQ(run({"job", "run"}, factory).code, 2);
  EXPECT_EQ(run({"job", "run", "--name", "a", "--num_workers", "x"}, factory).code, 2);
  EXPECT_EQ(run({"job", "run", "--name", "a", "--worker_resources", "memory=1Q"}, factory).code, 2);
  EXPECT_EQ(run({"job", "run", "--name", "a", "--conf", "oops"}, factory).code, 2);
  EXPECT_EQ(run({"bogus"}, factory).code, 2);
  EXPECT_EQ(run({"template", "run", "t", "--param", "a=1", "--param", "a=2"}, factory).code, 2);
  EXPECT_TRUE(log->empty());
  EXPECT_EQ(run({"--help"}, factory).code, 0);
}

class CliAgainstRouter : public ::testing::Test {
 protected:
  CliAgainstRouter() {
    ControlPlaneOptions o;
    o.store_path = dir / "s.wal";
    o.store_sync = false;
    o.backend = BackendKind::Simulated;
    for (int i = 0; i < 4; ++i) {
      o.cluster_nodes.push_back({"n" + std::to_string(i), {16, 4, 32768}, {}, {}});
    }
    plane = std::make_unique<ControlPlane>(o);
    router = std::make_unique<ApiRouter>(*plane, ApiRouter::Config{"tok", false});
  }

  CliResult cli(std::vector<std::string> args) {
    return run(args, testing::router_factory(*router), {{"CT_TOKEN", "tok"}});
  }

  std::string write(const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }

  TempDir dir;
  std::unique_ptr<ControlPlane> plane;
  std::unique_ptr<ApiRouter> router;
};

TEST_F(CliAgainstRouter, JobLifecycle) {
  auto args = testing::mnist_job_argv();
  args.erase(std::find(args.begin(), args.end(), "--insecure"));
  CliResult r = cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string id = r.out.substr(0, r.out.find(' '));
  // The reply is the record as accepted; the backend has placed it since.
  EXPECT_EQ(r.out, id + " Accepted\n");

  r = cli({"job", "list"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("ID"), std::string::npos);
  EXPECT_NE(r.out.find(id), std::string::npos);
  EXPECT_NE(r.out.find("mnist"), std::string::npos);

  r = cli({"job", "get", id});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("placed:    Worker-3 -> "), std::string::npos);
  EXPECT_NE(r.out.find("status:    Running"), std::string::npos);
  EXPECT_NE(r.out.find("task:      Worker x4 cpu=4,gpu=4,memory=4096M"), std::string::npos);

  r = cli({"--json", "job", "get", id});
  EXPECT_EQ(Json::parse(r.out)["id"], id);

  r = cli({"job", "kill", id});
  EXPECT_EQ(r.out, id + " Killed\n");
  r = cli({"job", "kill", id});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("AlreadyTerminal"), std::string::npos);

  r = cli({"job", "logs", "--follow", id});
  EXPECT_EQ(r.code, 0);

  EXPECT_EQ(cli({"job", "get", "exp-none"}).code, 1);
}

TEST_F(CliAgainstRouter, WrongTokenIsApiError) {
  CliResult r = run({"--token", "nope", "job", "list"}, testing::router_factory(*router));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("Unauthenticated"), std::string::npos);
  r = run({"--insecure", "job", "list"}, testing::router_factory(*router));
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliAgainstRouter, Templates) {
  const std::string file = write("t.json", data_file("tf-mnist-template.json"));
  CliResult r = cli({"template", "register", file});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "registered tf-mnist-template\n");
  r = cli({"template", "list"});
  EXPECT_NE(r.out.find("A template for tf-mnist"), std::string::npos);
  r = cli({"--json", "template", "get", "tf-mnist-template"});
  EXPECT_EQ(Json::parse(r.out)["name"], "tf-mnist-template");

  r = cli({"template", "run", "tf-mnist-template", "--param", "learning_rate=0.001"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("MissingRequiredParameter"), std::string::npos);
  r = cli({"--json", "template", "run", "tf-mnist-template", "--param", "learning_rate=0.001",
           "--param", "batch_size=256"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["spec"]["meta"]["cmd"],
            "python mnist.py --log_dir=/train/log --learning_rate=0.001 --batch_size=256");

  EXPECT_EQ(cli({"template", "delete", "tf-mnist-template"}).out, "deleted tf-mnist-template\n");
  EXPECT_EQ(cli({"template", "get", "tf-mnist-template"}).code, 1);
  EXPECT_EQ(cli({"template", "register", (dir / "missing.json").string()}).code, 2);
}

TEST_F(CliAgainstRouter, EnvironmentsAndCluster) {
  CliResult r = cli({"env", "register", write("e.yaml", data_file("tf-env.yaml"))});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "registered tf-env\n");
  r = cli({"env", "list"});
  EXPECT_NE(r.out.find("tf-env"), std::string::npos);
  r = cli({"--json", "env", "get", "tf-env"});
  EXPECT_EQ(Json::parse(r.out)["name"], "tf-env");

  r = cli({"job", "run", "--name", "e", "--env", "tf-env", "--worker_resources", "cpu=1"});
  ASSERT_EQ(r.code, 0) << r.err;
  r = cli({"env", "delete", "tf-env"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("InUse"), std::string::npos);

  r = cli({"cluster", "status"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("clock: 0 ms"), std::string::npos);
  EXPECT_NE(r.out.find("n3"), std::string::npos);
  EXPECT_NE(r.out.find("queue:\n"), std::string::npos);
}

}  // namespace
}  // namespace ct
