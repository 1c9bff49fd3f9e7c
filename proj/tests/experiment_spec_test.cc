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

#include "ct/experiment_spec.h"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "ct/error.h"
#include "test_util.h"

namespace ct {
namespace {

using testing::mnist_spec;

std::vector<std::string> paths(const std::vector<Violation>& vs) {
  std::vector<std::string> out;
  for (const auto& v : vs) out.push_back(v.path);
  return out;
}

TEST(ValidateSpec, MnistIsValid) { EXPECT_TRUE(validate_experiment_spec(mnist_spec()).empty()); }

TEST(ValidateSpec, EmptyTasks) {
  auto spec = mnist_spec();
  spec.tasks.clear();
  auto vs = validate_experiment_spec(spec);
  ASSERT_EQ(vs.size(), 1u);
  EXPECT_EQ(vs[0].path, "tasks");
  EXPECT_EQ(vs[0].message, "at least one task role");
}

TEST(ValidateSpec, ZeroReplicas) {
  auto spec = mnist_spec();
  spec.tasks["Worker"].replicas = 0;
  EXPECT_EQ(paths(validate_experiment_spec(spec)), std::vector<std::string>{"tasks.Worker.replicas"});
}

TEST(ValidateSpec, NamesAndEnvironment) {
  auto spec = mnist_spec();
  spec.meta.name = "MNIST";
  spec.meta.ns = "";
  spec.environment = {};
  spec.tasks["Ps"].resources.gpu = -1;
  EXPECT_EQ(paths(validate_experiment_spec(spec)),
            (std::vector<std::string>{"meta.name", "meta.namespace", "environment",
                                      "tasks.Ps.resources"}));
  spec = mnist_spec();
  spec.environment.name = "tf-env";
  EXPECT_EQ(paths(validate_experiment_spec(spec)), std::vector<std::string>{"environment"});
}

TEST(NameGrammar, Cases) {
  EXPECT_TRUE(is_valid_name("mnist"));
  EXPECT_TRUE(is_valid_name("tf-mnist-template"));
  EXPECT_TRUE(is_valid_name("a"));
  EXPECT_FALSE(is_valid_name(""));
  EXPECT_FALSE(is_valid_name("-a"));
  EXPECT_FALSE(is_valid_name("a-"));
  EXPECT_FALSE(is_valid_name("a_b"));
  EXPECT_FALSE(is_valid_name(std::string(64, 'a')));
  EXPECT_TRUE(is_valid_name(std::string(63, 'a')));
}

TEST(Demand, MnistTotals) {
  Demand d = aggregate_demand(mnist_spec());
  // 1*2 + 4*4 cores, 0 + 4*4 gpus, 2048 + 4*4096 MiB
  EXPECT_EQ(d.totals, (ResourceSpec{18, 16, 18432}));
  EXPECT_EQ(d.instance_count(), 5);
}

TEST(Demand, SmallCases) {
  ExperimentSpec spec;
  spec.tasks["Worker"] = {1, {}, std::nullopt};
  EXPECT_EQ(aggregate_demand(spec).totals, (ResourceSpec{}));
  spec.tasks.clear();
  spec.tasks["Ps"] = {1, {2, 0, 2048}, std::nullopt};
  EXPECT_EQ(aggregate_demand(spec).totals, (ResourceSpec{2, 0, 2048}));
}

TEST(Demand, Overflow) {
  ExperimentSpec spec;
  spec.tasks["Worker"] = {int64_t{1} << 40, {0, 0, int64_t{1} << 40}, std::nullopt};
  try {
    aggregate_demand(spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ArithmeticOverflow);
  }
}

TEST(SpecCodec, SdkShape) {
  // Role resources carry an inline replicas pair, as the Python client sends them.
  Json j = Json::parse(R"({
    "meta": {"name": "mnist", "namespace": "default", "framework": "TensorFlow",
             "cmd": "python mnist.py"},
    "environment": {"image": "submarine:tf-mnist"},
    "spec": {"Ps": {"resources": "cpu=2,\n memory=2G,\n replicas=1"},
             "Worker": {"resources": "cpu=4,gpu=4,\n memory=4G,\n replicas=4"}}})");
  EXPECT_EQ(experiment_spec_from_json(j), mnist_spec());
}

TEST(SpecCodec, RoundTrip) {
  auto spec = mnist_spec();
  spec.conf["tony.containers.resources"] = "mnist.py";
  spec.tasks["Worker"].launch_cmd_override = "python worker.py";
  spec.placement_constraints = "zone=a";
  spec.training_data = "/data/mnist";
  Json j = to_json(spec);
  EXPECT_EQ(experiment_spec_from_json(j), spec);
  EXPECT_EQ(canonical_json(to_json(experiment_spec_from_json(j))), canonical_json(j));
}

TEST(SpecCodec, CanonicalForm) {
  EXPECT_EQ(canonical_json(to_json(mnist_spec())),
            R"({"environment":{"image":"submarine:tf-mnist"},)"
            R"("meta":{"cmd":"python mnist.py","framework":"TensorFlow","name":"mnist","namespace":"default"},)"
            R"("spec":{"Ps":{"replicas":1,"resources":"cpu=2,gpu=0,memory=2048M"},)"
            R"("Worker":{"replicas":4,"resources":"cpu=4,gpu=4,memory=4096M"}}})");
}

TEST(SpecCodec, Errors) {
  auto code = [](const char* text) {
    try {
      experiment_spec_from_json(Json::parse(text));
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  EXPECT_EQ(code(R"({"bogus":1})"), ErrorCode::ParseError);
  EXPECT_EQ(code(R"({"meta":{"name":1}})"), ErrorCode::ParseError);
  EXPECT_EQ(code(R"({"spec":{"W":{"replicas":"x"}}})"), ErrorCode::ParseError);
  EXPECT_EQ(code(R"({"spec":{"W":{"replicas":2,"resources":"cpu=1,replicas=3"}}})"),
            ErrorCode::ParseError);
  EXPECT_EQ(code(R"({"spec":{"W":{"resources":"cpu=1,disk=2"}}})"), ErrorCode::UnknownKey);
  EXPECT_EQ(code("[]"), ErrorCode::ParseError);
}

TEST(SpecCodec, EnvironmentForms) {
  auto spec = experiment_spec_from_json(Json::parse(R"({"environment":"img:1"})"));
  EXPECT_EQ(spec.environment.image, "img:1");
  spec = experiment_spec_from_json(Json::parse(R"({"environment":{"name":"tf-env"}})"));
  EXPECT_EQ(spec.environment.name, "tf-env");
  EXPECT_TRUE(spec.environment.is_registered());
}

// Reference graph, written out edge by edge.
bool oracle_edge(ExperimentStatus a, ExperimentStatus b) {
  using S = ExperimentStatus;
  static const std::set<std::pair<S, S>> kEdges = {
      {S::Accepted, S::Queued},  {S::Accepted, S::Running}, {S::Accepted, S::Failed},
      {S::Accepted, S::Killed},  {S::Queued, S::Running},   {S::Queued, S::Failed},
      {S::Queued, S::Killed},    {S::Running, S::Succeeded}, {S::Running, S::Failed},
      {S::Running, S::Killed},
  };
  return kEdges.count({a, b}) > 0;
}

TEST(StatusGraph, MatchesReferenceEdges) {
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      auto sa = static_cast<ExperimentStatus>(a);
      auto sb = static_cast<ExperimentStatus>(b);
      EXPECT_EQ(is_legal_transition(sa, sb), oracle_edge(sa, sb))
          << to_string(sa) << "->" << to_string(sb);
    }
    auto s = static_cast<ExperimentStatus>(a);
    EXPECT_EQ(parse_status(to_string(s)), s);
  }
  EXPECT_FALSE(parse_status("running"));
}

TEST(EventCodec, RoundTrip) {
  Event e{12, 3, EventKind::TaskFinished, "Worker-0 exit=0", true};
  EXPECT_EQ(event_from_json(to_json(e)), e);
  MetricPoint m{"auc", 0.74, 1, 99, false};
  EXPECT_EQ(metric_from_json(to_json(m)), m);
  EXPECT_TRUE(std::isnan(metric_from_json(Json::parse(R"({"key":"k","value":null})")).value));
  EXPECT_TRUE(std::isnan(metric_from_json(Json::parse(R"({"key":"k","value":"NaN"})")).value));
  EXPECT_THROW(metric_from_json(Json::parse(R"({"key":"","value":1})")), Error);
}

}  // namespace
}  // namespace ct
