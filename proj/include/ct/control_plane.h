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

#ifndef CT_CONTROL_PLANE_H_
#define CT_CONTROL_PLANE_H_

#include <chrono>
#include <filesystem>
#include <memory>
#include <vector>

#include "ct/cluster_sim.h"
#include "ct/environment_service.h"
#include "ct/experiment_service.h"
#include "ct/local_submitter.h"
#include "ct/sim_submitter.h"
#include "ct/store.h"
#include "ct/template_service.h"

namespace ct {

struct ControlPlaneOptions {
  std::filesystem::path store_path = "ct-store/ct.wal";
  bool store_sync = true;
  BackendKind backend = BackendKind::Local;
  // Simulated backend.
  std::vector<NodeState> cluster_nodes;
  // Zero leaves simulated time to explicit advance() calls.
  std::chrono::milliseconds sim_clock_period{0};
  // Local backend.
  LocalSubmitter::Options local;
  ExperimentService::Clock clock = &ExperimentService::system_now_ms;
};

// Owns the store, registries, backend and experiment service, and tears
// them down in an order where no backend thread outlives its monitor.
class ControlPlane {
 public:
  explicit ControlPlane(ControlPlaneOptions options);
  ~ControlPlane();

  ControlPlane(const ControlPlane&) = delete;
  ControlPlane& operator=(const ControlPlane&) = delete;

  Store& store() { return *store_; }
  TemplateRegistry& templates() { return *templates_; }
  EnvironmentRegistry& environments() { return *environments_; }
  ExperimentService& experiments() { return *experiments_; }
  Submitter& submitter() { return *submitter_; }
  // Null unless the matching backend is configured.
  SimSubmitter* sim() { return sim_; }
  LocalSubmitter* local() { return local_; }
  BackendKind backend() const { return options_.backend; }

 private:
  ControlPlaneOptions options_;
  std::unique_ptr<Store> store_;
  std::unique_ptr<TemplateRegistry> templates_;
  std::unique_ptr<EnvironmentRegistry> environments_;
  std::unique_ptr<Submitter> submitter_;
  SimSubmitter* sim_ = nullptr;
  LocalSubmitter* local_ = nullptr;
  std::unique_ptr<ExperimentService> experiments_;
};

}  // namespace ct

#endif  // CT_CONTROL_PLANE_H_
