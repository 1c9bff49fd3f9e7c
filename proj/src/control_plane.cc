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

#include "ct/control_plane.h"

namespace ct {

ControlPlane::ControlPlane(ControlPlaneOptions options) : options_(std::move(options)) {
  Store::Options store_options;
  store_options.sync = options_.store_sync;
  store_ = Store::open(options_.store_path, store_options);
  templates_ = std::make_unique<TemplateRegistry>(*store_);
  environments_ = std::make_unique<EnvironmentRegistry>(*store_);
  if (options_.backend == BackendKind::Simulated) {
    auto sim = std::make_unique<SimSubmitter>(ClusterSim(options_.cluster_nodes));
    sim_ = sim.get();
    submitter_ = std::move(sim);
  } else {
    auto local = std::make_unique<LocalSubmitter>(options_.local);
    local_ = local.get();
    submitter_ = std::move(local);
  }
  experiments_ = std::make_unique<ExperimentService>(*store_, *environments_, *templates_,
                                                     submitter_.get(), options_.clock);
  if (sim_ && options_.sim_clock_period.count() > 0) {
    sim_->start_clock(options_.sim_clock_period);
  }
}

ControlPlane::~ControlPlane() {
  // Backend threads report into the experiment service; stop them first.
  submitter_.reset();
  experiments_.reset();
}

}  // namespace ct
