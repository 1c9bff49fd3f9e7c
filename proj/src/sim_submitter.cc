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

#include "ct/sim_submitter.h"

#include <charconv>

#include "ct/error.h"

namespace ct {
namespace {

int64_t duration_of(const ExperimentSpec& spec) {
  auto it = spec.conf.find(SimSubmitter::kDurationConfKey);
  if (it == spec.conf.end()) return SimSubmitter::kDefaultDurationMs;
  const std::string& s = it->second;
  int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || value < 0) {
    throw Error(ErrorCode::ParseError, std::string(SimSubmitter::kDurationConfKey) +
                                           " must be a non-negative integer, got '" + s + "'");
  }
  return value;
}

std::string describe(const Placement& p) {
  std::string out;
  for (const auto& [inst, node] : p.node_of) {
    if (!out.empty()) out += ", ";
    out += inst + "->" + node;
  }
  return out;
}

}  // namespace

SimSubmitter::SimSubmitter(ClusterSim cluster) : cluster_(std::move(cluster)) {}

SimSubmitter::~SimSubmitter() { stop_clock(); }

void SimSubmitter::dispatch(const std::vector<SimNotice>& notices) {
  if (!monitor_) return;
  for (const auto& n : notices) {
    const std::string& id = n.experiment_id;
    switch (n.kind) {
      case SimNotice::Kind::Scheduled:
        monitor_->report_placement(id, n.placement.node_of);
        monitor_->report_event(id, EventKind::Scheduled, describe(n.placement));
        monitor_->report_status(id, ExperimentStatus::Running,
                                "gang scheduled " + std::to_string(n.placement.node_of.size()) +
                                    " instances");
        break;
      case SimNotice::Kind::Queued:
        monitor_->report_status(id, ExperimentStatus::Queued, "waiting for capacity");
        break;
      case SimNotice::Kind::Completed:
        for (const auto& [inst, _] : n.placement.node_of) {
          monitor_->report_event(id, EventKind::TaskFinished, inst + " exit=0");
        }
        monitor_->report_status(id, ExperimentStatus::Succeeded, "simulated duration elapsed");
        break;
      case SimNotice::Kind::Failed:
        monitor_->report_event(id, EventKind::Error, n.reason);
        monitor_->report_status(id, ExperimentStatus::Failed, n.reason);
        break;
    }
  }
}

SubmissionHandle SimSubmitter::submit(const ExperimentRecord& record) {
  Demand demand = aggregate_demand(record.spec);
  int64_t duration = duration_of(record.spec);
  std::lock_guard<std::mutex> lock(mu_);
  dispatch(cluster_.submit(record.id, demand, duration));
  return {record.id, BackendKind::Simulated, "sim-" + record.id};
}

BackendView SimSubmitter::poll(const SubmissionHandle& handle) const {
  std::lock_guard<std::mutex> lock(mu_);
  ClusterSim::Phase phase = cluster_.phase(handle.experiment_id);
  if (handle.backend != BackendKind::Simulated ||
      handle.backend_token != "sim-" + handle.experiment_id || phase == ClusterSim::Phase::Unknown) {
    throw Error(ErrorCode::UnknownHandle, "unknown handle '" + handle.backend_token + "'");
  }
  BackendView view;
  switch (phase) {
    case ClusterSim::Phase::Queued:
      view.state = BackendView::State::Pending;
      break;
    case ClusterSim::Phase::Running:
      view.state = BackendView::State::Running;
      break;
    default:
      view.state = BackendView::State::Exited;
      view.exit_codes["all"] = 0;
      break;
  }
  return view;
}

void SimSubmitter::stop(const std::string& experiment_id) {
  std::lock_guard<std::mutex> lock(mu_);
  dispatch(cluster_.cancel(experiment_id));
}

void SimSubmitter::advance(int64_t dt_ms) {
  std::lock_guard<std::mutex> lock(mu_);
  dispatch(cluster_.tick(dt_ms));
}

void SimSubmitter::add_node(const std::string& id, const ResourceSpec& capacity) {
  std::lock_guard<std::mutex> lock(mu_);
  dispatch(cluster_.add_node(id, capacity));
}

void SimSubmitter::remove_node(const std::string& id) {
  std::lock_guard<std::mutex> lock(mu_);
  dispatch(cluster_.remove_node(id));
}

ClusterState SimSubmitter::snapshot() const {
  std::lock_guard<std::mutex> lock(mu_);
  return cluster_.snapshot();
}

void SimSubmitter::start_clock(std::chrono::milliseconds period) {
  stop_clock();
  {
    std::lock_guard<std::mutex> lock(clock_mu_);
    clock_running_ = true;
  }
  clock_thread_ = std::thread([this, period] {
    auto last = std::chrono::steady_clock::now();
    std::unique_lock<std::mutex> lock(clock_mu_);
    while (clock_running_) {
      clock_cv_.wait_for(lock, period, [this] { return !clock_running_; });
      if (!clock_running_) break;
      auto now = std::chrono::steady_clock::now();
      int64_t dt = std::chrono::duration_cast<std::chrono::milliseconds>(now - last).count();
      if (dt <= 0) continue;
      last += std::chrono::milliseconds(dt);
      lock.unlock();
      advance(dt);
      lock.lock();
    }
  });
}

void SimSubmitter::stop_clock() {
  {
    std::lock_guard<std::mutex> lock(clock_mu_);
    clock_running_ = false;
  }
  clock_cv_.notify_all();
  if (clock_thread_.joinable()) clock_thread_.join();
}

}  // namespace ct
