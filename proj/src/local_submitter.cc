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

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/prctl.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "ct/error.h"

extern char** environ;

namespace ct {
namespace {

constexpr int kCommandNotFound = 127;

int decode_wait_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

void close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

std::vector<std::string> child_environment(const std::map<std::string, std::string>& extra) {
  std::vector<std::string> out;
  for (char** e = environ; e && *e; ++e) {
    std::string_view entry(*e);
    std::string key(entry.substr(0, entry.find('=')));
    if (!extra.count(key)) out.emplace_back(entry);
  }
  for (const auto& [k, v] : extra) out.push_back(k + "=" + v);
  return out;
}

}  // namespace

LocalSubmitter::LocalSubmitter(Options options) : options_(std::move(options)) {
  // Orphaned grandchildren are reparented to us instead of init, so that
  // terminate_all can reap whole process groups.
  ::prctl(PR_SET_CHILD_SUBREAPER, 1);
}

LocalSubmitter::~LocalSubmitter() {
  std::vector<std::string> ids;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& [id, _] : runs_by_experiment_) ids.push_back(id);
  }
  for (const auto& id : ids) stop(id);
}

SubmissionHandle LocalSubmitter::submit(const ExperimentRecord& record) {
  int64_t total = 0;
  for (const auto& [role, task] : record.spec.tasks) {
    if (task.resources.gpu > 0) {
      throw Error(ErrorCode::ResourceSpecUnsupported,
                  "local backend cannot provide GPUs (role " + role + " asks for " +
                      std::to_string(task.resources.gpu) + ")");
    }
    total += task.replicas;
  }
  if (total > options_.max_replicas) {
    throw Error(ErrorCode::ResourceSpecUnsupported,
                "local backend runs at most " + std::to_string(options_.max_replicas) +
                    " processes per experiment, asked for " + std::to_string(total));
  }

  auto run = std::make_shared<Run>();
  run->experiment_id = record.id;
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (auto it = runs_by_experiment_.find(record.id);
        it != runs_by_experiment_.end() && !it->second->finished) {
      throw Error(ErrorCode::Conflict, "experiment " + record.id + " already has a live handle");
    }
    run->token = "local-" + std::to_string(++next_token_);
    if (auto old = runs_by_experiment_.find(record.id); old != runs_by_experiment_.end()) {
      if (old->second->supervisor.joinable()) old->second->supervisor.join();
    }
    runs_by_token_[run->token] = run;
    runs_by_experiment_[record.id] = run;
  }
  run->supervisor = std::thread([this, run, record] {
    spawn_all(*run, record);
    supervise(*run);
  });
  return {record.id, BackendKind::Local, run->token};
}

void LocalSubmitter::spawn_all(Run& run, const ExperimentRecord& record) {
  const std::string& id = record.id;
  std::filesystem::path scratch = options_.scratch_root / id;
  std::error_code ec;
  std::filesystem::create_directories(scratch, ec);
  if (monitor_) monitor_->report_artifact(id, "file://" + scratch.string());

  std::string failure;
  std::map<std::string, std::string> placement;
  for (const auto& [role, task] : record.spec.tasks) {
    const std::string& cmd = task.launch_cmd_override ? *task.launch_cmd_override
                                                      : record.spec.meta.cmd;
    for (int64_t rank = 0; rank < task.replicas && failure.empty(); ++rank) {
      if (run.stop_requested) break;
      Process p;
      p.task = role + "-" + std::to_string(rank);
      if (cmd.empty()) {
        failure = "SpawnFailure: no launch command for role " + role;
        break;
      }
      int out_pipe[2];
      int err_pipe[2];
      if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
        failure = std::string("SpawnFailure: pipe: ") + std::strerror(errno);
        break;
      }
      if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        failure = std::string("SpawnFailure: pipe: ") + std::strerror(errno);
        break;
      }

      posix_spawn_file_actions_t actions;
      posix_spawn_file_actions_init(&actions);
      posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
      posix_spawn_file_actions_adddup2(&actions, err_pipe[1], STDERR_FILENO);
      posix_spawn_file_actions_addchdir_np(&actions, scratch.c_str());

      posix_spawnattr_t attr;
      posix_spawnattr_init(&attr);
      sigset_t empty_mask;
      sigemptyset(&empty_mask);
      sigset_t defaults;
      sigemptyset(&defaults);
      for (int sig : {SIGPIPE, SIGTERM, SIGINT, SIGHUP}) sigaddset(&defaults, sig);
      posix_spawnattr_setsigmask(&attr, &empty_mask);
      posix_spawnattr_setsigdefault(&attr, &defaults);
      posix_spawnattr_setpgroup(&attr, 0);
      posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGMASK |
                                          POSIX_SPAWN_SETSIGDEF);

      std::vector<std::string> env = child_environment({{"EXPERIMENT_ID", id},
                                                        {"ROLE", role},
                                                        {"RANK", std::to_string(rank)},
                                                        {"NUM_WORKERS", std::to_string(task.replicas)}});
      std::vector<char*> envp;
      for (auto& e : env) envp.push_back(e.data());
      envp.push_back(nullptr);
      std::string sh = "/bin/sh";
      std::string dash_c = "-c";
      std::string command = cmd;
      char* argv[] = {sh.data(), dash_c.data(), command.data(), nullptr};

      int rc;
      {
        std::lock_guard<std::mutex> lock(run.mu);
        rc = posix_spawn(&p.pid, "/bin/sh", &actions, &attr, argv, envp.data());
      }
      posix_spawn_file_actions_destroy(&actions);
      posix_spawnattr_destroy(&attr);
      ::close(out_pipe[1]);
      ::close(err_pipe[1]);
      if (rc != 0) {
        ::close(out_pipe[0]);
        ::close(err_pipe[0]);
        failure = "SpawnFailure: " + std::string(std::strerror(rc));
        break;
      }
      p.out_fd = out_pipe[0];
      p.err_fd = err_pipe[0];
      ::fcntl(p.out_fd, F_SETFL, O_NONBLOCK);
      ::fcntl(p.err_fd, F_SETFL, O_NONBLOCK);
      placement[p.task] = "localhost";
      {
        std::lock_guard<std::mutex> lock(run.mu);
        run.processes.push_back(std::move(p));
      }
      if (monitor_) {
        const Process& started = run.processes.back();
        monitor_->report_event(id, EventKind::TaskStarted,
                               started.task + " pid=" + std::to_string(started.pid));
      }
    }
    if (!failure.empty()) break;
  }
  run.started = true;
  if (!failure.empty()) {
    terminate_all(run);
    if (monitor_) {
      monitor_->report_event(id, EventKind::Error, failure);
      monitor_->report_status(id, ExperimentStatus::Failed, failure);
    }
    run.finished = true;
    return;
  }
  if (monitor_) {
    monitor_->report_placement(id, placement);
    monitor_->report_status(id, ExperimentStatus::Running,
                            std::to_string(run.processes.size()) + " processes started");
  }
}

void LocalSubmitter::drain(Run& run, Process& p, bool flush) {
  char buf[4096];
  for (auto [fd, line_buf] : {std::pair{&p.out_fd, &p.out_buf}, std::pair{&p.err_fd, &p.err_buf}}) {
    while (*fd >= 0) {
      ssize_t n = ::read(*fd, buf, sizeof buf);
      if (n > 0) {
        line_buf->append(buf, static_cast<size_t>(n));
        continue;
      }
      if (n == 0) close_fd(*fd);
      if (n < 0 && errno == EINTR) continue;
      break;  // EAGAIN or EOF
    }
    size_t nl;
    while ((nl = line_buf->find('\n')) != std::string::npos) {
      if (monitor_) monitor_->report_log(run.experiment_id, p.task, line_buf->substr(0, nl));
      line_buf->erase(0, nl + 1);
    }
    if (flush && !line_buf->empty()) {
      if (monitor_) monitor_->report_log(run.experiment_id, p.task, *line_buf);
      line_buf->clear();
    }
  }
}

void LocalSubmitter::terminate_all(Run& run) {
  auto signal_groups = [&](int sig) {
    std::lock_guard<std::mutex> lock(run.mu);
    for (const auto& p : run.processes) {
      if (p.pid > 0) ::kill(-p.pid, sig);
    }
  };
  signal_groups(SIGTERM);
  auto deadline = std::chrono::steady_clock::now() + options_.kill_grace;
  while (true) {
    bool all_exited = true;
    {
      std::lock_guard<std::mutex> lock(run.mu);
      for (auto& p : run.processes) {
        if (p.exited) continue;
        int status = 0;
        pid_t r = ::waitpid(p.pid, &status, WNOHANG);
        if (r == p.pid) {
          p.exited = true;
          p.exit_code = decode_wait_status(status);
        } else {
          all_exited = false;
        }
      }
    }
    if (all_exited) break;
    if (std::chrono::steady_clock::now() >= deadline) {
      signal_groups(SIGKILL);
      std::lock_guard<std::mutex> lock(run.mu);
      for (auto& p : run.processes) {
        if (p.exited) continue;
        int status = 0;
        while (::waitpid(p.pid, &status, 0) < 0 && errno == EINTR) {
        }
        p.exited = true;
        p.exit_code = decode_wait_status(status);
      }
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
  // Stragglers that escaped into the background of a shell.
  signal_groups(SIGKILL);
  std::lock_guard<std::mutex> lock(run.mu);
  for (const auto& p : run.processes) {
    if (p.pid <= 0) continue;
    auto give_up = std::chrono::steady_clock::now() + std::chrono::seconds(5);
    while (std::chrono::steady_clock::now() < give_up) {
      int status = 0;
      pid_t r = ::waitpid(-p.pid, &status, WNOHANG);
      if (r < 0 && errno != EINTR) break;  // ECHILD: group is empty
      if (r == 0) std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
  }
}

void LocalSubmitter::supervise(Run& run) {
  if (run.finished) return;
  const std::string& id = run.experiment_id;
  std::string failure;
  std::vector<bool> reported(run.processes.size(), false);

  auto report_finished = [&](size_t i) {
    if (reported[i]) return;
    reported[i] = true;
    Process& p = run.processes[i];
    drain(run, p, true);
    if (monitor_) {
      monitor_->report_event(id, EventKind::TaskFinished,
                             p.task + " exit=" + std::to_string(p.exit_code));
    }
  };

  while (!run.stop_requested) {
    std::vector<pollfd> fds;
    for (const auto& p : run.processes) {
      if (p.out_fd >= 0) fds.push_back({p.out_fd, POLLIN, 0});
      if (p.err_fd >= 0) fds.push_back({p.err_fd, POLLIN, 0});
    }
    if (!fds.empty()) {
      ::poll(fds.data(), fds.size(), 50);
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    bool all_exited = true;
    for (size_t i = 0; i < run.processes.size(); ++i) {
      Process& p = run.processes[i];
      drain(run, p, false);
      if (!p.exited) {
        int status = 0;
        pid_t r;
        {
          std::lock_guard<std::mutex> lock(run.mu);
          r = ::waitpid(p.pid, &status, WNOHANG);
          if (r == p.pid) {
            p.exited = true;
            p.exit_code = decode_wait_status(status);
          }
        }
        if (r != p.pid) {
          all_exited = false;
          continue;
        }
        report_finished(i);
        if (p.exit_code != 0 && failure.empty()) {
          failure = p.exit_code == kCommandNotFound
                        ? "SpawnFailure: " + p.task + " command not found (exit code 127)"
                        : p.task + " exited with code " + std::to_string(p.exit_code);
        }
      }
    }
    if (!failure.empty() || all_exited) break;
  }

  terminate_all(run);
  for (size_t i = 0; i < run.processes.size(); ++i) report_finished(i);
  for (auto& p : run.processes) {
    close_fd(p.out_fd);
    close_fd(p.err_fd);
  }
  if (monitor_ && !run.stop_requested) {
    if (!failure.empty()) {
      monitor_->report_event(id, EventKind::Error, failure);
      monitor_->report_status(id, ExperimentStatus::Failed, failure);
    } else {
      monitor_->report_status(id, ExperimentStatus::Succeeded,
                              "all " + std::to_string(run.processes.size()) +
                                  " processes exited 0");
    }
  }
  run.finished = true;
}

BackendView LocalSubmitter::poll(const SubmissionHandle& handle) const {
  std::shared_ptr<Run> run;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = runs_by_token_.find(handle.backend_token);
    if (it == runs_by_token_.end() || handle.backend != BackendKind::Local ||
        it->second->experiment_id != handle.experiment_id) {
      throw Error(ErrorCode::UnknownHandle, "unknown handle '" + handle.backend_token + "'");
    }
    run = it->second;
  }
  BackendView view;
  if (!run->started) return view;
  std::lock_guard<std::mutex> lock(run->mu);
  view.state = run->finished ? BackendView::State::Exited : BackendView::State::Running;
  if (run->finished) {
    for (const auto& p : run->processes) view.exit_codes[p.task] = p.exit_code;
  }
  return view;
}

void LocalSubmitter::stop(const std::string& experiment_id) {
  std::shared_ptr<Run> run;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = runs_by_experiment_.find(experiment_id);
    if (it == runs_by_experiment_.end()) return;
    run = it->second;
  }
  run->stop_requested = true;
  static std::mutex join_mu;
  std::lock_guard<std::mutex> lock(join_mu);
  if (run->supervisor.joinable() && run->supervisor.get_id() != std::this_thread::get_id()) {
    run->supervisor.join();
  }
}

std::vector<pid_t> LocalSubmitter::live_pids() const {
  std::vector<std::shared_ptr<Run>> runs;
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& [_, r] : runs_by_token_) runs.push_back(r);
  }
  std::vector<pid_t> out;
  for (const auto& r : runs) {
    std::lock_guard<std::mutex> lock(r->mu);
    for (const auto& p : r->processes) {
      if (!p.exited) out.push_back(p.pid);
    }
  }
  return out;
}

}  // namespace ct
