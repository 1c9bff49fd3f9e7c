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

// Control plane server: REST API over a local-process or simulated backend.
//
//   CT_TOKEN=secret ct-server --listen 127.0.0.1:8080
//   CT_BACKEND=simulated CT_CLUSTER_CONFIG=cluster.yaml ct-server

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "ct/api_router.h"
#include "ct/cluster_sim.h"
#include "ct/control_plane.h"
#include "ct/error.h"
#include "ct/http_transport.h"

namespace {

std::string env(const char* key, const std::string& fallback = "") {
  const char* v = std::getenv(key);
  return v ? std::string(v) : fallback;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ct::Error(ct::ErrorCode::NotFound, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Used when the simulated backend is chosen without a cluster config.
std::vector<ct::NodeState> default_cluster() {
  std::vector<ct::NodeState> nodes;
  for (int i = 0; i < 4; ++i) {
    ct::NodeState n;
    n.node_id = "n" + std::to_string(i);
    n.capacity = {32, 8, 256 * 1024};
    nodes.push_back(n);
  }
  return nodes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Experiment control plane server", "ct-server"};
  std::string listen = "127.0.0.1:8080";
  std::string ui_dir;
  int64_t sim_period_ms = 50;
  app.add_option("--listen", listen, "host:port (port 0 picks a free one)");
  app.add_option("--ui", ui_dir, "Directory served at /ui");
  app.add_option("--sim_clock_ms", sim_period_ms, "Simulated clock tick period, 0 = manual")
      ->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);

  auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    std::cerr << "--listen expects host:port\n";
    return 2;
  }
  const std::string host = listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    std::cerr << "bad port in --listen\n";
    return 2;
  }

  ct::ApiRouter::Config auth;
  auth.insecure = env("CT_INSECURE") == "1";
  if (const char* t = std::getenv("CT_TOKEN")) auth.token = t;
  if (!auth.insecure && (!auth.token || auth.token->empty())) {
    std::cerr << "set CT_TOKEN or CT_INSECURE=1\n";
    return 2;
  }

  // Handled by a dedicated thread; block before any other thread exists.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ct::ControlPlaneOptions options;
  options.store_path = env("CT_STORE_PATH", "ct-store/ct.wal");
  const std::string backend = env("CT_BACKEND", "local");
  std::unique_ptr<ct::ControlPlane> plane;
  try {
    if (backend == "simulated") {
      options.backend = ct::BackendKind::Simulated;
      const std::string config = env("CT_CLUSTER_CONFIG");
      options.cluster_nodes =
          config.empty() ? default_cluster() : ct::parse_cluster_yaml(read_file(config));
      options.sim_clock_period = std::chrono::milliseconds(sim_period_ms);
    } else if (backend != "local") {
      std::cerr << "CT_BACKEND must be local or simulated\n";
      return 2;
    }
    plane = std::make_unique<ct::ControlPlane>(options);
  } catch (const ct::Error& e) {
    std::cerr << "startup failed: " << e.code_name() << ": " << e.what() << "\n";
    return 1;
  }

  ct::ApiRouter router(*plane, auth);
  ct::HttpServer server([&](const ct::HttpRequest& r) { return router.handle(r); });
  if (!ui_dir.empty() && !server.mount("/ui", ui_dir)) {
    std::cerr << "cannot serve " << ui_dir << "\n";
    return 1;
  }
  int bound = server.bind(host, port);
  if (bound < 0) {
    std::cerr << "cannot listen on " << listen << "\n";
    return 1;
  }
  std::cout << "listening on " << host << ":" << bound << std::endl;

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.listen();
  waiter.join();
  return 0;
}
