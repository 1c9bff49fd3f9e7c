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

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "ct/error.h"

extern char** environ;

namespace ct {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitApi = 1;
constexpr int kExitUsage = 2;

// Thrown for usage problems found after CLI11 accepted the argv.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::pair<std::string, std::string> split_pair(const std::string& kv, const char* flag) {
  auto eq = kv.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError(std::string(flag) + " expects key=value, got '" + kv + "'");
  }
  return {kv.substr(0, eq), kv.substr(eq + 1)};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct ApiFailure {
  std::string message;
};

class Client {
 public:
  Client(std::unique_ptr<Transport> transport, std::optional<std::string> token)
      : transport_(std::move(transport)), token_(std::move(token)) {}

  HttpResponse call(const std::string& method, const std::string& path,
                    const std::string& body = "",
                    const std::string& content_type = "application/json",
                    std::map<std::string, std::string> query = {}) {
    HttpRequest req;
    req.method = method;
    req.path = path;
    req.body = body;
    req.query = std::move(query);
    if (!body.empty()) req.headers["content-type"] = content_type;
    if (token_) req.headers["authorization"] = "Bearer " + *token_;
    HttpResponse res = transport_->send(req);
    if (res.status >= 400) {
      std::string message = "HTTP " + std::to_string(res.status);
      try {
        Json j = Json::parse(res.body);
        message = j.value("code", std::string("Error")) + ": " + j.value("message", std::string());
        if (j.contains("details")) message += "\n" + j["details"].dump(2);
      } catch (const Json::exception&) {
        if (!res.body.empty()) message += ": " + res.body;
      }
      throw ApiFailure{message};
    }
    return res;
  }

  Json call_json(const std::string& method, const std::string& path, const std::string& body = "",
                 std::map<std::string, std::string> query = {}) {
    return Json::parse(call(method, path, body, "application/json", std::move(query)).body);
  }

 private:
  std::unique_ptr<Transport> transport_;
  std::optional<std::string> token_;
};

std::string event_line(const Json& e) {
  return std::to_string(e.value("timestamp", int64_t{0})) + "  " + e.value("kind", std::string()) +
         "  " + e.value("detail", std::string());
}

void print_record(std::ostream& out, const Json& r) {
  out << "id:        " << r.value("id", "") << "\n";
  out << "name:      " << r["spec"]["meta"].value("name", "") << "\n";
  out << "namespace: " << r["spec"]["meta"].value("namespace", "") << "\n";
  out << "status:    " << r.value("status", "") << "\n";
  out << "image:     " << r.value("resolvedImage", "") << "\n";
  for (const auto& [role, t] : r["spec"]["spec"].items()) {
    out << "task:      " << role << " x" << t.value("replicas", 0) << " "
        << t.value("resources", "") << "\n";
  }
  for (const auto& [inst, node] : r["placement"].items()) {
    out << "placed:    " << inst << " -> " << node.get<std::string>() << "\n";
  }
  out << "events:\n";
  for (const auto& e : r["events"]) out << "  " << event_line(e) << "\n";
}

void print_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> width(header.size());
  for (size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size() && i < width.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
    }
  }
  auto line = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      out << std::left << std::setw(static_cast<int>(width[i]) + (i + 1 < cells.size() ? 2 : 0))
          << cells[i];
    }
    out << "\n";
  };
  line(header);
  for (const auto& row : rows) line(row);
}

void print_payload(std::ostream& out, const Json& j, bool as_json) {
  out << (as_json ? canonical_json(j) : j.dump(2)) << "\n";
}

}  // namespace

ExperimentSpec spec_from_job_run(const JobRunArgs& args) {
  ExperimentSpec spec;
  spec.meta.name = args.name;
  spec.meta.ns = args.ns;
  spec.meta.framework = args.framework;
  spec.meta.cmd = args.cmd;
  if (!args.env.empty()) {
    spec.environment.name = args.env;
  } else {
    spec.environment.image = args.image.empty() ? kDefaultImage : args.image;
  }
  auto role = [](int64_t replicas, const std::string& resources, const std::string& cmd) {
    ExperimentTaskSpec t;
    t.replicas = replicas;
    if (!resources.empty()) t.resources = parse_resource_string(resources).resources;
    if (!cmd.empty()) t.launch_cmd_override = cmd;
    return t;
  };
  spec.tasks["Worker"] = role(args.num_workers, args.worker_resources, args.worker_launch_cmd);
  if (args.num_ps > 0) {
    spec.tasks["Ps"] = role(args.num_ps, args.ps_resources, args.ps_launch_cmd);
  }
  for (const auto& kv : args.conf) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::ParseError, "--conf expects key=value, got '" + kv + "'");
    }
    spec.conf[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return spec;
}

CliEnv cli_env_from_process() {
  CliEnv env;
  for (char** e = environ; e && *e; ++e) {
    std::string s(*e);
    if (s.rfind("CT_", 0) != 0) continue;
    auto eq = s.find('=');
    if (eq != std::string::npos) env[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return env;
}

int run_cli(const std::vector<std::string>& args, const TransportFactory& transport,
            std::ostream& out, std::ostream& err, const CliEnv& env) {
  auto env_or = [&](const char* key, std::string fallback) {
    auto it = env.find(key);
    return it != env.end() && !it->second.empty() ? it->second : fallback;
  };

  CLI::App app{"Experiment control plane client", "ct"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string server = env_or("CT_SERVER", kDefaultServer);
  std::optional<std::string> token;
  if (auto it = env.find("CT_TOKEN"); it != env.end()) token = it->second;
  bool insecure = false;
  bool as_json = false;
  app.add_option("--server", server, "Server base URL (default $CT_SERVER)");
  app.add_option("--token", token, "Bearer token (default $CT_TOKEN)");
  app.add_flag("--insecure", insecure, "Send no Authorization header");
  app.add_flag("--json", as_json, "Print raw API payloads");

  // Each subcommand sets `action`; it runs after a successful parse.
  std::function<int(Client&)> action;

  // job
  auto* job = app.add_subcommand("job", "Manage experiments");
  job->require_subcommand(1);

  JobRunArgs run;
  auto* job_run = job->add_subcommand("run", "Submit an experiment");
  job_run->add_option("--name", run.name, "Experiment name")->required();
  job_run->add_option("--framework", run.framework);
  job_run->add_option("--num_workers", run.num_workers)->check(CLI::NonNegativeNumber);
  job_run->add_option("--worker_resources", run.worker_resources);
  job_run->add_option("--num_ps", run.num_ps)->check(CLI::NonNegativeNumber);
  job_run->add_option("--ps_resources", run.ps_resources);
  job_run->add_option("--worker_launch_cmd", run.worker_launch_cmd);
  job_run->add_option("--ps_launch_cmd", run.ps_launch_cmd);
  job_run->add_option("--conf", run.conf, "key=value (repeatable)")->allow_extra_args(false);
  job_run->add_option("--namespace", run.ns);
  job_run->add_option("--image", run.image, "Image (default $CT_IMAGE)");
  job_run->add_option("--env", run.env, "Registered environment name");
  job_run->add_option("--cmd", run.cmd, "Default command for every role");
  job_run->callback([&] {
    action = [&](Client& c) {
      if (run.image.empty()) run.image = env_or("CT_IMAGE", kDefaultImage);
      ExperimentSpec spec;
      try {
        spec = spec_from_job_run(run);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      Json r = c.call_json("POST", "/api/v1/experiment", canonical_json(to_json(spec)));
      if (as_json) {
        print_payload(out, r, true);
      } else {
        out << r.value("id", "") << " " << r.value("status", "") << "\n";
      }
      return kExitOk;
    };
  });

  std::string list_ns;
  int64_t list_limit = 0;
  auto* job_list = job->add_subcommand("list", "List experiments");
  job_list->add_option("--namespace", list_ns);
  job_list->add_option("--limit", list_limit)->check(CLI::NonNegativeNumber);
  job_list->callback([&] {
    action = [&](Client& c) {
      std::map<std::string, std::string> query;
      if (!list_ns.empty()) query["namespace"] = list_ns;
      if (list_limit > 0) query["limit"] = std::to_string(list_limit);
      Json list = c.call_json("GET", "/api/v1/experiment", "", query);
      if (as_json) {
        print_payload(out, list, true);
        return kExitOk;
      }
      std::vector<std::vector<std::string>> rows;
      for (const auto& s : list) {
        rows.push_back({s.value("id", ""), s.value("name", ""), s.value("namespace", ""),
                        s.value("status", "")});
      }
      print_table(out, {"ID", "NAME", "NAMESPACE", "STATUS"}, rows);
      return kExitOk;
    };
  });

  std::string job_id;
  auto* job_get = job->add_subcommand("get", "Show one experiment");
  job_get->add_option("id", job_id)->required();
  job_get->callback([&] {
    action = [&](Client& c) {
      Json r = c.call_json("GET", "/api/v1/experiment/" + job_id);
      if (as_json) {
        print_payload(out, r, true);
      } else {
        print_record(out, r);
      }
      return kExitOk;
    };
  });

  auto* job_kill = job->add_subcommand("kill", "Kill an experiment");
  job_kill->add_option("id", job_id)->required();
  job_kill->callback([&] {
    action = [&](Client& c) {
      Json r = c.call_json("POST", "/api/v1/experiment/" + job_id + "/kill");
      if (as_json) {
        print_payload(out, r, true);
      } else {
        out << r.value("id", "") << " " << r.value("status", "") << "\n";
      }
      return kExitOk;
    };
  });

  bool follow = false;
  int64_t interval_ms = 500;
  auto* job_logs = job->add_subcommand("logs", "Print captured task output");
  job_logs->add_option("id", job_id)->required();
  job_logs->add_flag("--follow,-f", follow, "Poll until the experiment finishes");
  job_logs->add_option("--interval_ms", interval_ms)->check(CLI::PositiveNumber);
  job_logs->callback([&] {
    action = [&](Client& c) {
      const std::string path = "/api/v1/experiment/" + job_id;
      std::string shown;
      while (true) {
        // Read the status first so the final logs fetch sees every line.
        bool done = true;
        if (follow) {
          Json r = c.call_json("GET", path);
          auto status = parse_status(r.value("status", ""));
          done = status && is_terminal(*status);
        }
        std::string text = c.call("GET", path + "/logs").body;
        if (text.compare(0, shown.size(), shown) == 0) {
          out << text.substr(shown.size());
        } else {
          out << text;
        }
        out.flush();
        shown = text;
        if (done) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(interval_ms));
      }
      return kExitOk;
    };
  });

  // template
  auto* tmpl = app.add_subcommand("template", "Manage templates");
  tmpl->require_subcommand(1);
  std::string file;
  std::string tmpl_name;

  auto* tmpl_register = tmpl->add_subcommand("register", "Register a template from a JSON file");
  tmpl_register->add_option("file", file)->required();
  tmpl_register->callback([&] {
    action = [&](Client& c) {
      Json t = c.call_json("POST", "/api/v1/template", read_file(file));
      if (as_json) {
        print_payload(out, t, true);
      } else {
        out << "registered " << t.value("name", "") << "\n";
      }
      return kExitOk;
    };
  });

  auto* tmpl_list = tmpl->add_subcommand("list", "List templates");
  tmpl_list->callback([&] {
    action = [&](Client& c) {
      Json list = c.call_json("GET", "/api/v1/template");
      if (as_json) {
        print_payload(out, list, true);
        return kExitOk;
      }
      std::vector<std::vector<std::string>> rows;
      for (const auto& t : list) rows.push_back({t.value("name", ""), t.value("description", "")});
      print_table(out, {"NAME", "DESCRIPTION"}, rows);
      return kExitOk;
    };
  });

  auto* tmpl_get = tmpl->add_subcommand("get", "Show a template");
  tmpl_get->add_option("name", tmpl_name)->required();
  tmpl_get->callback([&] {
    action = [&](Client& c) {
      print_payload(out, c.call_json("GET", "/api/v1/template/" + tmpl_name), as_json);
      return kExitOk;
    };
  });

  auto* tmpl_delete = tmpl->add_subcommand("delete", "Delete a template");
  tmpl_delete->add_option("name", tmpl_name)->required();
  tmpl_delete->callback([&] {
    action = [&](Client& c) {
      c.call("DELETE", "/api/v1/template/" + tmpl_name);
      if (!as_json) out << "deleted " << tmpl_name << "\n";
      return kExitOk;
    };
  });

  std::vector<std::string> params;
  auto* tmpl_run = tmpl->add_subcommand("run", "Create an experiment from a template");
  tmpl_run->add_option("name", tmpl_name)->required();
  tmpl_run->add_option("--param", params, "key=value (repeatable)")->allow_extra_args(false);
  tmpl_run->callback([&] {
    action = [&](Client& c) {
      Json values = Json::object();
      for (const auto& kv : params) {
        auto [k, v] = split_pair(kv, "--param");
        if (values.contains(k)) throw UsageError("--param " + k + " given twice");
        values[k] = v;
      }
      Json body = {{"params", values}};
      Json r = c.call_json("POST", "/api/v1/experiment/from-template/" + tmpl_name,
                           canonical_json(body));
      if (as_json) {
        print_payload(out, r, true);
      } else {
        out << r.value("id", "") << " " << r.value("status", "") << "\n";
      }
      return kExitOk;
    };
  });

  // env
  auto* envc = app.add_subcommand("env", "Manage environments");
  envc->require_subcommand(1);
  std::string env_name;

  auto* env_register = envc->add_subcommand("register", "Register an environment from YAML");
  env_register->add_option("file", file)->required();
  env_register->callback([&] {
    action = [&](Client& c) {
      Json e = Json::parse(
          c.call("POST", "/api/v1/environment", read_file(file), "application/yaml").body);
      if (as_json) {
        print_payload(out, e, true);
      } else {
        out << "registered " << e.value("name", "") << "\n";
      }
      return kExitOk;
    };
  });

  auto* env_list = envc->add_subcommand("list", "List environments");
  env_list->callback([&] {
    action = [&](Client& c) {
      Json list = c.call_json("GET", "/api/v1/environment");
      if (as_json) {
        print_payload(out, list, true);
        return kExitOk;
      }
      std::vector<std::vector<std::string>> rows;
      for (const auto& e : list) rows.push_back({e.value("name", ""), e.value("image", "")});
      print_table(out, {"NAME", "IMAGE"}, rows);
      return kExitOk;
    };
  });

  auto* env_get = envc->add_subcommand("get", "Show an environment");
  env_get->add_option("name", env_name)->required();
  env_get->callback([&] {
    action = [&](Client& c) {
      print_payload(out, c.call_json("GET", "/api/v1/environment/" + env_name), as_json);
      return kExitOk;
    };
  });

  auto* env_delete = envc->add_subcommand("delete", "Delete an environment");
  env_delete->add_option("name", env_name)->required();
  env_delete->callback([&] {
    action = [&](Client& c) {
      c.call("DELETE", "/api/v1/environment/" + env_name);
      if (!as_json) out << "deleted " << env_name << "\n";
      return kExitOk;
    };
  });

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Simulated cluster");
  cluster->require_subcommand(1);
  auto* cluster_status = cluster->add_subcommand("status", "Show nodes and the wait queue");
  cluster_status->callback([&] {
    action = [&](Client& c) {
      Json s = c.call_json("GET", "/api/v1/cluster");
      if (as_json) {
        print_payload(out, s, true);
        return kExitOk;
      }
      std::vector<std::vector<std::string>> rows;
      for (const auto& n : s["nodes"]) {
        rows.push_back({n.value("id", ""), n.value("capacity", ""), n.value("allocated", ""),
                        std::to_string(n.value("runningTasks", Json::array()).size())});
      }
      out << "clock: " << s.value("clockMs", int64_t{0}) << " ms\n";
      print_table(out, {"NODE", "CAPACITY", "ALLOCATED", "TASKS"}, rows);
      out << "queue:";
      for (const auto& id : s["waitQueue"]) out << " " << id.get<std::string>();
      out << "\n";
      return kExitOk;
    };
  });

  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("ct");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }
  if (!action) return kExitUsage;

  try {
    Client client(transport(server), insecure ? std::nullopt : std::optional(token.value_or("")));
    return action(client);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ApiFailure& e) {
    err << "error: " << e.message << "\n";
    return kExitApi;
  } catch (const Error& e) {
    err << "error: " << e.code_name() << ": " << e.what() << "\n";
    return kExitApi;
  } catch (const Json::exception& e) {
    err << "error: malformed server response: " << e.what() << "\n";
    return kExitApi;
  }
}

}  // namespace ct
