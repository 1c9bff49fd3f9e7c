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

#ifndef CT_STORE_H_
#define CT_STORE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace ct {

// Embedded write-ahead key/value store.
//
// The on-disk file is a sequence of frames:
//
//   [u32 little-endian payload length][u32 crc32(payload)][payload]
//
// where the payload is a JSON array of operations committed atomically:
//   {"op":"put","key":k,"value":v} | {"op":"del","key":k}
//   | {"op":"append","key":k,"value":item}
//
// On open every frame is replayed. A frame cut short at the end of the file
// (crash mid-write) is truncated away; a complete frame whose checksum does
// not match makes open() fail with StoreCorrupt.
class Store {
 public:
  struct Options {
    // fdatasync after each commit.
    bool sync = true;
    // Rewrite the log on open once it holds this many more frames than keys.
    size_t compact_slack = 1024;
  };

  struct Op {
    enum class Kind { Put, Erase, Append };
    Kind kind;
    std::string key;
    nlohmann::json value;

    static Op put(std::string key, nlohmann::json value) {
      return {Kind::Put, std::move(key), std::move(value)};
    }
    static Op erase(std::string key) { return {Kind::Erase, std::move(key), nullptr}; }
    static Op append(std::string key, nlohmann::json item) {
      return {Kind::Append, std::move(key), std::move(item)};
    }
  };

  static std::unique_ptr<Store> open(const std::filesystem::path& file,
                                     Options options);
  static std::unique_ptr<Store> open(const std::filesystem::path& file) {
    return open(file, Options{});
  }
  ~Store();

  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  // Durable once this returns.
  void commit(const std::vector<Op>& ops);
  void put(const std::string& key, nlohmann::json value) {
    commit({Op::put(key, std::move(value))});
  }
  void erase(const std::string& key) { commit({Op::erase(key)}); }
  void append(const std::string& key, nlohmann::json item) {
    commit({Op::append(key, std::move(item))});
  }

  std::optional<nlohmann::json> get(const std::string& key) const;
  // All entries whose key starts with `prefix`, in key order.
  std::vector<std::pair<std::string, nlohmann::json>> scan(
      const std::string& prefix) const;

  // crc32 over the log file's bytes; changes iff something was written.
  uint32_t checksum() const;
  size_t frame_count() const;
  const std::filesystem::path& path() const { return path_; }

  // Rewrites the log as one put per live key, atomically via rename.
  void compact();

 private:
  Store(std::filesystem::path path, Options options);
  void replay();
  void apply(const nlohmann::json& op);
  void write_frame(const std::string& payload);
  void reopen_for_append();

  std::filesystem::path path_;
  Options options_;
  int fd_ = -1;
  size_t frames_ = 0;
  std::map<std::string, nlohmann::json> data_;
  mutable std::mutex mu_;
};

}  // namespace ct

#endif  // CT_STORE_H_
