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

#include "ct/store.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>

#include "ct/error.h"

namespace ct {
namespace {

constexpr size_t kHeaderSize = 8;

uint32_t crc_of(const void* data, size_t size) {
  return static_cast<uint32_t>(
      crc32(0L, static_cast<const Bytef*>(data), static_cast<uInt>(size)));
}

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

[[noreturn]] void io_fail(const std::string& what, const std::filesystem::path& p) {
  throw Error(ErrorCode::Internal,
              what + " " + p.string() + ": " + std::strerror(errno));
}

void write_all(int fd, const std::string& bytes, const std::filesystem::path& p) {
  size_t done = 0;
  while (done < bytes.size()) {
    ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      io_fail("write", p);
    }
    done += static_cast<size_t>(n);
  }
}

std::string frame(const std::string& payload) {
  std::string out;
  out.reserve(kHeaderSize + payload.size());
  put_u32(out, static_cast<uint32_t>(payload.size()));
  put_u32(out, crc_of(payload.data(), payload.size()));
  out += payload;
  return out;
}

nlohmann::json encode(const Store::Op& op) {
  switch (op.kind) {
    case Store::Op::Kind::Put:
      return {{"op", "put"}, {"key", op.key}, {"value", op.value}};
    case Store::Op::Kind::Erase:
      return {{"op", "del"}, {"key", op.key}};
    case Store::Op::Kind::Append:
      return {{"op", "append"}, {"key", op.key}, {"value", op.value}};
  }
  return nullptr;
}

}  // namespace

Store::Store(std::filesystem::path path, Options options)
    : path_(std::move(path)), options_(options) {}

Store::~Store() {
  if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Store> Store::open(const std::filesystem::path& file,
                                   Options options) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::unique_ptr<Store> store(new Store(file, options));
  store->replay();
  if (store->frames_ > store->data_.size() + options.compact_slack) {
    store->compact();
  } else {
    store->reopen_for_append();
  }
  return store;
}

void Store::replay() {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;  // fresh store
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  size_t offset = 0;
  while (offset < bytes.size()) {
    if (bytes.size() - offset < kHeaderSize) break;
    uint32_t len = get_u32(p + offset);
    uint32_t crc = get_u32(p + offset + 4);
    if (bytes.size() - offset - kHeaderSize < len) break;
    const char* payload = bytes.data() + offset + kHeaderSize;
    if (crc_of(payload, len) != crc) {
      throw Error(ErrorCode::StoreCorrupt,
                  "checksum mismatch in " + path_.string() + " at offset " +
                      std::to_string(offset),
                  {{"file", path_.string()}, {"offset", offset}});
    }
    nlohmann::json ops;
    try {
      ops = nlohmann::json::parse(payload, payload + len);
    } catch (const nlohmann::json::parse_error&) {
      throw Error(ErrorCode::StoreCorrupt,
                  "undecodable frame in " + path_.string() + " at offset " +
                      std::to_string(offset),
                  {{"file", path_.string()}, {"offset", offset}});
    }
    for (const auto& op : ops) apply(op);
    ++frames_;
    offset += kHeaderSize + len;
  }
  if (offset < bytes.size()) {
    std::cerr << "store: truncating torn tail of " << path_ << " ("
              << bytes.size() - offset << " bytes)\n";
    std::filesystem::resize_file(path_, offset);
  }
}

void Store::apply(const nlohmann::json& op) {
  const std::string& kind = op.at("op").get_ref<const std::string&>();
  const std::string& key = op.at("key").get_ref<const std::string&>();
  if (kind == "put") {
    data_[key] = op.at("value");
  } else if (kind == "del") {
    data_.erase(key);
  } else if (kind == "append") {
    auto& slot = data_[key];
    if (!slot.is_array()) slot = nlohmann::json::array();
    slot.push_back(op.at("value"));
  } else {
    throw Error(ErrorCode::StoreCorrupt, "unknown op '" + kind + "' in " + path_.string());
  }
}

void Store::reopen_for_append() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) io_fail("open", path_);
}

void Store::write_frame(const std::string& payload) {
  write_all(fd_, frame(payload), path_);
  if (options_.sync && ::fdatasync(fd_) != 0) io_fail("fdatasync", path_);
  ++frames_;
}

void Store::commit(const std::vector<Op>& ops) {
  if (ops.empty()) return;
  nlohmann::json encoded = nlohmann::json::array();
  for (const auto& op : ops) encoded.push_back(encode(op));
  std::string payload = encoded.dump();
  std::lock_guard<std::mutex> lock(mu_);
  write_frame(payload);
  for (const auto& op : encoded) apply(op);
}

std::optional<nlohmann::json> Store::get(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = data_.find(key);
  if (it == data_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<std::string, nlohmann::json>> Store::scan(
    const std::string& prefix) const {
  std::lock_guard<std::mutex> lock(mu_);
  std::vector<std::pair<std::string, nlohmann::json>> out;
  for (auto it = data_.lower_bound(prefix);
       it != data_.end() && it->first.compare(0, prefix.size(), prefix) == 0; ++it) {
    out.emplace_back(it->first, it->second);
  }
  return out;
}

uint32_t Store::checksum() const {
  std::lock_guard<std::mutex> lock(mu_);
  std::ifstream in(path_, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return crc_of(bytes.data(), bytes.size());
}

size_t Store::frame_count() const {
  std::lock_guard<std::mutex> lock(mu_);
  return frames_;
}

void Store::compact() {
  std::lock_guard<std::mutex> lock(mu_);
  std::filesystem::path tmp = path_;
  tmp += ".compact";
  int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) io_fail("open", tmp);
  std::string bytes;
  for (const auto& [key, value] : data_) {
    nlohmann::json ops = nlohmann::json::array({{{"op", "put"}, {"key", key}, {"value", value}}});
    bytes += frame(ops.dump());
  }
  write_all(fd, bytes, tmp);
  if (::fsync(fd) != 0) io_fail("fsync", tmp);
  ::close(fd);
  std::filesystem::rename(tmp, path_);
  if (path_.has_parent_path()) {
    int dir = ::open(path_.parent_path().c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (dir >= 0) {
      ::fsync(dir);
      ::close(dir);
    }
  }
  frames_ = data_.size();
  reopen_for_append();
}

}  // namespace ct
