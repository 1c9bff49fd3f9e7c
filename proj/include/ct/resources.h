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

#ifndef CT_RESOURCES_H_
#define CT_RESOURCES_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace ct {

// A bundle of schedulable resources. Fields are signed so that a negative
// value produced by a bad payload can be detected by validation instead of
// silently wrapping.
struct ResourceSpec {
  int64_t vcores = 0;
  int64_t gpu = 0;
  int64_t memory_mib = 0;

  friend bool operator==(const ResourceSpec&, const ResourceSpec&) = default;

  bool non_negative() const {
    return vcores >= 0 && gpu >= 0 && memory_mib >= 0;
  }
  // Field-wise <=.
  bool fits_within(const ResourceSpec& capacity) const {
    return vcores <= capacity.vcores && gpu <= capacity.gpu &&
           memory_mib <= capacity.memory_mib;
  }
};

// Overflow-checked arithmetic; throws Error{ArithmeticOverflow}.
ResourceSpec checked_add(const ResourceSpec& a, const ResourceSpec& b);
ResourceSpec checked_scale(const ResourceSpec& r, int64_t factor);

inline ResourceSpec operator+(const ResourceSpec& a, const ResourceSpec& b) {
  return {a.vcores + b.vcores, a.gpu + b.gpu, a.memory_mib + b.memory_mib};
}
inline ResourceSpec operator-(const ResourceSpec& a, const ResourceSpec& b) {
  return {a.vcores - b.vcores, a.gpu - b.gpu, a.memory_mib - b.memory_mib};
}

struct ParsedResources {
  ResourceSpec resources;
  // Set when the string carried an inline `replicas=` pair.
  std::optional<int64_t> replicas;
};

// Parses "memory=4G,gpu=4,vcores=4" style strings. `cpu` and `vcores` are
// aliases; memory takes K/M/G (binary) suffixes and defaults to MiB. Pairs
// may be surrounded by whitespace, including line breaks.
ParsedResources parse_resource_string(std::string_view s);

// Canonical form: "cpu=<n>,gpu=<n>,memory=<m>M".
std::string format_resource_string(const ResourceSpec& r);

}  // namespace ct

#endif  // CT_RESOURCES_H_
