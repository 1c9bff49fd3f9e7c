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

#include "ct/resources.h"

#include <cctype>
#include <charconv>
#include <set>

#include "ct/error.h"

namespace ct {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

// Parses an optionally signed decimal integer occupying all of `digits`.
int64_t parse_integer(std::string_view key, std::string_view digits) {
  if (digits.empty()) {
    throw Error(ErrorCode::MalformedPair,
                "missing value for '" + std::string(key) + "'");
  }
  int64_t value = 0;
  const char* first = digits.data();
  const char* last = digits.data() + digits.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec == std::errc::result_out_of_range) {
    throw Error(ErrorCode::ArithmeticOverflow,
                "value out of range for '" + std::string(key) + "'");
  }
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::MalformedPair, "value for '" + std::string(key) +
                                              "' is not an integer: '" +
                                              std::string(digits) + "'");
  }
  if (value < 0) {
    throw Error(ErrorCode::NegativeValue,
                "negative value for '" + std::string(key) + "'");
  }
  return value;
}

int64_t parse_memory_mib(std::string_view value) {
  int64_t multiplier_kib = 1024;  // bare number is MiB
  std::string_view digits = value;
  if (!value.empty() && std::isalpha(static_cast<unsigned char>(value.back()))) {
    // Find where the numeric prefix ends; anything after it is the unit.
    size_t unit_start = value.size();
    while (unit_start > 0 &&
           std::isalpha(static_cast<unsigned char>(value[unit_start - 1]))) {
      --unit_start;
    }
    std::string_view unit = value.substr(unit_start);
    digits = value.substr(0, unit_start);
    if (unit == "K") {
      multiplier_kib = 1;
    } else if (unit == "M") {
      multiplier_kib = 1024;
    } else if (unit == "G") {
      multiplier_kib = 1024 * 1024;
    } else {
      throw Error(ErrorCode::UnknownUnit,
                  "unknown memory unit '" + std::string(unit) + "'");
    }
  }
  int64_t amount = parse_integer("memory", digits);
  int64_t kib = 0;
  if (__builtin_mul_overflow(amount, multiplier_kib, &kib)) {
    throw Error(ErrorCode::ArithmeticOverflow, "memory value out of range");
  }
  if (kib % 1024 != 0) {
    throw Error(ErrorCode::MalformedPair,
                "memory '" + std::string(value) +
                    "' is not a whole number of MiB");
  }
  return kib / 1024;
}

}  // namespace

ResourceSpec checked_add(const ResourceSpec& a, const ResourceSpec& b) {
  ResourceSpec out;
  if (__builtin_add_overflow(a.vcores, b.vcores, &out.vcores) ||
      __builtin_add_overflow(a.gpu, b.gpu, &out.gpu) ||
      __builtin_add_overflow(a.memory_mib, b.memory_mib, &out.memory_mib)) {
    throw Error(ErrorCode::ArithmeticOverflow, "resource sum overflows");
  }
  return out;
}

ResourceSpec checked_scale(const ResourceSpec& r, int64_t factor) {
  ResourceSpec out;
  if (__builtin_mul_overflow(r.vcores, factor, &out.vcores) ||
      __builtin_mul_overflow(r.gpu, factor, &out.gpu) ||
      __builtin_mul_overflow(r.memory_mib, factor, &out.memory_mib)) {
    throw Error(ErrorCode::ArithmeticOverflow, "resource product overflows");
  }
  return out;
}

ParsedResources parse_resource_string(std::string_view s) {
  if (trim(s).empty()) {
    throw Error(ErrorCode::EmptySpec, "resource string is empty");
  }
  ParsedResources out;
  std::set<std::string, std::less<>> seen;
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string_view::npos) comma = s.size();
    std::string_view pair = trim(s.substr(pos, comma - pos));
    pos = comma + 1;

    size_t eq = pair.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::MalformedPair,
                  "expected key=value, got '" + std::string(pair) + "'");
    }
    std::string key(trim(pair.substr(0, eq)));
    std::string_view value = trim(pair.substr(eq + 1));
    // Aliases collapse before the duplicate check: cpu=1,vcores=2 is a clash.
    if (key == "vcores") key = "cpu";
    if (key != "cpu" && key != "gpu" && key != "memory" && key != "replicas") {
      throw Error(ErrorCode::UnknownKey, "unknown resource key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw Error(ErrorCode::DuplicateKey, "duplicate resource key '" + key + "'");
    }
    if (key == "cpu") {
      out.resources.vcores = parse_integer(key, value);
    } else if (key == "gpu") {
      out.resources.gpu = parse_integer(key, value);
    } else if (key == "memory") {
      out.resources.memory_mib = parse_memory_mib(value);
    } else {
      out.replicas = parse_integer(key, value);
    }
  }
  return out;
}

std::string format_resource_string(const ResourceSpec& r) {
  return "cpu=" + std::to_string(r.vcores) + ",gpu=" + std::to_string(r.gpu) +
         ",memory=" + std::to_string(r.memory_mib) + "M";
}

}  // namespace ct
