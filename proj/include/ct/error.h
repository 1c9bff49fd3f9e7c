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

#ifndef CT_ERROR_H_
#define CT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace ct {

// Every failure a service can report. The enumerator names are the wire
// codes: ApiError.code carries them verbatim.
enum class ErrorCode {
  // resource-string grammar
  EmptySpec,
  UnknownKey,
  MalformedPair,
  UnknownUnit,
  NegativeValue,
  DuplicateKey,
  ArithmeticOverflow,
  // payload decoding
  ParseError,
  ValidationFailed,
  // registries
  Conflict,
  NotFound,
  InUse,
  // templates
  MissingRequiredParameter,
  UnknownParameter,
  ResultInvalid,
  // environments
  YamlSyntax,
  MissingField,
  UnknownField,
  EnvironmentNotFound,
  // experiments
  IllegalTransition,
  NonFiniteMetric,
  AlreadyTerminal,
  StoreCorrupt,
  // backends
  BackendUnavailable,
  ResourceSpecUnsupported,
  SpawnFailure,
  UnknownHandle,
  Refused,
  DuplicateNodeId,
  // api
  Unauthenticated,
  Internal,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        nlohmann::json details = nullptr)
      : std::runtime_error(message),
        code_(code),
        details_(std::move(details)) {}

  ErrorCode code() const { return code_; }
  std::string_view code_name() const { return error_code_name(code_); }
  const nlohmann::json& details() const { return details_; }

 private:
  ErrorCode code_;
  nlohmann::json details_;
};

}  // namespace ct

#endif  // CT_ERROR_H_
