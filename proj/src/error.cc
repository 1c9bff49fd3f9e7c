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

#include "ct/error.h"

namespace ct {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptySpec: return "EmptySpec";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::MalformedPair: return "MalformedPair";
    case ErrorCode::UnknownUnit: return "UnknownUnit";
    case ErrorCode::NegativeValue: return "NegativeValue";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::ArithmeticOverflow: return "ArithmeticOverflow";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::Conflict: return "Conflict";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::InUse: return "InUse";
    case ErrorCode::MissingRequiredParameter: return "MissingRequiredParameter";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::ResultInvalid: return "ResultInvalid";
    case ErrorCode::YamlSyntax: return "YamlSyntax";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::EnvironmentNotFound: return "EnvironmentNotFound";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::NonFiniteMetric: return "NonFiniteMetric";
    case ErrorCode::AlreadyTerminal: return "AlreadyTerminal";
    case ErrorCode::StoreCorrupt: return "StoreCorrupt";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::ResourceSpecUnsupported: return "ResourceSpecUnsupported";
    case ErrorCode::SpawnFailure: return "SpawnFailure";
    case ErrorCode::UnknownHandle: return "UnknownHandle";
    case ErrorCode::Refused: return "Refused";
    case ErrorCode::DuplicateNodeId: return "DuplicateNodeId";
    case ErrorCode::Unauthenticated: return "Unauthenticated";
    case ErrorCode::Internal: return "Internal";
  }
  return "Internal";
}

}  // namespace ct
