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

#ifndef CT_RELAXED_JSON_H_
#define CT_RELAXED_JSON_H_

#include <string>
#include <string_view>

#include "json.hpp"

namespace ct {

// Rewrites hand-written JSON into strict JSON:
//  - a comma followed only by whitespace before '}' or ']' is dropped;
//  - inside a string, a raw line break together with the blanks around it
//    becomes a single space.
// Everything else passes through untouched.
std::string normalize_relaxed_json(std::string_view text);

// normalize_relaxed_json + parse. Throws Error{ParseError}.
nlohmann::json parse_relaxed_json(std::string_view text);

}  // namespace ct

#endif  // CT_RELAXED_JSON_H_
