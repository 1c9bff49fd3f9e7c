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

#include "ct/relaxed_json.h"

#include "ct/error.h"

namespace ct {
namespace {

bool is_blank(char c) { return c == ' ' || c == '\t'; }
bool is_ws(char c) { return is_blank(c) || c == '\n' || c == '\r'; }

}  // namespace

std::string normalize_relaxed_json(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_string = false;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\' && i + 1 < text.size()) {
        out += c;
        out += text[++i];
      } else if (c == '"') {
        in_string = false;
        out += c;
      } else if (c == '\n' || c == '\r') {
        while (!out.empty() && is_blank(out.back())) out.pop_back();
        while (i + 1 < text.size() && is_ws(text[i + 1])) ++i;
        out += ' ';
      } else {
        out += c;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
      out += c;
    } else if (c == ',') {
      size_t j = i + 1;
      while (j < text.size() && is_ws(text[j])) ++j;
      if (j < text.size() && (text[j] == '}' || text[j] == ']')) continue;
      out += c;
    } else {
      out += c;
    }
  }
  return out;
}

nlohmann::json parse_relaxed_json(std::string_view text) {
  try {
    return nlohmann::json::parse(normalize_relaxed_json(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace ct
