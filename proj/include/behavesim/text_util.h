// Copyright 2026 The behavesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BEHAVESIM_TEXT_UTIL_H_
#define BEHAVESIM_TEXT_UTIL_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace behavesim {

std::string ascii_lower(std::string_view s);
std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);
bool iequals(std::string_view a, std::string_view b);

// Decodes UTF-8 into code points; invalid bytes decode as U+FFFD.
std::vector<char32_t> utf8_decode(std::string_view s);
void utf8_append(std::string& out, char32_t cp);

// Keeps at most `max_chars` code points, appending "..." when cut.
std::string utf8_truncate(std::string_view s, std::size_t max_chars);

// Collapses newlines and runs of whitespace into single spaces.
std::string single_line(std::string_view s);

// True for code points in the common CJK ideograph blocks.
bool is_cjk(char32_t cp);

// Lowercased word tokens. ASCII alphanumerics (and other non-CJK letters)
// form words; every CJK ideograph is its own token.
std::vector<std::string> word_tokens(std::string_view s);

// Replaces every "{{name}}" with the matching value; unknown placeholders
// are left untouched.
std::string render_placeholders(
    std::string_view tmpl,
    const std::vector<std::pair<std::string, std::string>>& values);

std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0);

}  // namespace behavesim

#endif  // BEHAVESIM_TEXT_UTIL_H_
